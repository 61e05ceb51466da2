//! Best temperature error reachable by measuring a window, per shot count.

use std::sync::Arc;

use lqts::{cramer_rao_bound, gibbs, lqts, SpinChainModel, SubsystemSpec};

fn main() -> lqts::Result<()> {
    let model = SpinChainModel::ising(8, 1.0)?;
    let spectrum = Arc::new(model.diagonalize()?);
    let shots = 10_000;
    println!("ising L=8 h=1, {shots} measurements");
    println!(
        "{:>6} {:>6} {:>12} {:>12} {:>12}",
        "T", "n_A", "S_beta", "S_T", "dT min"
    );
    for t in [0.1, 0.3, 1.0, 3.0] {
        let ens = gibbs(Arc::clone(&spectrum), 1.0 / t)?;
        for n_a in [1, 2, 4, 8] {
            let r = lqts(&ens, &SubsystemSpec::leading(8, n_a)?)?;
            println!(
                "{t:>6.2} {n_a:>6} {:>12.4e} {:>12.4e} {:>12.4e}",
                r.lqts_beta,
                r.temperature_units(1.0 / t),
                cramer_rao_bound(r.lqts_beta, 1.0 / t, shots)
            );
        }
    }
    Ok(())
}
