//! Low- and high-temperature expansions against the exact LQTS.

use std::sync::Arc;

use lqts::{gibbs, high_t_expansion, low_t_expansion, lqts, SpinChainModel, SubsystemSpec};

fn main() -> lqts::Result<()> {
    let model = SpinChainModel::ising(6, 1.5)?;
    let spectrum = Arc::new(model.diagonalize()?);
    let sub = SubsystemSpec::leading(6, 2)?;

    println!("low temperature, ising L=6 h=1.5 n_A=2");
    println!(
        "{:>6} {:>13} {:>13} {:>13} {:>13}",
        "beta", "exact", "first", "first+second", "e^(-2 b E1)"
    );
    for beta in [6.0, 8.0, 10.0, 12.0, 14.0] {
        let exact = lqts(&gibbs(Arc::clone(&spectrum), beta)?, &sub)?.lqts_beta;
        let exp = low_t_expansion(&spectrum, &sub, beta, None)?;
        println!(
            "{beta:>6.1} {exact:>13.5e} {:>13.5e} {:>13.5e} {:>13.5e}",
            exp.first_order,
            exp.total(),
            (-2.0 * beta * exp.gap).exp()
        );
    }
    let exp = low_t_expansion(&spectrum, &sub, 10.0, None)?;
    for level in &exp.levels {
        println!(
            "  level E={:.4} n={} overlap with ground support {:.6}",
            level.energy, level.multiplicity, level.overlap
        );
    }

    let model = SpinChainModel::ising(6, 1.0)?;
    let spectrum = Arc::new(model.diagonalize()?);
    println!("\nhigh temperature, ising L=6 h=1.0");
    println!(
        "{:>6} {:>8} {:>13} {:>13} {:>10}",
        "n_A", "beta", "exact", "series", "resid/b^2"
    );
    for n_a in [1, 2, 3] {
        let sub = SubsystemSpec::leading(6, n_a)?;
        for beta in [1e-3, 1e-2, 1e-1] {
            let exact = lqts(&gibbs(Arc::clone(&spectrum), beta)?, &sub)?.lqts_beta;
            let series = high_t_expansion(&model, &sub, beta)?;
            println!(
                "{n_a:>6} {beta:>8.0e} {exact:>13.7} {series:>13.7} {:>10.4}",
                (exact - series) / (beta * beta)
            );
        }
    }
    Ok(())
}
