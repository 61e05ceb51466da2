//! LQTS of growing windows across the transverse-field Ising transition.
//!
//! ```text
//! cargo run --release --example thermal_sweep -- 8 9.0
//! ```

use std::sync::Arc;

use lqts::{gibbs, lqts, SpinChainModel, SubsystemSpec};

fn main() -> lqts::Result<()> {
    let mut args = std::env::args().skip(1);
    let sites: usize = args.next().map_or(8, |a| a.parse().expect("chain length"));
    let beta: f64 = args.next().map_or(9.0, |a| a.parse().expect("beta"));
    let windows: Vec<usize> = [1, 2, sites / 2, sites]
        .into_iter()
        .filter(|&n| n >= 1)
        .collect();

    print!("{:>6}", "h");
    for n in &windows {
        print!("  {:>11}", format!("n_A={n}"));
    }
    println!("  {:>11}", "C");

    for k in 0..=20 {
        let h = 0.1 * k as f64;
        let model = SpinChainModel::ising(sites, h)?;
        let ens = gibbs(Arc::new(model.diagonalize()?), beta)?;
        print!("{h:>6.2}");
        for &n in &windows {
            let r = lqts(&ens, &SubsystemSpec::leading(sites, n)?)?;
            print!("  {:>11.4e}", r.lqts_beta);
        }
        println!("  {:>11.4e}", ens.energy_variance());
    }
    Ok(())
}
