//! Four independent evaluations of the same LQTS.

use std::sync::Arc;

use lqts::susceptibility::default_fidelity_steps;
use lqts::{
    gibbs, lqts, lqts_eigendiff, lqts_fidelity_oracle, lqts_via_omega, SpinChainModel,
    SubsystemSpec,
};

fn main() -> lqts::Result<()> {
    let cases = [
        ("ising h=1.0", SpinChainModel::ising(5, 1.0)?, 2.0, 2),
        ("ising h=0.5", SpinChainModel::ising(4, 0.5)?, 4.0, 1),
        ("xxz d=-1.0", SpinChainModel::xxz(4, -1.0)?, 1.0, 2),
        ("xxz d=1.5", SpinChainModel::xxz(5, 1.5)?, 1.0, 3),
    ];
    println!(
        "{:<12} {:>3} {:>4} {:>14} {:>14} {:>14} {:>14}",
        "model", "L", "n_A", "schmidt", "eigendiff", "fidelity", "omega"
    );
    for (name, model, beta, n_a) in cases {
        let ens = gibbs(Arc::new(model.diagonalize()?), beta)?;
        let sub = SubsystemSpec::leading(model.sites(), n_a)?;
        println!(
            "{:<12} {:>3} {:>4} {:>14.8e} {:>14.8e} {:>14.8e} {:>14.8e}",
            name,
            model.sites(),
            n_a,
            lqts(&ens, &sub)?.lqts_beta,
            lqts_eigendiff(&ens, &sub)?.lqts_beta,
            lqts_fidelity_oracle(&ens, &sub, &default_fidelity_steps(beta))?,
            lqts_via_omega(&ens, &sub)?,
        );
    }
    Ok(())
}
