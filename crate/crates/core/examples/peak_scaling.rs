//! Power-law growth of the Ising peak and the XXZ ferromagnetic trough with window size at `beta = 3L/4`.
//!
//! ```text
//! cargo run --release --example peak_scaling -- 10
//! ```

use lqts::experiments::{run_peak_scaling, GridSpec, ScalingJob};
use lqts::landau_zener::ExtremumKind;

fn main() -> lqts::Result<()> {
    let sites: usize = std::env::args()
        .nth(1)
        .map_or(8, |a| a.parse().expect("chain length"));
    let jobs = [
        ("ising", GridSpec::linear(0.2, 1.6, 29), ExtremumKind::Max),
        // The trough at delta = -1 is a few hundredths wide.
        ("xxz", GridSpec::linear(-1.2, -0.8, 57), ExtremumKind::Min),
    ];
    for (family, grid, kind) in jobs {
        let job = ScalingJob {
            family: family.into(),
            sizes: vec![sites],
            coupling: 1.0,
            grid,
            extremum: Some(kind),
            subsystems: None,
            beta: None,
            workers: 1,
            out: None,
        };
        let fit = run_peak_scaling(&job)?.remove(0);
        println!(
            "{} L={} beta={} {:?}",
            fit.family, fit.sites, fit.beta, fit.kind
        );
        for p in &fit.points {
            println!(
                "  n_A={} at {:.4}: {:.5e}{}",
                p.n_a,
                p.location,
                p.value,
                if p.used_in_fit { "" } else { " (not fitted)" }
            );
        }
        println!("  alpha = {:.3}, residual {:.2e}", fit.alpha, fit.residual);
    }
    Ok(())
}
