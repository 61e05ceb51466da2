//! Two-level heat capacity and the gap of a real chain.
//!
//! The gap of the Ising chain above its ground doublet closes near the
//! critical field and is fed to the classifier as a gap profile.

use lqts::linalg::group_degenerate;
use lqts::{lz_classify_sweep, lz_heat_capacity, lz_optimal_gap, SpinChainModel, TwoLevelSystem};

fn main() -> lqts::Result<()> {
    let beta = 9.0;
    for (n0, n1) in [(1, 1), (2, 1), (1, 2)] {
        let gap = lz_optimal_gap(n0, n1, beta)?;
        let peak = lz_heat_capacity(&TwoLevelSystem::new(gap, n0, n1, beta)?);
        println!(
            "n0={n0} n1={n1}: beta dE* = {:.5}, peak heat capacity {peak:.5}",
            beta * gap
        );
    }

    let mut profile = Vec::new();
    for k in 1..=20 {
        let h = 0.1 * k as f64;
        let spec = SpinChainModel::ising(8, h)?.diagonalize()?;
        let parts = group_degenerate(&spec, spec.default_degeneracy_tol())?;
        let groups = parts.groups();
        profile.push((h, groups[2].energy - groups[0].energy));
    }
    let report = lz_classify_sweep(&profile, 2, 1, beta)?;
    println!("\nising L=8 gap above the ground doublet vs h, beta = {beta}");
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}
