//! Local quantum thermal susceptibility (LQTS) of thermal spin chains.
//!
//! The LQTS of a window `A` of a chain in the Gibbs state `exp(-beta H)/Z`
//! is the quantum Fisher information of the reduced state `rho_A` with
//! respect to `beta`. It measures how well `beta` can be estimated from
//! measurements on `A` alone and is bounded by the heat capacity `Var(H)`,
//! which it reaches when `A` is the whole chain.
//!
//! ```
//! use std::sync::Arc;
//! use lqts::{gibbs, lqts, SpinChainModel, SubsystemSpec};
//!
//! let model = SpinChainModel::ising(6, 1.0)?;
//! let ens = gibbs(Arc::new(model.diagonalize()?), 3.0)?;
//! let r = lqts(&ens, &SubsystemSpec::leading(6, 2)?)?;
//! assert!(r.lqts_beta <= r.heat_capacity);
//! # Ok::<(), lqts::Error>(())
//! ```
//!
//! Units: `k_B = 1` and energies are measured in units of the coupling `J`.

pub mod anticommutator;
pub mod error;
pub mod experiments;
pub mod gibbs;
pub mod landau_zener;
pub mod linalg;
pub mod spin;
pub mod susceptibility;

pub use anticommutator::{lqts_via_omega, solve_anticommutator, AnticommutatorSolution};
pub use error::{Error, Result};
pub use gibbs::{
    gibbs, purify, reduced_thermal_state, truncated_energy_variance, GibbsEnsemble, PurifiedState,
};
pub use landau_zener::{lz_classify_sweep, lz_heat_capacity, lz_optimal_gap, TwoLevelSystem};
pub use linalg::{eigh, HermitianOperator, SpectralDecomposition};
pub use spin::{ModelFamily, SpinChainModel, SubsystemSpec};
pub use susceptibility::{
    cramer_rao_bound, high_t_expansion, low_t_expansion, lqts, lqts_eigendiff,
    lqts_fidelity_oracle, LowTExpansion, LqtsResult, Method,
};
