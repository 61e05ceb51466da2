//! Local quantum thermal susceptibility of a window `A` of a thermal chain.
//!
//! The susceptibility is the quantum Fisher information of the reduced state
//! `rho_A(beta)` with respect to `beta`. Three independent evaluations are
//! provided: a closed form in the eigenbasis of `rho_A`, an eigen-difference
//! form on an explicit purification, and a finite-difference fidelity limit.
//! The heat capacity `Var(H)` bounds all of them and the remainder is the
//! phase QFI of the complement.

use std::fmt;
use std::str::FromStr;

use faer::{c64, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{self, purify, reduced_thermal_state, GibbsEnsemble};
use crate::linalg::{
    self, eigh, eigh_mat, kron, HermitianOperator, SpectralDecomposition, DEFAULT_RANK_RTOL,
};
use crate::spin::{SpinChainModel, SubsystemSpec};

/// Pairs with `lambda_j + lambda_k` at or below this fraction of the largest
/// eigenvalue are skipped.
pub const LAMBDA_FLOOR_RTOL: f64 = 1e-14;

/// Largest tolerated eigenvalue mass of `rho_A` lost to the floor.
pub const MAX_DROPPED_MASS: f64 = 1e-6;

/// Fidelities above one by more than this are rejected.
pub const FIDELITY_SLACK: f64 = 1e-10;

/// LQTS values (in units of `J^2`) below this are not resolved: independent
/// routes disagree there and curves wobble at the roundoff level.
pub const LQTS_RESOLUTION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form in the eigenbasis of the reduced state.
    Schmidt,
    /// Eigen-difference form on the purification.
    #[serde(rename = "eigendiff")]
    EigenDifference,
    /// Extrapolated fidelity susceptibility.
    Fidelity,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Schmidt, Method::EigenDifference, Method::Fidelity];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Schmidt => "schmidt",
            Method::EigenDifference => "eigendiff",
            Method::Fidelity => "fidelity",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schmidt" => Ok(Method::Schmidt),
            "eigendiff" => Ok(Method::EigenDifference),
            "fidelity" => Ok(Method::Fidelity),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LqtsResult {
    /// Susceptibility with respect to `beta`.
    pub lqts_beta: f64,
    /// `Var(H)`, the susceptibility of the whole chain.
    pub heat_capacity: f64,
    /// `heat_capacity - lqts_beta`.
    pub complement_qfi: f64,
    /// Absolute eigenvalue floor below which pairs were skipped.
    pub spectrum_floor: f64,
    /// Eigenvalue mass touched only by skipped pairs.
    pub dropped_lambda_mass: f64,
    pub method: Method,
}

impl LqtsResult {
    fn new(lqts_beta: f64, heat_capacity: f64, floor: f64, dropped: f64, method: Method) -> Self {
        Self {
            lqts_beta,
            heat_capacity,
            complement_qfi: heat_capacity - lqts_beta,
            spectrum_floor: floor,
            dropped_lambda_mass: dropped,
            method,
        }
    }

    /// Result from a bare susceptibility value, with no eigenvalue floor.
    pub fn from_value(lqts_beta: f64, heat_capacity: f64, method: Method) -> Self {
        Self::new(lqts_beta, heat_capacity, 0.0, 0.0, method)
    }

    /// Susceptibility in temperature units, `lqts_beta * beta^4`.
    pub fn temperature_units(&self, beta: f64) -> f64 {
        temperature_susceptibility(self.lqts_beta, beta)
    }
}

/// `2 sum_{jk} |K_jk|^2 / (l_j + l_k)` with `K` expressed in the eigenbasis
/// of the weights. Returns the sum, the absolute floor and the dropped mass.
fn weighted_pair_sum(lambda: &[f64], k: MatRef<'_, c64>) -> (f64, f64, f64) {
    let lambda: Vec<f64> = lambda.iter().map(|l| l.max(0.0)).collect();
    let top = lambda.iter().cloned().fold(0.0f64, f64::max);
    let floor = LAMBDA_FLOOR_RTOL * top;
    let low = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let dropped: f64 = lambda.iter().filter(|&&l| l + low <= floor).sum();
    let n = lambda.len();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            let s = lambda[i] + lambda[j];
            if s > floor {
                acc += k[(i, j)].norm_sqr() / s;
            }
        }
    }
    (2.0 * acc, floor, dropped)
}

/// LQTS of the window `sub` in the ensemble `ens`, from the eigenbasis of
/// `rho_A` and the single contraction `Tr_B[rho (H - <H>)]`.
pub fn lqts(ens: &GibbsEnsemble, sub: &SubsystemSpec) -> Result<LqtsResult> {
    if sub.is_whole() {
        ens.check_subsystem(sub)?;
        return Ok(whole_chain_lqts(ens));
    }
    lqts_dense(ens, sub)
}

/// With an empty complement `rho_A` is the Gibbs state, whose eigenpairs are
/// the Boltzmann weights and energy eigenvectors. `K` is then diagonal with
/// entries `w_j (E_j - <H>)`, and no eigenvalue floor is needed.
fn whole_chain_lqts(ens: &GibbsEnsemble) -> LqtsResult {
    let mean = ens.mean_energy();
    let value: f64 = ens
        .weights()
        .iter()
        .zip(ens.spectrum().values())
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, e)| {
            let k = w * (e - mean);
            2.0 * k * k / (2.0 * w)
        })
        .sum();
    LqtsResult::new(value, ens.energy_variance(), 0.0, 0.0, Method::Schmidt)
}

/// Generic route: diagonalize the reduced state numerically.
pub(crate) fn lqts_dense(ens: &GibbsEnsemble, sub: &SubsystemSpec) -> Result<LqtsResult> {
    let (rho_a, k) = gibbs::reduced_state_and_energy(ens, sub)?;
    let (lambda, g) = eigh_mat(rho_a.as_mat())?;
    let k_rot = k.in_basis(g.as_ref());
    let (value, floor, dropped) = weighted_pair_sum(&lambda, k_rot.as_mat());
    if dropped > MAX_DROPPED_MASS {
        return Err(Error::UnreliableFloor { mass: dropped });
    }
    Ok(LqtsResult::new(
        value,
        ens.energy_variance(),
        floor,
        dropped,
        Method::Schmidt,
    ))
}

/// LQTS from the spectrum of `Tr_{A'}` of the purification,
/// `Var(H) - sum_{j<k} (l_j - l_k)^2 / (l_j + l_k) |<e_k|H|e_j>|^2`.
pub fn lqts_eigendiff(ens: &GibbsEnsemble, sub: &SubsystemSpec) -> Result<LqtsResult> {
    let correction = eigendiff_correction(ens, sub)?;
    let var = ens.energy_variance();
    Ok(LqtsResult::new(
        var - correction.0,
        var,
        correction.1,
        0.0,
        Method::EigenDifference,
    ))
}

/// The correction sum of [`lqts_eigendiff`] and the floor used. This is the
/// phase QFI of the complement.
pub fn eigendiff_correction(ens: &GibbsEnsemble, sub: &SubsystemSpec) -> Result<(f64, f64)> {
    let state = purify(ens)?;
    let rho = state.trace_ancilla_window(sub)?;
    let h = ens.spectrum().reconstruct();
    let h_ext = kron(&h, &HermitianOperator::identity(sub.d_b()))?;
    let spec = eigh(&rho)?;
    let e = spec.dense_vectors();
    let h_rot = h_ext.in_basis(e.as_ref());
    let lambda: Vec<f64> = spec.values().iter().map(|l| l.max(0.0)).collect();
    let top = lambda.iter().cloned().fold(0.0f64, f64::max);
    let floor = LAMBDA_FLOOR_RTOL * top;
    let n = lambda.len();
    let mut acc = 0.0;
    for k in 0..n {
        for j in 0..k {
            let s = lambda[j] + lambda[k];
            if s > floor {
                let d = lambda[j] - lambda[k];
                acc += d * d / s * h_rot.get(k, j).norm_sqr();
            }
        }
    }
    Ok((acc, floor))
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, evaluated as the
/// trace norm of `sqrt(rho) sqrt(sigma)`.
pub fn uhlmann_fidelity(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let sqrt_rho = eigh(rho)?.map_values(|x| x.max(0.0).sqrt());
    let sqrt_sigma = eigh(sigma)?.map_values(|x| x.max(0.0).sqrt());
    let product = sqrt_rho.matmul(&sqrt_sigma);
    Ok(linalg::singular_values(product.as_ref())?.iter().sum())
}

/// Default steps for [`lqts_fidelity_oracle`].
pub fn default_fidelity_steps(beta: f64) -> Vec<f64> {
    vec![1e-2 * beta, 5e-3 * beta, 2.5e-3 * beta]
}

/// Fidelity susceptibility `8 (1 - F) / eps^2` between the reduced states at
/// `beta - eps/2` and `beta + eps/2`, extrapolated to `eps -> 0` in powers of
/// `eps^2`.
pub fn lqts_fidelity_oracle(
    ens: &GibbsEnsemble,
    sub: &SubsystemSpec,
    eps_list: &[f64],
) -> Result<f64> {
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("no finite-difference steps".into()));
    }
    let beta = ens.beta();
    let mut points = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) || eps > 1e-2 * beta * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "step {eps} outside (0, 1e-2 * beta]"
            )));
        }
        let lo = reduced_thermal_state(&ens.at_beta(beta - eps / 2.0)?, sub)?;
        let hi = reduced_thermal_state(&ens.at_beta(beta + eps / 2.0)?, sub)?;
        let f = uhlmann_fidelity(&lo, &hi)?;
        if f > 1.0 + FIDELITY_SLACK {
            return Err(Error::FidelityAboveOne(f));
        }
        points.push((eps * eps, 8.0 * (1.0 - f) / (eps * eps)));
    }
    Ok(extrapolate_to_zero(&points))
}

/// Neville extrapolation of `(x_i, y_i)` to `x = 0`.
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let mut p: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (points[i].0, points[i + m].0);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

/// One level entering the low-temperature expansion.
#[derive(Clone, Debug)]
pub struct ReducedLevel {
    /// Energy above the ground level.
    pub energy: f64,
    pub multiplicity: usize,
    /// `Tr_B` of the unit-trace projector onto the level.
    pub projector: HermitianOperator,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelOverlap {
    pub energy: f64,
    pub multiplicity: usize,
    /// `Tr[P_0^A Pi_i^A]`.
    pub overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowTExpansion {
    pub first_order: f64,
    pub second_order: f64,
    pub gap: f64,
    pub levels: Vec<LevelOverlap>,
}

impl LowTExpansion {
    pub fn total(&self) -> f64 {
        self.first_order + self.second_order
    }
}

/// Low-temperature expansion from the ground level (`levels[0]`, energy 0)
/// and the excited levels in ascending order. Levels above `2 E_1 + tol` are
/// ignored.
pub fn low_t_expansion_from_levels(
    levels: &[ReducedLevel],
    beta: f64,
    tol: f64,
) -> Result<LowTExpansion> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidTemperature(beta));
    }
    if levels.len() < 2 || levels[1].energy < tol {
        return Err(Error::Gapless(tol));
    }
    let ground = &levels[0];
    let n0 = ground.multiplicity as f64;
    let gap = levels[1].energy;

    let (p, phi) = eigh_mat(ground.projector.as_mat())?;
    let p_max = p.iter().cloned().fold(0.0f64, f64::max);
    let rank_tol = DEFAULT_RANK_RTOL * p_max;
    let support: Vec<bool> = p.iter().map(|&x| x > rank_tol).collect();
    let rotate = |op: &HermitianOperator| op.in_basis(phi.as_ref());

    let mut first_order = 0.0;
    let mut overlaps = Vec::new();
    for level in levels.iter().skip(1) {
        if level.energy > 2.0 * gap + tol {
            break;
        }
        let r = rotate(&level.projector);
        let overlap: f64 = (0..p.len())
            .filter(|&m| support[m])
            .map(|m| r.get(m, m).re)
            .sum();
        let weight = level.multiplicity as f64 / n0;
        first_order +=
            weight * level.energy.powi(2) * (-beta * level.energy).exp() * (1.0 - overlap);
        overlaps.push(LevelOverlap {
            energy: level.energy,
            multiplicity: level.multiplicity,
            overlap,
        });
    }

    let first = &levels[1];
    let r = rotate(&first.projector);
    let d = p.len();
    let mut trace_terms = overlaps[0].overlap;
    let mut resummed = 0.0;
    for m in 0..d {
        if !support[m] {
            continue;
        }
        for mp in 0..d {
            let a = r.get(m, mp).norm_sqr();
            trace_terms += a * if support[mp] { 2.0 } else { 1.0 } / p[m];
            if support[mp] {
                resummed += a * p[mp] / (p[m] * (p[m] + p[mp]));
            }
        }
    }
    let prefactor = (first.energy * first.multiplicity as f64 / n0).powi(2)
        * (-2.0 * beta * first.energy).exp();
    let second_order = prefactor * (-2.0 + trace_terms - 2.0 * resummed);

    Ok(LowTExpansion {
        first_order,
        second_order,
        gap,
        levels: overlaps,
    })
}

/// Reduced, unit-trace level projectors of the lowest multiplets up to
/// `max_energy` above the ground level.
pub fn reduced_levels(
    spectrum: &SpectralDecomposition,
    sub: &SubsystemSpec,
    max_levels: usize,
    degeneracy_tol: f64,
) -> Result<Vec<ReducedLevel>> {
    if 1usize << sub.chain_len() != spectrum.dim() {
        return Err(Error::InvalidSubsystem(
            "window does not match the spectrum".into(),
        ));
    }
    let parts = linalg::group_degenerate(spectrum, degeneracy_tol)?;
    let e0 = parts.groups()[0].energy;
    let mut out = Vec::new();
    for group in parts.groups().iter().take(max_levels) {
        let mut weights = vec![0.0; spectrum.dim()];
        let w = 1.0 / group.multiplicity() as f64;
        for &k in &group.members {
            weights[k] = w;
        }
        let (rho, _) = gibbs::reduce_mixture(spectrum, sub, &weights, None);
        out.push(ReducedLevel {
            energy: group.energy - e0,
            multiplicity: group.multiplicity(),
            projector: HermitianOperator::from_hermitian_part(rho),
        });
    }
    Ok(out)
}

/// Low-temperature expansion of the LQTS of `sub`, grouping levels with
/// `degeneracy_tol` (default: relative `1e-9` of the spectral range).
pub fn low_t_expansion(
    spectrum: &SpectralDecomposition,
    sub: &SubsystemSpec,
    beta: f64,
    degeneracy_tol: Option<f64>,
) -> Result<LowTExpansion> {
    let tol = degeneracy_tol.unwrap_or_else(|| spectrum.default_degeneracy_tol());
    let parts = linalg::group_degenerate(spectrum, tol)?;
    if parts.len() < 2 {
        return Err(Error::Gapless(tol));
    }
    let e0 = parts.groups()[0].energy;
    let gap = parts.groups()[1].energy - e0;
    let count = parts
        .groups()
        .iter()
        .take_while(|g| g.energy - e0 <= 2.0 * gap + tol)
        .count();
    let levels = reduced_levels(spectrum, sub, count, tol)?;
    low_t_expansion_from_levels(&levels, beta, tol)
}

/// High-temperature expansion to first order in `beta`,
/// `(1/d_A) Tr[Ht^2 - 2 beta Ht Tr_B[H^2] / d_B + beta Ht^3]` with
/// `Ht = Tr_B[H] / d_B` after making `H` traceless.
pub fn high_t_expansion(model: &SpinChainModel, sub: &SubsystemSpec, beta: f64) -> Result<f64> {
    model.check_subsystem(sub)?;
    let h = model.hamiltonian()?;
    let h = h.shift(-h.trace() / h.dim() as f64);
    let (da, db) = (sub.d_a() as f64, sub.d_b() as f64);
    let ht = sub.trace_out_complement(&h)?.scale(1.0 / db);
    let h2_a = sub.trace_out_complement(&h.square())?;
    let ht2 = ht.square();
    let t2 = ht2.trace();
    let cross = ht.trace_product(&h2_a).re;
    let t3 = ht2.trace_product(&ht).re;
    Ok((t2 - 2.0 * beta * cross / db + beta * t3) / da)
}

/// Cramer-Rao bound `T^2 / sqrt(N S)` on the temperature error, infinite
/// when the susceptibility vanishes.
pub fn cramer_rao_bound(lqts_beta: f64, beta: f64, n_measurements: u64) -> f64 {
    if !(lqts_beta > 0.0) || n_measurements == 0 {
        return f64::INFINITY;
    }
    let t = 1.0 / beta;
    t * t / (n_measurements as f64 * lqts_beta).sqrt()
}

/// Converts a susceptibility in `beta` to one in `T`.
pub fn temperature_susceptibility(lqts_beta: f64, beta: f64) -> f64 {
    lqts_beta * beta.powi(4)
}
