//! Gibbs ensembles, reduced thermal states and explicit purifications.
//!
//! Units: `k_B = 1`, energies in units of the coupling, and `beta` is the
//! native parameter. Boltzmann factors are always evaluated relative to the
//! ground energy, `exp(-beta (E_i - E_0))`, so no weight overflows for any
//! finite positive `beta`.

use std::sync::Arc;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::linalg::{self, mul_adj, HermitianOperator, SpectralDecomposition};
use crate::spin::SubsystemSpec;

/// Eigenvectors whose Boltzmann weight is below this fraction of the ground
/// weight are left out of reduced-state contractions. Their total weight is
/// below `dim * 1e-30`.
pub const WEIGHT_CUTOFF: f64 = 1e-30;

/// Largest `dim(H)^2` for which [`purify`] materializes the doubled space.
pub const PURIFICATION_CAP: usize = 1 << 16;

/// Largest dimension of a reduced state of the purification, which is
/// diagonalized densely alongside several operators of the same size.
pub const PURIFIED_REDUCED_CAP: usize = 1 << 12;

/// Thermal state `exp(-beta H) / Z` in the eigenbasis of `H`.
#[derive(Clone, Debug)]
pub struct GibbsEnsemble {
    beta: f64,
    spectrum: Arc<SpectralDecomposition>,
    weights: Vec<f64>,
    log_z_shifted: f64,
}

impl GibbsEnsemble {
    pub fn new(spectrum: Arc<SpectralDecomposition>, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidTemperature(beta));
        }
        let e0 = spectrum.ground_energy();
        let factors: Vec<f64> = spectrum
            .values()
            .iter()
            .map(|&e| (-beta * (e - e0)).exp())
            .collect();
        // Ascending order puts the unit ground factor first.
        let excess: f64 = factors.iter().skip(1).sum();
        let z = 1.0 + excess;
        let weights = factors.iter().map(|f| f / z).collect();
        Ok(Self {
            beta,
            spectrum,
            weights,
            log_z_shifted: excess.ln_1p(),
        })
    }

    /// Same spectrum at a different inverse temperature.
    pub fn at_beta(&self, beta: f64) -> Result<Self> {
        Self::new(Arc::clone(&self.spectrum), beta)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn shared_spectrum(&self) -> Arc<SpectralDecomposition> {
        Arc::clone(&self.spectrum)
    }

    /// Boltzmann weights in ascending-energy order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln sum_i exp(-beta (E_i - E_0))`.
    pub fn log_z_shifted(&self) -> f64 {
        self.log_z_shifted
    }

    /// `ln Z`.
    pub fn log_partition(&self) -> f64 {
        self.log_z_shifted - self.beta * self.spectrum.ground_energy()
    }

    pub fn mean_energy(&self) -> f64 {
        self.weights
            .iter()
            .zip(self.spectrum.values())
            .map(|(w, e)| w * e)
            .sum()
    }

    /// `Tr[rho H^2] - Tr[rho H]^2`, accumulated around the mean.
    pub fn energy_variance(&self) -> f64 {
        let mean = self.mean_energy();
        self.weights
            .iter()
            .zip(self.spectrum.values())
            .map(|(w, e)| w * (e - mean) * (e - mean))
            .sum()
    }

    /// Dense `rho_beta`.
    pub fn density_matrix(&self) -> HermitianOperator {
        let e0 = self.spectrum.ground_energy();
        let (beta, lz) = (self.beta, self.log_z_shifted);
        self.spectrum.map_values(|e| (-beta * (e - e0) - lz).exp())
    }

    pub(crate) fn check_subsystem(&self, sub: &SubsystemSpec) -> Result<()> {
        if 1usize << sub.chain_len() != self.spectrum.dim() {
            return Err(Error::InvalidSubsystem(format!(
                "subsystem of a {}-site chain used with a spectrum of dim {}",
                sub.chain_len(),
                self.spectrum.dim()
            )));
        }
        Ok(())
    }
}

pub fn gibbs(spectrum: Arc<SpectralDecomposition>, beta: f64) -> Result<GibbsEnsemble> {
    GibbsEnsemble::new(spectrum, beta)
}

pub fn energy_variance(ens: &GibbsEnsemble) -> f64 {
    ens.energy_variance()
}

/// Contracts `sum_i weight_i |E_i><E_i|` over the complement of `sub`.
///
/// Returns `Tr_B[sum_i w_i |E_i><E_i|]` and, when `factors` is given,
/// `Tr_B[sum_i w_i f_i |E_i><E_i|]`. Both slices are indexed in ascending
/// global order.
pub(crate) fn reduce_mixture(
    spectrum: &SpectralDecomposition,
    sub: &SubsystemSpec,
    weights: &[f64],
    factors: Option<&[f64]>,
) -> (Mat<c64>, Option<Mat<c64>>) {
    let (da, db) = (sub.d_a(), sub.d_b());
    let position = sub.bipartition_index();
    let top = weights.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = WEIGHT_CUTOFF * top;
    let globals = spectrum.global_indices();

    let mut rho = Mat::<c64>::zeros(da, da);
    let mut k_op = factors.map(|_| Mat::<c64>::zeros(da, da));

    for (block, global) in spectrum.blocks().iter().zip(&globals) {
        let kept: Vec<(usize, usize)> = global
            .iter()
            .enumerate()
            .filter(|&(_, &g)| weights[g] > cutoff && weights[g] > 0.0)
            .map(|(c, &g)| (c, g))
            .collect();
        if kept.is_empty() {
            continue;
        }
        let m = kept.len();
        let v = block.vectors();
        // phi[a, b*m + t] = <a b|E_t> sqrt(w_t)
        let mut phi = Mat::<c64>::zeros(da, db * m);
        for (r, &s) in block.basis().iter().enumerate() {
            let p = position[s];
            let (a, b) = (p / db, p % db);
            for (t, &(c, g)) in kept.iter().enumerate() {
                phi[(a, b * m + t)] = v[(r, c)] * weights[g].sqrt();
            }
        }
        let part = mul_adj(phi.as_ref(), phi.as_ref());
        rho += &part;
        if let (Some(f), Some(k)) = (factors, k_op.as_mut()) {
            let psi = Mat::<c64>::from_fn(da, db * m, |a, col| phi[(a, col)] * f[kept[col % m].1]);
            *k += &mul_adj(psi.as_ref(), phi.as_ref());
        }
    }
    (rho, k_op)
}

/// `rho_A = Tr_B[rho_beta]`.
pub fn reduced_thermal_state(
    ens: &GibbsEnsemble,
    sub: &SubsystemSpec,
) -> Result<HermitianOperator> {
    ens.check_subsystem(sub)?;
    let (rho, _) = reduce_mixture(ens.spectrum(), sub, ens.weights(), None);
    Ok(HermitianOperator::from_hermitian_part(rho))
}

/// `rho_A` together with `Tr_B[rho_beta (H - <H>)]`.
pub(crate) fn reduced_state_and_energy(
    ens: &GibbsEnsemble,
    sub: &SubsystemSpec,
) -> Result<(HermitianOperator, HermitianOperator)> {
    ens.check_subsystem(sub)?;
    let mean = ens.mean_energy();
    let shifted: Vec<f64> = ens.spectrum().values().iter().map(|e| e - mean).collect();
    let (rho, k) = reduce_mixture(ens.spectrum(), sub, ens.weights(), Some(&shifted));
    Ok((
        HermitianOperator::from_hermitian_part(rho),
        HermitianOperator::from_hermitian_part(k.expect("factors were supplied")),
    ))
}

/// The canonical purification `sum_i sqrt(w_i) |E_i>|E_i>` of a Gibbs state,
/// stored as the amplitude matrix `psi[s, s']` over system and ancilla.
#[derive(Clone, Debug)]
pub struct PurifiedState {
    psi: Mat<c64>,
}

/// Builds the purification of `ens` on `AB ⊗ A'B'`. The doubled space is
/// materialized, so this is limited to `dim^2 <= PURIFICATION_CAP`.
pub fn purify(ens: &GibbsEnsemble) -> Result<PurifiedState> {
    purify_with_cap(ens, PURIFICATION_CAP)
}

pub fn purify_with_cap(ens: &GibbsEnsemble, cap: usize) -> Result<PurifiedState> {
    let n = ens.spectrum().dim();
    if n * n > cap {
        return Err(Error::PurificationCap { dim: n * n, cap });
    }
    let v = ens.spectrum().dense_vectors();
    let sqrt_w: Vec<f64> = ens.weights().iter().map(|w| w.sqrt()).collect();
    let scaled = Mat::<c64>::from_fn(n, n, |s, i| v[(s, i)] * sqrt_w[i]);
    // psi = V diag(sqrt w) V^T
    let vt_conj = Mat::<c64>::from_fn(n, n, |s, i| v[(s, i)].conj());
    let psi = mul_adj(scaled.as_ref(), vt_conj.as_ref());
    Ok(PurifiedState { psi })
}

impl PurifiedState {
    /// Dimension of one copy of the system.
    pub fn system_dim(&self) -> usize {
        self.psi.nrows()
    }

    /// Amplitude matrix `psi[s, s']`.
    pub fn amplitudes(&self) -> &Mat<c64> {
        &self.psi
    }

    /// Flattened state vector with index `s * dim + s'`.
    pub fn state_vector(&self) -> Vec<c64> {
        let n = self.system_dim();
        (0..n * n).map(|k| self.psi[(k / n, k % n)]).collect()
    }

    pub fn norm(&self) -> f64 {
        let n = self.system_dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += self.psi[(i, j)].norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `Tr_{A'B'}` of the pure state, which is the Gibbs state itself.
    pub fn reduced_system(&self) -> HermitianOperator {
        HermitianOperator::from_hermitian_part(mul_adj(self.psi.as_ref(), self.psi.as_ref()))
    }

    fn check(&self, sub: &SubsystemSpec) -> Result<()> {
        if 1usize << sub.chain_len() != self.system_dim() {
            return Err(Error::InvalidSubsystem(format!(
                "subsystem of a {}-site chain used with a purification of dim {}",
                sub.chain_len(),
                self.system_dim()
            )));
        }
        Ok(())
    }

    /// Traces out the ancilla copy `A'` of the window. The result acts on
    /// `AB ⊗ B'` with index `s * d_B + b'`.
    pub fn trace_ancilla_window(&self, sub: &SubsystemSpec) -> Result<HermitianOperator> {
        self.check(sub)?;
        let (n, da, db) = (self.system_dim(), sub.d_a(), sub.d_b());
        let global = inverse_positions(sub);
        let m = Mat::<c64>::from_fn(n * db, da, |row, a| {
            let (s, b) = (row / db, row % db);
            self.psi[(s, global[a * db + b])]
        });
        check_reduced_dim(n * db)?;
        Ok(HermitianOperator::from_hermitian_part(mul_adj(
            m.as_ref(),
            m.as_ref(),
        )))
    }

    /// Traces out the window `A` of the system copy. The result acts on
    /// `B ⊗ A'B'` with index `b * dim + s'`.
    pub fn trace_window(&self, sub: &SubsystemSpec) -> Result<HermitianOperator> {
        self.check(sub)?;
        let (n, da, db) = (self.system_dim(), sub.d_a(), sub.d_b());
        let global = inverse_positions(sub);
        let m = Mat::<c64>::from_fn(db * n, da, |row, a| {
            let (b, s) = (row / n, row % n);
            self.psi[(global[a * db + b], s)]
        });
        check_reduced_dim(n * db)?;
        Ok(HermitianOperator::from_hermitian_part(mul_adj(
            m.as_ref(),
            m.as_ref(),
        )))
    }
}

fn check_reduced_dim(dim: usize) -> Result<()> {
    if dim > PURIFIED_REDUCED_CAP {
        return Err(Error::DimensionTooLarge {
            dim,
            max: PURIFIED_REDUCED_CAP,
        });
    }
    Ok(())
}

/// Global basis index of each window-major position.
pub(crate) fn inverse_positions(sub: &SubsystemSpec) -> Vec<usize> {
    let pos = sub.bipartition_index();
    let mut inv = vec![0; pos.len()];
    for (s, &p) in pos.iter().enumerate() {
        inv[p] = s;
    }
    inv
}

/// Energy variance of the Gibbs distribution restricted to the lowest
/// `k_levels` degenerate multiplets and renormalized.
pub fn truncated_energy_variance(
    spectrum: &SpectralDecomposition,
    k_levels: usize,
    beta: f64,
    degeneracy_tol: Option<f64>,
) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidTemperature(beta));
    }
    let tol = degeneracy_tol.unwrap_or_else(|| spectrum.default_degeneracy_tol());
    let parts = linalg::group_degenerate(spectrum, tol)?;
    if k_levels == 0 || k_levels > parts.len() {
        return Err(Error::InvalidArgument(format!(
            "k_levels = {k_levels} outside 1..={}",
            parts.len()
        )));
    }
    let values = spectrum.values();
    let e0 = values[0];
    let members = parts.groups()[..k_levels]
        .iter()
        .flat_map(|g| g.members.iter().copied());
    let (mut z, mut m1) = (0.0, 0.0);
    let mut kept = Vec::new();
    for k in members {
        let w = (-beta * (values[k] - e0)).exp();
        z += w;
        m1 += w * values[k];
        kept.push((w, values[k]));
    }
    let mean = m1 / z;
    Ok(kept
        .iter()
        .map(|(w, e)| w / z * (e - mean) * (e - mean))
        .sum())
}

/// Energy gaps `E_j - E_0` of the first `count` excited multiplets.
pub fn level_gaps(
    spectrum: &SpectralDecomposition,
    count: usize,
    degeneracy_tol: Option<f64>,
) -> Result<Vec<f64>> {
    let tol = degeneracy_tol.unwrap_or_else(|| spectrum.default_degeneracy_tol());
    let parts = linalg::group_degenerate(spectrum, tol)?;
    let e0 = parts.groups()[0].energy;
    Ok(parts
        .groups()
        .iter()
        .skip(1)
        .take(count)
        .map(|g| g.energy - e0)
        .collect())
}
