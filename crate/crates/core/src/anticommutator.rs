//! Solutions of `X W + W X = Y` for positive semidefinite, possibly singular
//! `X`.
//!
//! Split the space with the kernel projector `R` of `X` and its complement
//! `P`. The `RR` block of `Y` must vanish, the `RR` block of `W` is free and
//! set to zero, and the remaining blocks are fixed. In the eigenbasis of `X`
//! the fixed blocks read `W_mn = Y_mn / (x_m + x_n)`.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};
use crate::gibbs::{purify, GibbsEnsemble};
use crate::linalg::{
    self, adj_mul, c, eigh_mat, kron, mul, mul_adj, HermitianOperator, DEFAULT_RANK_RTOL, PSD_TOL,
};
use crate::spin::SubsystemSpec;

/// Largest tolerated entry of the `RR` block of `Y`.
pub const SOLVABILITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolutionMethod {
    ClosedForm,
    Series { terms: usize },
}

#[derive(Clone, Debug)]
pub struct AnticommutatorSolution {
    pub w: HermitianOperator,
    /// Largest entry of `XW + WX - Y` outside the `RR` block.
    pub residual_norm: f64,
    pub kernel_rank: usize,
    pub method: SolutionMethod,
}

/// Solution of the equation with a general square right-hand side.
#[derive(Clone, Debug)]
pub struct GeneralSolution {
    pub w: Mat<c64>,
    pub residual_norm: f64,
    pub kernel_rank: usize,
}

/// Eigenbasis of `X` with its kernel marked.
struct Frame {
    x: Vec<f64>,
    u: Mat<c64>,
    kernel: Vec<bool>,
}

impl Frame {
    fn new(x: &HermitianOperator, rank_tol: Option<f64>) -> Result<Self> {
        let (vals, u) = eigh_mat(x.as_mat())?;
        let top = vals.last().copied().unwrap_or(0.0).max(0.0);
        if let Some(&low) = vals.first() {
            if low < -PSD_TOL * top.max(1.0) {
                return Err(Error::NotPositiveSemidefinite { eigenvalue: low });
            }
        }
        let tol = rank_tol.unwrap_or(DEFAULT_RANK_RTOL * top);
        let kernel = vals.iter().map(|&v| v <= tol).collect();
        let x = vals.iter().map(|&v| v.max(0.0)).collect();
        Ok(Self { x, u, kernel })
    }

    fn kernel_rank(&self) -> usize {
        self.kernel.iter().filter(|&&k| k).count()
    }

    fn rotate_in(&self, m: MatRef<'_, c64>) -> Mat<c64> {
        adj_mul(self.u.as_ref(), mul(m, self.u.as_ref()).as_ref())
    }

    fn rotate_out(&self, m: MatRef<'_, c64>) -> Mat<c64> {
        mul_adj(mul(self.u.as_ref(), m).as_ref(), self.u.as_ref())
    }

    fn both_kernel(&self, i: usize, j: usize) -> bool {
        self.kernel[i] && self.kernel[j]
    }

    fn check_solvable(&self, y_rot: &Mat<c64>) -> Result<()> {
        let n = self.x.len();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if self.both_kernel(i, j) {
                    worst = worst.max(y_rot[(i, j)].norm());
                }
            }
        }
        if worst > SOLVABILITY_TOL {
            return Err(Error::Unsolvable { norm: worst });
        }
        Ok(())
    }

    /// Largest entry of `X W + W X - Y` outside the `RR` block.
    fn residual(&self, x: &HermitianOperator, w: MatRef<'_, c64>, y: MatRef<'_, c64>) -> f64 {
        let mut r = mul(x.as_mat(), w);
        r += &mul(w, x.as_mat());
        r -= y;
        let r = self.rotate_in(r.as_ref());
        let n = self.x.len();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if !self.both_kernel(i, j) {
                    worst = worst.max(r[(i, j)].norm());
                }
            }
        }
        worst
    }
}

fn closed_form(frame: &Frame, y: MatRef<'_, c64>) -> Result<Mat<c64>> {
    let y_rot = frame.rotate_in(y);
    frame.check_solvable(&y_rot)?;
    let n = frame.x.len();
    let w_rot = Mat::<c64>::from_fn(n, n, |i, j| {
        if frame.both_kernel(i, j) {
            c(0.0, 0.0)
        } else {
            y_rot[(i, j)] / (frame.x[i] + frame.x[j])
        }
    });
    Ok(frame.rotate_out(w_rot.as_ref()))
}

/// Hermitian solution with vanishing `RR` block. Eigenvalues of `X` at or
/// below `rank_tol` (default: relative `1e-12`) span the kernel.
pub fn solve_anticommutator(
    x: &HermitianOperator,
    y: &HermitianOperator,
    rank_tol: Option<f64>,
) -> Result<AnticommutatorSolution> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    let frame = Frame::new(x, rank_tol)?;
    let w = HermitianOperator::from_hermitian_part(closed_form(&frame, y.as_mat())?);
    let residual_norm = frame.residual(x, w.as_mat(), y.as_mat());
    Ok(AnticommutatorSolution {
        w,
        residual_norm,
        kernel_rank: frame.kernel_rank(),
        method: SolutionMethod::ClosedForm,
    })
}

/// Solution for an arbitrary square `Y`.
pub fn solve_anticommutator_general(
    x: &HermitianOperator,
    y: MatRef<'_, c64>,
    rank_tol: Option<f64>,
) -> Result<GeneralSolution> {
    if y.nrows() != x.dim() || y.ncols() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}x{}",
            x.dim(),
            y.nrows(),
            y.ncols()
        )));
    }
    let frame = Frame::new(x, rank_tol)?;
    let w = closed_form(&frame, y)?;
    let residual_norm = frame.residual(x, w.as_ref(), y);
    Ok(GeneralSolution {
        w,
        residual_norm,
        kernel_rank: frame.kernel_rank(),
    })
}

/// Solution assembled from the recursive expansion instead of the closed
/// form. The kernel blocks are `R Y X^+` and `X^+ Y R`. The support block is
/// `T + T^dagger` with `T = sum_k (-1)^k X^k P Y_up P (X^+)^(k+1)`, where
/// `Y_up` keeps the matrix elements of `Y` from lower to strictly higher
/// eigenvalues of `X`. This converges when every such pair has ratio below
/// one and `Y` has no elements between equal eigenvalues.
///
/// Powers of `X` are applied in its eigenbasis, where each term of `T` is
/// `(-x_m / x_n)^k Y_mn / x_n`.
pub fn solve_anticommutator_series(
    x: &HermitianOperator,
    y: &HermitianOperator,
    terms: usize,
    rank_tol: Option<f64>,
) -> Result<AnticommutatorSolution> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    let frame = Frame::new(x, rank_tol)?;
    let n = x.dim();
    let y_rot = frame.rotate_in(y.as_mat());
    frame.check_solvable(&y_rot)?;

    let mut w_rot = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let (xi, xj) = (frame.x[i], frame.x[j]);
            match (frame.kernel[i], frame.kernel[j]) {
                (true, true) => {}
                (true, false) => w_rot[(i, j)] = y_rot[(i, j)] / xj,
                (false, true) => w_rot[(i, j)] = y_rot[(i, j)] / xi,
                (false, false) if xi < xj => {
                    let mut term = y_rot[(i, j)] / xj;
                    let mut sum = c(0.0, 0.0);
                    for _ in 0..terms {
                        sum += term;
                        term *= -xi / xj;
                    }
                    w_rot[(i, j)] += sum;
                    w_rot[(j, i)] += sum.conj();
                }
                (false, false) => {}
            }
        }
    }
    let w = HermitianOperator::from_hermitian_part(frame.rotate_out(w_rot.as_ref()));
    let residual_norm = frame.residual(x, w.as_mat(), y.as_mat());
    Ok(AnticommutatorSolution {
        w,
        residual_norm,
        kernel_rank: frame.kernel_rank(),
        method: SolutionMethod::Series { terms },
    })
}

/// LQTS of `sub` as `Var(H) - 4 Tr[rho^a Omega^2]`, where `rho^a` is the
/// purification reduced to `B A'B'` and `Omega` solves
/// `Omega rho^a + rho^a Omega = -(i/2) [H', rho^a]` with `H'` the ancilla copy
/// of `H`.
pub fn lqts_via_omega(ens: &GibbsEnsemble, sub: &SubsystemSpec) -> Result<f64> {
    let state = purify(ens)?;
    let rho = state.trace_window(sub)?;
    let h = ens.spectrum().reconstruct();
    let n = h.dim();
    let h_t = HermitianOperator::from_fn(n, |i, j| h.get(j, i))?;
    let h_prime = kron(&HermitianOperator::identity(sub.d_b()), &h_t)?;
    let hr = mul(h_prime.as_mat(), rho.as_mat());
    let rh = mul(rho.as_mat(), h_prime.as_mat());
    let half_i = c(0.0, -0.5);
    let q = Mat::<c64>::from_fn(rho.dim(), rho.dim(), |i, j| {
        half_i * (hr[(i, j)] - rh[(i, j)])
    });
    let q = HermitianOperator::from_hermitian_part(q);
    let omega = solve_anticommutator(&rho, &q, None)?.w;
    let omega_sq = omega.square();
    let correction = linalg::trace_product(rho.as_mat(), omega_sq.as_mat()).re;
    Ok(ens.energy_variance() - 4.0 * correction)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::gibbs::gibbs;
    use crate::linalg::re;
    use crate::spin::SpinChainModel;
    use crate::susceptibility::lqts;

    #[test]
    fn identity_halves() {
        let y =
            HermitianOperator::from_fn(3, |i, j| c((i + j) as f64, i as f64 - j as f64)).unwrap();
        let sol = solve_anticommutator(&HermitianOperator::identity(3), &y, None).unwrap();
        assert!(sol.w.max_abs_diff(&y.scale(0.5)) < 1e-15);
        assert_eq!(sol.kernel_rank, 0);
    }

    #[test]
    fn rank_one_hand_solve() {
        let x = HermitianOperator::diagonal(&[1.0, 0.0]);
        let y = HermitianOperator::from_real_fn(2, |i, j| if i != j { 1.0 } else { 0.0 }).unwrap();
        let sol = solve_anticommutator(&x, &y, None).unwrap();
        assert!(sol.w.max_abs_diff(&y) < 1e-15);
        assert_eq!(sol.kernel_rank, 1);
    }

    #[test]
    fn kernel_block_must_vanish() {
        let x = HermitianOperator::diagonal(&[1.0, 0.0]);
        let y = HermitianOperator::diagonal(&[0.0, 1e-3]);
        match solve_anticommutator(&x, &y, None) {
            Err(Error::Unsolvable { norm }) => assert!((norm - 1e-3).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_x_rejected() {
        let x = HermitianOperator::diagonal(&[1.0, -0.5]);
        assert!(matches!(
            solve_anticommutator(&x, &HermitianOperator::identity(2), None),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn general_variant_handles_non_hermitian_rhs() {
        let x = HermitianOperator::diagonal(&[2.0, 1.0, 0.0]);
        let mut y = Mat::<c64>::zeros(3, 3);
        y[(0, 1)] = c(1.0, 2.0);
        y[(2, 0)] = re(3.0);
        let sol = solve_anticommutator_general(&x, y.as_ref(), None).unwrap();
        assert!((sol.w[(0, 1)] - c(1.0, 2.0) / 3.0).norm() < 1e-15);
        assert!((sol.w[(2, 0)] - re(1.5)).norm() < 1e-15);
        assert!(sol.residual_norm < 1e-14);
    }

    #[test]
    fn omega_route_on_two_sites() {
        let model = SpinChainModel::ising(2, 0.3).unwrap();
        let ens = gibbs(Arc::new(model.diagonalize().unwrap()), 1.0).unwrap();
        let sub = SubsystemSpec::leading(2, 1).unwrap();
        let a = lqts(&ens, &sub).unwrap().lqts_beta;
        let b = lqts_via_omega(&ens, &sub).unwrap();
        assert!((a - b).abs() <= 1e-7 * a.abs(), "{a} {b}");
    }

    #[test]
    fn omega_route_whole_chain() {
        let model = SpinChainModel::xxz(3, -0.4).unwrap();
        let ens = gibbs(Arc::new(model.diagonalize().unwrap()), 0.8).unwrap();
        let b = lqts_via_omega(&ens, &SubsystemSpec::whole(3).unwrap()).unwrap();
        assert!((b - ens.energy_variance()).abs() < 1e-9);
    }
}
