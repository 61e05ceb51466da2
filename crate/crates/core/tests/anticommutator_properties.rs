mod common;

use common::*;
use faer::Mat;
use lqts::anticommutator::{solve_anticommutator, solve_anticommutator_series};
use lqts::linalg::{c, support_projector, HermitianOperator};
use lqts::Error;
use proptest::prelude::*;
use rand::Rng;

/// `Y = X Z + Z X` for a random Hermitian `Z`, so that `R Y R = 0`.
fn solvable(seed: u64, dim: usize, kernel: usize) -> (HermitianOperator, HermitianOperator) {
    let mut r = rng(seed);
    let (x, _) = psd_with_kernel(&mut r, dim, kernel);
    let z = random_hermitian(&mut r, dim);
    let y = HermitianOperator::new(x.matmul(&z) + z.matmul(&x)).unwrap();
    (x, y)
}

/// Largest entry of `XW + WX - Y` outside the kernel-kernel block.
fn block_residual(x: &HermitianOperator, w: &HermitianOperator, y: &HermitianOperator) -> f64 {
    let n = x.dim();
    let e = x.matmul(w) + w.matmul(x) - y.as_mat();
    let r = Mat::<faer::c64>::identity(n, n) - support_projector(x, None).unwrap().as_mat();
    mat_max_abs(&(&e - &r * &e * &r))
}

fn rr_block(x: &HermitianOperator, w: &HermitianOperator) -> f64 {
    let n = x.dim();
    let r = Mat::<faer::c64>::identity(n, n) - support_projector(x, None).unwrap().as_mat();
    mat_max_abs(&(&r * w.as_mat() * &r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solvable_instances_meet_block_residual(seed in any::<u64>(), dim in 2usize..=16, kernel in 0usize..=3) {
        let kernel = kernel.min(dim - 1);
        let (x, y) = solvable(seed, dim, kernel);
        let sol = solve_anticommutator(&x, &y, None).unwrap();
        prop_assert_eq!(sol.kernel_rank, kernel);
        prop_assert!(block_residual(&x, &sol.w, &y) <= 1e-8);
        prop_assert!(sol.residual_norm <= 1e-8);
        let herm = mat_max_abs(&(sol.w.as_mat() - sol.w.as_mat().adjoint()));
        prop_assert!(herm <= 1e-12);
        prop_assert!(rr_block(&x, &sol.w) <= 1e-12);
    }

    #[test]
    fn kernel_source_is_rejected(seed in any::<u64>(), dim in 2usize..=16, kernel in 1usize..=3) {
        let kernel = kernel.min(dim - 1);
        let mut r = rng(seed);
        let (x, u) = psd_with_kernel(&mut r, dim, kernel);
        let z = random_hermitian(&mut r, dim);
        // Hermitian bump living only on the kernel of X.
        let mut bump = Mat::<faer::c64>::zeros(dim, dim);
        for i in 0..kernel {
            bump[(i, i)] = c(r.random_range(0.5..1.5), 0.0);
        }
        let bump = HermitianOperator::new(bump).unwrap().conjugate_by(u.as_ref());
        let y_bad = HermitianOperator::new(x.matmul(&z) + z.matmul(&x) + bump.as_mat()).unwrap();
        let rejected = matches!(solve_anticommutator(&x, &y_bad, None), Err(Error::Unsolvable { .. }));
        prop_assert!(rejected);
    }

    #[test]
    fn series_matches_closed_form(seed in any::<u64>(), dim in 2usize..=10, kernel in 0usize..=3) {
        let kernel = kernel.min(dim - 1);
        let mut r = rng(seed);
        // Distinct support eigenvalues with neighbour ratios at most 0.85.
        let mut values = vec![0.0; kernel];
        let mut v = 1.0;
        for _ in kernel..dim {
            values.push(v);
            v *= r.random_range(0.3..0.85);
        }
        let (x, u) = with_spectrum(&mut r, &values);
        // Source with no elements between equal eigenvalues of X.
        let mut z = Mat::<faer::c64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..i {
                let e = c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
                z[(i, j)] = e;
                z[(j, i)] = e.conj();
            }
        }
        for i in 0..kernel {
            for j in 0..kernel {
                z[(i, j)] = c(0.0, 0.0);
            }
        }
        let y = HermitianOperator::new(z).unwrap().conjugate_by(u.as_ref());
        let exact = solve_anticommutator(&x, &y, None).unwrap();
        let series = solve_anticommutator_series(&x, &y, 200, None).unwrap();
        let scale = exact.w.max_abs().max(1.0);
        prop_assert!(series.w.max_abs_diff(&exact.w) <= 1e-8 * scale, "{}", series.w.max_abs_diff(&exact.w));
    }
}
