//! Solving `X W + W X = Y` for a singular positive `X`.

use faer::Mat;
use lqts::anticommutator::{solve_anticommutator, solve_anticommutator_series};
use lqts::linalg::{c, HermitianOperator};

fn main() -> lqts::Result<()> {
    // Eigenvalues 0, 0.2, 0.5, 1 in a rotated basis.
    let x = HermitianOperator::diagonal(&[0.0, 0.2, 0.5, 1.0]);
    let rot = {
        let z = HermitianOperator::from_fn(4, |i, j| {
            c(((i * j) % 5) as f64 + 0.3 * (i + j) as f64, 0.0)
        })?;
        lqts::eigh(&z)?.dense_vectors()
    };
    let x = x.conjugate_by(rot.as_ref());

    // Any Y = X Z + Z X is solvable. A Z without diagonal in the eigenbasis
    // of X also suits the series.
    let z = HermitianOperator::from_fn(4, |i, j| {
        if i == j {
            c(0.0, 0.0)
        } else {
            c(1.0 / (1 + i + j) as f64, if i < j { 0.3 } else { -0.3 })
        }
    })?
    .conjugate_by(rot.as_ref());
    let y = HermitianOperator::new(x.matmul(&z) + z.matmul(&x))?;

    let closed = solve_anticommutator(&x, &y, None)?;
    println!(
        "closed form: kernel rank {}, residual {:.2e}",
        closed.kernel_rank, closed.residual_norm
    );
    for terms in [5, 20, 80, 200] {
        let series = solve_anticommutator_series(&x, &y, terms, None)?;
        println!(
            "series with {terms:>3} terms: distance to closed form {:.2e}",
            series.w.max_abs_diff(&closed.w)
        );
    }

    // A source on the kernel of X has no solution.
    let mut bump = Mat::zeros(4, 4);
    bump[(0, 0)] = c(1.0, 0.0);
    let bump = HermitianOperator::new(bump)?.conjugate_by(rot.as_ref());
    match solve_anticommutator(&x, &y.add(&bump)?, None) {
        Err(e) => println!("kernel source rejected: {e}"),
        Ok(_) => println!("unexpected solution"),
    }
    Ok(())
}
