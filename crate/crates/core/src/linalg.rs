//! Dense Hermitian linear algebra.
//!
//! Every operator is stored as a dense complex matrix. Eigendecompositions run
//! through faer's self-adjoint solver with sequential parallelism, so identical
//! input bits always produce identical output bits. Operators whose entries are
//! all real are decomposed with the real symmetric solver and promoted back to
//! complex storage afterwards.
//!
//! Spectral decompositions may be split into blocks, each living on a subset of
//! the computational basis. This is how symmetry sectors of a spin chain are
//! diagonalized independently without ever forming the full eigenvector matrix.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::matmul::matmul;
use faer::linalg::svd::{self, ComputeSvdVectors};
use faer::traits::ComplexField;
use faer::{c64, Accum, Mat, MatRef, Par};

use crate::error::{Error, Result};

/// Largest number of matrix entries an operator may hold.
pub const MAX_ENTRIES: usize = 1 << 26;

/// Per-entry absolute tolerance of the Hermiticity check.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Negative eigenvalues down to `-PSD_TOL * max(1, largest eigenvalue)` are
/// accepted as numerical noise of a positive semidefinite operator.
pub const PSD_TOL: f64 = 1e-12;

/// Relative rank threshold used when the caller does not supply one.
pub const DEFAULT_RANK_RTOL: f64 = 1e-12;

/// Relative degeneracy threshold used when the caller does not supply one.
pub const DEFAULT_DEGENERACY_RTOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

pub fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

/// A dense Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    mat: Mat<c64>,
}

impl HermitianOperator {
    /// Wraps `mat` after checking squareness and Hermiticity.
    pub fn new(mat: Mat<c64>) -> Result<Self> {
        check_hermitian(mat.as_ref())?;
        Ok(Self { mat })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Result<Self> {
        check_dim(dim)?;
        Self::new(Mat::from_fn(dim, dim, f))
    }

    pub fn from_real_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_fn(dim, |i, j| re(f(i, j)))
    }

    /// Wraps a matrix that is Hermitian up to rounding, replacing it by its
    /// Hermitian part.
    pub(crate) fn from_hermitian_part(mat: Mat<c64>) -> Self {
        debug_assert_eq!(mat.nrows(), mat.ncols());
        let n = mat.nrows();
        let sym = Mat::from_fn(n, n, |i, j| (mat[(i, j)] + mat[(j, i)].conj()) * 0.5);
        Self { mat: sym }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Mat::from_fn(dim, dim, |i, j| if i == j { re(1.0) } else { re(0.0) }),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: Mat::zeros(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            mat: Mat::from_fn(n, n, |i, j| if i == j { re(values[i]) } else { re(0.0) }),
        }
    }

    /// Outer product `|v><v|`.
    pub fn projector_onto(v: &[c64]) -> Self {
        let n = v.len();
        Self {
            mat: Mat::from_fn(n, n, |i, j| v[i] * v[j].conj()),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.mat[(i, j)]
    }

    /// True when every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        is_real_mat(self.mat.as_ref())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            mat: Mat::from_fn(self.dim(), self.dim(), |i, j| self.mat[(i, j)] * s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        let n = self.dim();
        Ok(Self {
            mat: Mat::from_fn(n, n, |i, j| self.mat[(i, j)] + other.mat[(i, j)]),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        let n = self.dim();
        Ok(Self {
            mat: Mat::from_fn(n, n, |i, j| self.mat[(i, j)] - other.mat[(i, j)]),
        })
    }

    /// Shifts the spectrum by `s`, i.e. returns `self + s * I`.
    pub fn shift(&self, s: f64) -> Self {
        let mut mat = self.mat.clone();
        for i in 0..self.dim() {
            mat[(i, i)] += re(s);
        }
        Self { mat }
    }

    /// Plain matrix product; the result is not Hermitian in general.
    pub fn matmul(&self, other: &Self) -> Mat<c64> {
        mul(self.as_mat(), other.as_mat())
    }

    /// `self * self`, which is Hermitian.
    pub fn square(&self) -> Self {
        Self::from_hermitian_part(mul(self.as_mat(), self.as_mat()))
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(self.as_mat(), other.as_mat())
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    /// `Tr[self * other]`.
    pub fn trace_product(&self, other: &Self) -> c64 {
        trace_product(self.as_mat(), other.as_mat())
    }

    /// Largest entry of `|self*other - other*self|`.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        let ab = mul(self.as_mat(), other.as_mat());
        let ba = mul(other.as_mat(), self.as_mat());
        max_abs_diff(ab.as_ref(), ba.as_ref())
    }

    /// `U self U^dagger` for an arbitrary square `u`.
    pub fn conjugate_by(&self, u: MatRef<'_, c64>) -> Self {
        let tmp = mul(u, self.as_mat());
        Self::from_hermitian_part(mul_adj(tmp.as_ref(), u))
    }

    /// `U^dagger self U`, the operator in the basis given by the columns of `u`.
    pub fn in_basis(&self, u: MatRef<'_, c64>) -> Self {
        let tmp = mul(self.as_mat(), u);
        Self::from_hermitian_part(adj_mul(u, tmp.as_ref()))
    }

    /// `<v| self |w>`.
    pub fn matrix_element(&self, v: &[c64], w: &[c64]) -> c64 {
        let n = self.dim();
        let mut acc = re(0.0);
        for i in 0..n {
            let mut row = re(0.0);
            for j in 0..n {
                row += self.mat[(i, j)] * w[j];
            }
            acc += v[i].conj() * row;
        }
        acc
    }

    /// Applies the operator to a vector.
    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.mat[(i, j)] * v[j]).sum())
            .collect()
    }
}

fn same_dim(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::DimensionMismatch("operators need dim >= 1".into()));
    }
    match dim.checked_mul(dim) {
        Some(entries) if entries <= MAX_ENTRIES => Ok(()),
        _ => Err(Error::DimensionTooLarge { dim, max: 1 << 13 }),
    }
}

/// Rejects non-square or non-Hermitian matrices, reporting the worst pair.
pub fn check_hermitian(m: MatRef<'_, c64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    check_dim(m.nrows())?;
    let n = m.nrows();
    let mut worst = (0, 0, 0.0f64);
    for j in 0..n {
        for i in j..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst.2 || d.is_nan() {
                worst = (i, j, d);
            }
        }
    }
    if worst.2 > HERMITICITY_TOL || worst.2.is_nan() {
        return Err(Error::NonHermitian {
            row: worst.0,
            col: worst.1,
            deviation: worst.2,
        });
    }
    Ok(())
}

pub(crate) fn is_real_mat(m: MatRef<'_, c64>) -> bool {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)].im != 0.0 {
                return false;
            }
        }
    }
    true
}

pub(crate) fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub(crate) fn trace_product(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    let n = a.nrows();
    let mut acc = re(0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `a * b`.
pub(crate) fn mul(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, re(1.0), Par::Seq);
    out
}

/// `a * b^dagger`.
pub(crate) fn mul_adj(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let mut out = Mat::zeros(a.nrows(), b.nrows());
    matmul(
        out.as_mut(),
        Accum::Replace,
        a,
        b.adjoint(),
        re(1.0),
        Par::Seq,
    );
    out
}

/// `a^dagger * b`.
pub(crate) fn adj_mul(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let mut out = Mat::zeros(a.ncols(), b.ncols());
    matmul(
        out.as_mut(),
        Accum::Replace,
        a.adjoint(),
        b,
        re(1.0),
        Par::Seq,
    );
    out
}

fn raw_evd<T: ComplexField>(a: MatRef<'_, T>) -> Result<(Diag<T>, Mat<T>)> {
    let n = a.nrows();
    let par = Par::Seq;
    let mut s = Diag::<T>::zeros(n);
    let mut u = Mat::<T>::zeros(n, n);
    let mut mem = MemBuffer::new(evd::self_adjoint_evd_scratch::<T>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a,
        s.as_mut(),
        Some(u.as_mut()),
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::Eigendecomposition(format!("{e:?}")))?;
    Ok((s, u))
}

/// Singular values of a square or rectangular matrix, nonincreasing.
pub(crate) fn singular_values(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let par = Par::Seq;
    let mut s = Diag::<c64>::zeros(rows.min(cols));
    let mut mem = MemBuffer::new(svd::svd_scratch::<c64>(
        rows,
        cols,
        ComputeSvdVectors::No,
        ComputeSvdVectors::No,
        par,
        Default::default(),
    ));
    svd::svd(
        m,
        s.as_mut(),
        None,
        None,
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::Eigendecomposition(format!("{e:?}")))?;
    Ok(s.column_vector().iter().map(|x| x.re).collect())
}

/// Eigendecomposition of a Hermitian matrix: ascending values and the
/// eigenvectors as columns.
pub(crate) fn eigh_mat(m: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    if is_real_mat(m) {
        let real = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let (s, u) = raw_evd(real.as_ref())?;
        let values = (0..n).map(|i| s.column_vector()[i]).collect();
        let vectors = Mat::from_fn(n, n, |i, j| re(u[(i, j)]));
        Ok((values, vectors))
    } else {
        let (s, u) = raw_evd(m)?;
        let values = (0..n).map(|i| s.column_vector()[i].re).collect();
        Ok((values, u))
    }
}

/// Eigenvectors of one symmetry block, living on the basis states `basis`.
#[derive(Clone, Debug)]
pub struct SpectralBlock {
    basis: Vec<usize>,
    values: Vec<f64>,
    vectors: Mat<c64>,
}

impl SpectralBlock {
    /// Diagonalizes `op`, whose row `r` corresponds to basis state `basis[r]`.
    pub fn diagonalize(op: &HermitianOperator, basis: Vec<usize>) -> Result<Self> {
        if basis.len() != op.dim() {
            return Err(Error::DimensionMismatch(format!(
                "block of dim {} with {} basis labels",
                op.dim(),
                basis.len()
            )));
        }
        let (values, vectors) = eigh_mat(op.as_mat())?;
        Ok(Self {
            basis,
            values,
            vectors,
        })
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> MatRef<'_, c64> {
        self.vectors.as_ref()
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

/// Ascending eigenvalues with orthonormal eigenvectors, possibly split over
/// symmetry blocks.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    dim: usize,
    values: Vec<f64>,
    locator: Vec<(usize, usize)>,
    blocks: Vec<SpectralBlock>,
}

impl SpectralDecomposition {
    /// Merges block spectra. The block bases must partition `0..dim`.
    pub fn from_blocks(dim: usize, blocks: Vec<SpectralBlock>) -> Result<Self> {
        let mut seen = vec![false; dim];
        for block in &blocks {
            for &s in &block.basis {
                if s >= dim || seen[s] {
                    return Err(Error::DimensionMismatch(format!(
                        "basis state {s} is out of range or covered twice"
                    )));
                }
                seen[s] = true;
            }
        }
        if seen.iter().any(|&x| !x) {
            return Err(Error::DimensionMismatch(
                "block bases do not cover the whole space".into(),
            ));
        }
        let mut locator: Vec<(usize, usize)> = blocks
            .iter()
            .enumerate()
            .flat_map(|(b, block)| (0..block.len()).map(move |c| (b, c)))
            .collect();
        locator.sort_by(|&(b1, c1), &(b2, c2)| {
            blocks[b1].values[c1]
                .total_cmp(&blocks[b2].values[c2])
                .then((b1, c1).cmp(&(b2, c2)))
        });
        let values = locator.iter().map(|&(b, c)| blocks[b].values[c]).collect();
        Ok(Self {
            dim,
            values,
            locator,
            blocks,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    /// Block and column of the `k`-th eigenvalue in ascending order.
    pub fn locate(&self, k: usize) -> (usize, usize) {
        self.locator[k]
    }

    /// Index of each block column in the global ascending order.
    pub(crate) fn global_indices(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.blocks.iter().map(|b| vec![0; b.len()]).collect();
        for (k, &(b, c)) in self.locator.iter().enumerate() {
            out[b][c] = k;
        }
        out
    }

    /// Dense eigenvector of the `k`-th eigenvalue.
    pub fn vector(&self, k: usize) -> Vec<c64> {
        let (b, c) = self.locator[k];
        let block = &self.blocks[b];
        let mut v = vec![re(0.0); self.dim];
        for (r, &s) in block.basis.iter().enumerate() {
            v[s] = block.vectors[(r, c)];
        }
        v
    }

    /// Dense eigenvector matrix; column `k` belongs to `values()[k]`.
    pub fn dense_vectors(&self) -> Mat<c64> {
        let mut v = Mat::zeros(self.dim, self.dim);
        for (k, &(b, c)) in self.locator.iter().enumerate() {
            let block = &self.blocks[b];
            for (r, &s) in block.basis.iter().enumerate() {
                v[(s, k)] = block.vectors[(r, c)];
            }
        }
        v
    }

    /// `V f(values) V^dagger`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let mut out = Mat::<c64>::zeros(self.dim, self.dim);
        for block in &self.blocks {
            let m = block.len();
            let scaled = Mat::from_fn(m, m, |r, c| block.vectors[(r, c)] * f(block.values[c]));
            let local = mul_adj(scaled.as_ref(), block.vectors.as_ref());
            for (r1, &s1) in block.basis.iter().enumerate() {
                for (r2, &s2) in block.basis.iter().enumerate() {
                    out[(s1, s2)] = local[(r1, r2)];
                }
            }
        }
        HermitianOperator::from_hermitian_part(out)
    }

    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> HermitianOperator {
        self.map_values(|x| x)
    }

    /// Largest entry of `V^dagger V - I` over all blocks.
    pub fn unitarity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for block in &self.blocks {
            let g = adj_mul(block.vectors.as_ref(), block.vectors.as_ref());
            let id = Mat::from_fn(block.len(), block.len(), |i, j| {
                if i == j {
                    re(1.0)
                } else {
                    re(0.0)
                }
            });
            worst = worst.max(max_abs_diff(g.as_ref(), id.as_ref()));
        }
        worst
    }

    pub fn ground_energy(&self) -> f64 {
        self.values[0]
    }

    pub fn spectral_range(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }

    pub fn default_degeneracy_tol(&self) -> f64 {
        DEFAULT_DEGENERACY_RTOL * self.spectral_range().max(f64::MIN_POSITIVE)
    }
}

/// Full eigendecomposition of a Hermitian operator.
pub fn eigh(op: &HermitianOperator) -> Result<SpectralDecomposition> {
    let block = SpectralBlock::diagonalize(op, (0..op.dim()).collect())?;
    SpectralDecomposition::from_blocks(op.dim(), vec![block])
}

/// Ascending eigenvalues only.
pub fn eigvalsh(op: &HermitianOperator) -> Result<Vec<f64>> {
    Ok(eigh_mat(op.as_mat())?.0)
}

/// Kronecker product with the row index `i_a * dim_b + i_b`.
pub fn kron(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da.checked_mul(db).ok_or(Error::DimensionTooLarge {
        dim: usize::MAX,
        max: 1 << 13,
    })?;
    check_dim(dim)?;
    let mat = Mat::from_fn(dim, dim, |i, j| {
        a.mat[(i / db, j / db)] * b.mat[(i % db, j % db)]
    });
    Ok(HermitianOperator { mat })
}

/// Which factor of a bipartite operator survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of an operator on `A ⊗ B` with row index `i_a * d_b + i_b`.
pub fn partial_trace(
    op: &HermitianOperator,
    dims: (usize, usize),
    keep: Keep,
) -> Result<HermitianOperator> {
    let (da, db) = dims;
    if da * db != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator of dim {} cannot be split as {da} x {db}",
            op.dim()
        )));
    }
    let m = &op.mat;
    let mat = match keep {
        Keep::A => Mat::from_fn(da, da, |a1, a2| {
            (0..db).map(|b| m[(a1 * db + b, a2 * db + b)]).sum()
        }),
        Keep::B => Mat::from_fn(db, db, |b1, b2| {
            (0..da).map(|a| m[(a * db + b1, a * db + b2)]).sum()
        }),
    };
    Ok(HermitianOperator { mat })
}

fn checked_psd_spectrum(op: &HermitianOperator) -> Result<SpectralDecomposition> {
    let spec = eigh(op)?;
    let top = spec.values().last().copied().unwrap_or(0.0);
    let floor = -PSD_TOL * top.abs().max(1.0);
    if spec.values()[0] < floor {
        return Err(Error::NotPositiveSemidefinite {
            eigenvalue: spec.values()[0],
        });
    }
    Ok(spec)
}

fn resolve_rank_tol(spec: &SpectralDecomposition, rank_tol: Option<f64>) -> f64 {
    rank_tol.unwrap_or_else(|| {
        DEFAULT_RANK_RTOL * spec.values().last().copied().unwrap_or(0.0).max(0.0)
    })
}

/// Moore-Penrose pseudoinverse raised to the power `m` of a positive
/// semidefinite operator. Eigenvalues at or below `rank_tol` map to zero.
pub fn pinv_power(
    op: &HermitianOperator,
    m: u32,
    rank_tol: Option<f64>,
) -> Result<HermitianOperator> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "pseudoinverse power must be >= 1".into(),
        ));
    }
    let spec = checked_psd_spectrum(op)?;
    let tol = resolve_rank_tol(&spec, rank_tol);
    Ok(spec.map_values(|x| if x > tol { x.powi(-(m as i32)) } else { 0.0 }))
}

/// Orthogonal projector onto the span of eigenvectors with eigenvalue above
/// `rank_tol`.
pub fn support_projector(
    op: &HermitianOperator,
    rank_tol: Option<f64>,
) -> Result<HermitianOperator> {
    let spec = checked_psd_spectrum(op)?;
    let tol = resolve_rank_tol(&spec, rank_tol);
    Ok(spec.map_values(|x| if x > tol { 1.0 } else { 0.0 }))
}

/// Number of eigenvalues above `rank_tol`.
pub fn rank(op: &HermitianOperator, rank_tol: Option<f64>) -> Result<usize> {
    let spec = checked_psd_spectrum(op)?;
    let tol = resolve_rank_tol(&spec, rank_tol);
    Ok(spec.values().iter().filter(|&&x| x > tol).count())
}

/// A group of (numerically) degenerate eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenGroup {
    /// Mean of the member eigenvalues.
    pub energy: f64,
    /// Indices into the ascending eigenvalue list.
    pub members: Vec<usize>,
}

impl EigenGroup {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

/// How a group projector is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectorNorm {
    /// `sum |v><v|`, trace equal to the multiplicity.
    Raw,
    /// `(1/n) sum |v><v|`, unit trace.
    Normalized,
}

#[derive(Clone, Debug)]
pub struct EigenspacePartition {
    groups: Vec<EigenGroup>,
    tolerance: f64,
}

impl EigenspacePartition {
    pub fn groups(&self) -> &[EigenGroup] {
        &self.groups
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Dense projector onto group `g`.
    pub fn projector(
        &self,
        spec: &SpectralDecomposition,
        g: usize,
        norm: ProjectorNorm,
    ) -> HermitianOperator {
        let group = &self.groups[g];
        let scale = match norm {
            ProjectorNorm::Raw => 1.0,
            ProjectorNorm::Normalized => 1.0 / group.multiplicity() as f64,
        };
        let n = spec.dim();
        let mut out = Mat::<c64>::zeros(n, n);
        for &k in &group.members {
            let v = spec.vector(k);
            for j in 0..n {
                if v[j] == re(0.0) {
                    continue;
                }
                let vj = v[j].conj() * scale;
                for i in 0..n {
                    out[(i, j)] += v[i] * vj;
                }
            }
        }
        HermitianOperator::from_hermitian_part(out)
    }
}

/// Groups sorted values: a new group starts whenever the gap to the previous
/// value, or the spread from the group's first value, exceeds `tol`.
pub fn group_values(values: &[f64], tol: f64) -> Result<EigenspacePartition> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "degeneracy tolerance must be positive, got {tol}"
        )));
    }
    let mut groups: Vec<EigenGroup> = Vec::new();
    let mut start = 0usize;
    for k in 1..=values.len() {
        let split =
            k == values.len() || values[k] - values[k - 1] > tol || values[k] - values[start] > tol;
        if split {
            let members: Vec<usize> = (start..k).collect();
            let energy = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
            groups.push(EigenGroup { energy, members });
            start = k;
        }
    }
    Ok(EigenspacePartition {
        groups,
        tolerance: tol,
    })
}

/// Partition of a spectrum into degenerate multiplets.
pub fn group_degenerate(spec: &SpectralDecomposition, tol: f64) -> Result<EigenspacePartition> {
    group_values(spec.values(), tol)
}
