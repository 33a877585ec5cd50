//! Dense numerical kernels shared by every frame computation.
//!
//! Operators between finite-dimensional Hilbert spaces are carried as dense
//! complex matrices. Real data is embedded with zero imaginary part.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

/// Complex double precision scalar.
pub type C64 = Complex<f64>;

/// Dense complex matrix, the carrier for every operator in the crate.
pub type Matrix = DMatrix<C64>;

/// Numerical thresholds used when a mathematical dichotomy (zero / nonzero,
/// equal / different) has to be decided in floating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular-value cutoff: values below `rank * sigma_max` count as zero.
    pub rank: f64,
    /// Absolute tolerance for scalar and matrix equality checks.
    pub eq: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rank: 1e-10, eq: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(rank: f64, eq: f64) -> Result<Self> {
        if !(rank > 0.0 && rank < 1.0) {
            return Err(FrameError::InvalidInput(format!(
                "rank tolerance must lie in (0, 1), got {rank}"
            )));
        }
        if !(eq > 0.0 && eq.is_finite()) {
            return Err(FrameError::InvalidInput(format!(
                "equality tolerance must be positive, got {eq}"
            )));
        }
        Ok(Self { rank, eq })
    }

    /// Absolute equality threshold scaled to the magnitude of the compared objects.
    pub fn scaled(&self, scale: f64) -> f64 {
        self.eq * scale.max(1.0)
    }
}

pub fn c64(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    Matrix::zeros(rows, cols)
}

/// Builds a complex matrix from real rows. All rows must have equal length.
pub fn from_real_rows(rows: &[&[f64]]) -> Matrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    Matrix::from_fn(nrows, ncols, |i, j| c64(rows[i][j]))
}

/// Column vector from real entries.
pub fn real_vector(entries: &[f64]) -> Matrix {
    Matrix::from_fn(entries.len(), 1, |i, _| c64(entries[i]))
}

pub fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn check_finite(m: &Matrix) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(FrameError::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// True when every entry has a vanishing imaginary part.
pub fn is_real(m: &Matrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Thin singular value decomposition `m = u * diag(s) * v^H`, singular values
/// sorted in decreasing order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

pub fn svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let p = rows.min(cols);
    if p == 0 {
        return Svd { u: zeros(rows, 0), s: Vec::new(), v: zeros(cols, 0) };
    }
    let dec = to_faer(m).thin_svd().expect("SVD converges for finite input");
    let sv = dec.S().column_vector();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| sv[b].re.total_cmp(&sv[a].re));
    let s = order.iter().map(|&k| sv[k].re).collect();
    let (fu, fv) = (dec.U(), dec.V());
    let u = Matrix::from_fn(rows, p, |i, j| fu[(i, order[j])]);
    let v = Matrix::from_fn(cols, p, |i, j| fv[(i, order[j])]);
    Svd { u, s, v }
}

fn to_faer(m: &Matrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let (rows, cols) = m.shape();
    if rows.min(cols) == 0 {
        return Vec::new();
    }
    let mut s = to_faer(m).singular_values().expect("SVD converges for finite input");
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm. Callers are expected to have validated finiteness.
pub fn norm(m: &Matrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Operator norm `sigma_max(m)`; zero for empty matrices.
pub fn op_norm(m: &Matrix) -> Result<f64> {
    check_finite(m)?;
    Ok(norm(m))
}

/// Operator-norm distance between two matrices of equal shape.
pub fn dist(a: &Matrix, b: &Matrix) -> f64 {
    norm(&(a - b))
}

fn numerical_rank(s: &[f64], tol: &Tolerance) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    if smax <= tol.rank {
        return 0;
    }
    let cutoff = tol.rank * smax;
    s.iter().take_while(|&&x| x > cutoff).count()
}

pub fn rank(m: &Matrix, tol: &Tolerance) -> usize {
    numerical_rank(&singular_values(m), tol)
}

/// Smallest singular value above the rank cutoff.
pub fn min_nonzero_sv(m: &Matrix, tol: &Tolerance) -> Result<f64> {
    check_finite(m)?;
    let s = singular_values(m);
    match numerical_rank(&s, tol) {
        0 => Err(FrameError::DegenerateInput("matrix is numerically zero".into())),
        r => Ok(s[r - 1]),
    }
}

/// A subspace of `C^n` stored through an orthonormal basis. The zero
/// subspace has a basis with no columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self { basis: zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { basis: identity(ambient_dim) }
    }

    /// Span of the columns of `vectors`, re-orthonormalized.
    pub fn span(vectors: &Matrix, tol: &Tolerance) -> Result<Self> {
        check_finite(vectors)?;
        Ok(range_basis_unchecked(vectors, tol))
    }

    /// Accepts a basis that is already orthonormal within `tol.eq`.
    pub fn from_orthonormal(basis: Matrix, tol: &Tolerance) -> Result<Self> {
        check_finite(&basis)?;
        if basis.ncols() > basis.nrows() {
            return Err(FrameError::InvalidInput(format!(
                "{} basis vectors cannot be orthonormal in dimension {}",
                basis.ncols(),
                basis.nrows()
            )));
        }
        let gram = basis.adjoint() * &basis;
        let err = dist(&gram, &identity(basis.ncols()));
        if err > tol.eq {
            return Err(FrameError::InvalidInput(format!(
                "basis is not orthonormal (deviation {err:e})"
            )));
        }
        Ok(Self { basis })
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Orthogonal projection onto the subspace.
    pub fn projection(&self) -> Matrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn complement(&self, tol: &Tolerance) -> Self {
        let n = self.ambient_dim();
        if self.is_zero() {
            return Self::full(n);
        }
        if self.dim() == n {
            return Self::zero(n);
        }
        range_basis_unchecked(&(identity(n) - self.projection()), tol)
    }

    /// Image of the subspace under `op`, re-orthonormalized.
    pub fn image(&self, op: &Matrix, tol: &Tolerance) -> Self {
        range_basis_unchecked(&(op * &self.basis), tol)
    }
}

/// Orthogonal projection `P = basis * basis^H`.
pub fn proj(s: &Subspace) -> Matrix {
    s.projection()
}

fn range_basis_unchecked(m: &Matrix, tol: &Tolerance) -> Subspace {
    let dec = svd(m);
    let r = numerical_rank(&dec.s, tol);
    Subspace { basis: dec.u.columns(0, r).into_owned() }
}

/// Orthonormal basis of `ran m`.
pub fn range_basis(m: &Matrix, tol: &Tolerance) -> Result<Subspace> {
    check_finite(m)?;
    Ok(range_basis_unchecked(m, tol))
}

/// Orthonormal basis of `ker m`, the complement of `ran m^H`.
pub fn kernel_basis(m: &Matrix, tol: &Tolerance) -> Result<Subspace> {
    check_finite(m)?;
    Ok(range_basis_unchecked(&m.adjoint(), tol).complement(tol))
}

pub fn is_hermitian(m: &Matrix, tol: &Tolerance) -> bool {
    m.is_square() && dist(m, &m.adjoint()) <= tol.scaled(norm(m))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let sym = (m + m.adjoint()) * c64(0.5);
    let eig = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigensolver converges for finite input");
    let (vals, vecs) = (eig.S().column_vector(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re));
    let sorted = order.iter().map(|&k| vals[k].re).collect();
    let vecs = Matrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    (sorted, vecs)
}

/// The matrix of `(S|V)^{-1} P_V`: zero on `V^perp`, inverse of `S` on `V`.
///
/// `S` must be Hermitian, leave `V` invariant, and be invertible on `V`.
pub fn restricted_inverse(s: &Matrix, v: &Subspace, tol: &Tolerance) -> Result<Matrix> {
    check_finite(s)?;
    let n = v.ambient_dim();
    if s.shape() != (n, n) {
        return Err(FrameError::InvalidInput(format!(
            "operator of shape {:?} does not act on dimension {n}",
            s.shape()
        )));
    }
    let scale = norm(s);
    if !is_hermitian(s, tol) {
        return Err(FrameError::InvalidInput("operator is not self-adjoint".into()));
    }
    let p = v.projection();
    let leak = norm(&((identity(n) - &p) * s * &p));
    if leak > tol.scaled(scale) {
        return Err(FrameError::InvalidInput(format!(
            "subspace is not invariant under the operator (leak {leak:e})"
        )));
    }
    if v.is_zero() {
        return Ok(zeros(n, n));
    }
    let b = v.basis();
    let compressed = b.adjoint() * s * b;
    let (vals, vecs) = hermitian_eigen(&compressed);
    let smallest = vals.iter().fold(f64::INFINITY, |acc, x| acc.min(x.abs()));
    if smallest <= tol.rank * scale.max(f64::MIN_POSITIVE) {
        return Err(FrameError::SingularRestriction(format!(
            "smallest eigenvalue on the subspace is {smallest:e}"
        )));
    }
    let inv_diag = Matrix::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j { c64(1.0 / vals[i]) } else { c64(0.0) }
    });
    let inner = &vecs * inv_diag * vecs.adjoint();
    Ok(b * inner * b.adjoint())
}

/// Inverse of an invertible square matrix, rejecting numerically singular input.
pub fn inverse(m: &Matrix, tol: &Tolerance) -> Result<Matrix> {
    check_finite(m)?;
    if !m.is_square() {
        return Err(FrameError::InvalidInput("inverse of a non-square matrix".into()));
    }
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    if m.nrows() > 0 && (smax <= tol.rank || smin <= tol.rank * smax) {
        return Err(FrameError::SingularRestriction(format!(
            "matrix is numerically singular (sigma_min {smin:e})"
        )));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| FrameError::SingularRestriction("LU inversion failed".into()))
}

/// Minimum-norm least-squares solution of `a * x = b` via the SVD.
pub fn lstsq(a: &Matrix, b: &Matrix, tol: &Tolerance) -> Matrix {
    let dec = svd(a);
    let r = numerical_rank(&dec.s, tol);
    let mut x = zeros(a.ncols(), b.ncols());
    for k in 0..r {
        let coeff = dec.u.column(k).adjoint() * b;
        let scaled = coeff * c64(1.0 / dec.s[k]);
        x += dec.v.column(k) * scaled;
    }
    x
}

/// Hilbert-Schmidt inner product `tr(y^H x)`.
pub fn hs_inner(x: &Matrix, y: &Matrix) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| b.conj() * a).sum()
}

/// Stacks matrices of equal column count vertically.
pub fn vstack(blocks: &[Matrix], cols: usize) -> Matrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        out.view_mut((offset, 0), b.shape()).copy_from(b);
        offset += b.nrows();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn op_norm_examples() {
        assert_abs_diff_eq!(op_norm(&identity(3)).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(op_norm(&zeros(2, 5)).unwrap(), 0.0);
        let d = from_real_rows(&[&[3.0, 0.0], &[0.0, -4.0]]);
        assert_abs_diff_eq!(op_norm(&d).unwrap(), 4.0, epsilon = 1e-14);
        assert_eq!(op_norm(&zeros(0, 3)).unwrap(), 0.0);
    }

    #[test]
    fn op_norm_rejects_nan() {
        let mut m = identity(2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(op_norm(&m), Err(FrameError::InvalidInput(_))));
    }

    #[test]
    fn min_nonzero_sv_examples() {
        assert_abs_diff_eq!(min_nonzero_sv(&identity(3), &tol()).unwrap(), 1.0, epsilon = 1e-14);
        let d = from_real_rows(&[&[2.0, 0.0], &[0.0, 1e-16]]);
        assert_abs_diff_eq!(min_nonzero_sv(&d, &tol()).unwrap(), 2.0, epsilon = 1e-14);
        assert!(matches!(
            min_nonzero_sv(&zeros(2, 2), &tol()),
            Err(FrameError::DegenerateInput(_))
        ));
    }

    #[test]
    fn range_and_kernel_examples() {
        let t = tol();
        assert_eq!(range_basis(&identity(2), &t).unwrap().dim(), 2);
        assert_eq!(kernel_basis(&identity(2), &t).unwrap().dim(), 0);
        assert_eq!(range_basis(&zeros(3, 3), &t).unwrap().dim(), 0);
        assert_eq!(kernel_basis(&zeros(3, 3), &t).unwrap().dim(), 3);

        let e1 = from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        let ran = range_basis(&e1, &t).unwrap();
        let ker = kernel_basis(&e1, &t).unwrap();
        assert_eq!(ran.dim(), 1);
        assert_eq!(ker.dim(), 2);
        assert!(dist(&ran.projection(), &e1) < 1e-12);
        let expected = from_real_rows(&[&[0.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(dist(&ker.projection(), &expected) < 1e-12);
    }

    #[test]
    fn proj_examples() {
        let t = tol();
        let e1 = Subspace::span(&real_vector(&[1.0, 0.0]), &t).unwrap();
        assert!(dist(&proj(&e1), &from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]])) < 1e-14);
        assert!(dist(&proj(&Subspace::full(2)), &identity(2)) < 1e-14);
        let h = 1.0 / 2f64.sqrt();
        let diag = Subspace::span(&real_vector(&[h, h]), &t).unwrap();
        assert!(dist(&proj(&diag), &from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]])) < 1e-14);
    }

    #[test]
    fn zero_subspace_is_accepted() {
        let z = Subspace::zero(4);
        assert_eq!(z.dim(), 0);
        assert_eq!(proj(&z), zeros(4, 4));
        assert_eq!(z.complement(&tol()).dim(), 4);
    }

    #[test]
    fn restricted_inverse_examples() {
        let t = tol();
        let full = Subspace::full(2);
        assert!(dist(&restricted_inverse(&identity(2), &full, &t).unwrap(), &identity(2)) < 1e-14);

        let s = from_real_rows(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let e1 = Subspace::span(&real_vector(&[1.0, 0.0]), &t).unwrap();
        let inv = restricted_inverse(&s, &e1, &t).unwrap();
        assert!(dist(&inv, &from_real_rows(&[&[0.5, 0.0], &[0.0, 0.0]])) < 1e-14);

        let two = identity(2) * c64(2.0);
        let inv = restricted_inverse(&two, &full, &t).unwrap();
        assert!(dist(&inv, &(identity(2) * c64(0.5))) < 1e-14);
    }

    #[test]
    fn restricted_inverse_errors() {
        let t = tol();
        let s = from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            restricted_inverse(&s, &Subspace::full(2), &t),
            Err(FrameError::SingularRestriction(_))
        ));
        let coupled = from_real_rows(&[&[1.0, 1.0], &[1.0, 2.0]]);
        let e1 = Subspace::span(&real_vector(&[1.0, 0.0]), &t).unwrap();
        assert!(matches!(
            restricted_inverse(&coupled, &e1, &t),
            Err(FrameError::InvalidInput(_))
        ));
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(1e-10, 1e-8).is_ok());
        assert!(Tolerance::new(0.0, 1e-8).is_err());
        assert!(Tolerance::new(1.0, 1e-8).is_err());
        assert!(Tolerance::new(1e-10, -1.0).is_err());
    }

    #[test]
    fn lstsq_recovers_solution() {
        let a = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let x = real_vector(&[1.0, -1.0]);
        let b = &a * &x;
        assert!(dist(&lstsq(&a, &b, &tol()), &x) < 1e-12);
    }
}
