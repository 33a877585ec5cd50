//! Operator-valued Bessel and frame sequences `(A_i)` with `A_i: C^n -> C^k`.
//!
//! The analysis operator stacks the blocks vertically, so block `i` occupies
//! rows `i*k .. (i+1)*k` of `T_A`. Duals are parametrized by operators `L`
//! with `T_A^H L = 0`, stored as full `(m*k) x n` matrices that vanish on the
//! orthogonal complement of `H_A`.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::linalg::{
    self, c64, check_finite, dist, identity, norm, restricted_inverse, vstack, Matrix, Subspace,
    Tolerance,
};

#[derive(Clone, Debug, PartialEq)]
pub struct OvSequence {
    domain_dim: usize,
    codomain_dim: usize,
    blocks: Vec<Matrix>,
}

impl OvSequence {
    pub fn new(domain_dim: usize, codomain_dim: usize, blocks: Vec<Matrix>) -> Result<Self> {
        for (i, b) in blocks.iter().enumerate() {
            if b.shape() != (codomain_dim, domain_dim) {
                return Err(FrameError::InvalidInput(format!(
                    "block {i} has shape {:?}, expected ({codomain_dim}, {domain_dim})",
                    b.shape()
                )));
            }
            check_finite(b)?;
        }
        Ok(Self { domain_dim, codomain_dim, blocks })
    }

    /// Splits an analysis operator into consecutive blocks of `codomain_dim` rows.
    pub fn from_analysis(t: &Matrix, codomain_dim: usize) -> Result<Self> {
        if codomain_dim == 0 || !t.nrows().is_multiple_of(codomain_dim) {
            return Err(FrameError::InvalidInput(format!(
                "{} rows cannot be split into blocks of {codomain_dim}",
                t.nrows()
            )));
        }
        let blocks = (0..t.nrows() / codomain_dim)
            .map(|i| t.rows(i * codomain_dim, codomain_dim).into_owned())
            .collect();
        Self::new(t.ncols(), codomain_dim, blocks)
    }

    /// Vector frame sequence: block `i` is the row `phi_i^H`, i.e. `x -> <x, phi_i>`.
    pub fn from_vectors(vectors: &[Matrix]) -> Result<Self> {
        let n = vectors.first().map(|v| v.nrows()).ok_or_else(|| {
            FrameError::InvalidInput("at least one vector is required".into())
        })?;
        let mut blocks = Vec::with_capacity(vectors.len());
        for (i, v) in vectors.iter().enumerate() {
            if v.shape() != (n, 1) {
                return Err(FrameError::InvalidInput(format!(
                    "vector {i} has shape {:?}, expected ({n}, 1)",
                    v.shape()
                )));
            }
            blocks.push(v.adjoint());
        }
        Self::new(n, 1, blocks)
    }

    /// Recovers vectors `phi_i` from rank-one blocks `A_i = e_i phi_i^H`.
    ///
    /// `e_i` is the leading left singular vector rotated so that its first
    /// nonzero entry is real and positive; zero blocks give zero vectors.
    pub fn to_vectors(&self, tol: &Tolerance) -> Result<Vec<Matrix>> {
        let n = self.domain_dim;
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let dec = linalg::svd(b);
                let scale = self.blocks.iter().map(norm).fold(0.0, f64::max);
                let cutoff = tol.rank * scale.max(1.0);
                let r = dec.s.iter().filter(|&&s| s > cutoff).count();
                match r {
                    0 => Ok(linalg::zeros(n, 1)),
                    1 => {
                        let u = dec.u.column(0);
                        let lead = u
                            .iter()
                            .find(|z| z.norm() > tol.rank)
                            .copied()
                            .unwrap_or(c64(1.0));
                        let phase = lead / lead.norm();
                        Ok(dec.v.columns(0, 1) * (phase.conj() * dec.s[0]))
                    }
                    rank => Err(FrameError::RankError { index: i, rank }),
                }
            })
            .collect()
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn same_shape(&self, other: &OvSequence) -> bool {
        self.domain_dim == other.domain_dim
            && self.codomain_dim == other.codomain_dim
            && self.len() == other.len()
    }

    pub fn analysis_operator(&self) -> Matrix {
        vstack(&self.blocks, self.domain_dim)
    }

    /// `S_A = sum A_i^H A_i`.
    pub fn frame_operator(&self) -> Matrix {
        self.blocks
            .iter()
            .fold(linalg::zeros(self.domain_dim, self.domain_dim), |acc, b| acc + b.adjoint() * b)
    }

    /// `H_A`, the span of the ranges of the adjoint blocks.
    pub fn frame_subspace(&self, tol: &Tolerance) -> Subspace {
        linalg::range_basis(&self.analysis_operator().adjoint(), tol)
            .expect("blocks validated finite")
    }

    pub fn classify(&self, tol: &Tolerance) -> FrameReport {
        FrameReport::from_analysis(&self.analysis_operator(), tol)
    }

    pub fn geometry(&self, tol: &Tolerance) -> Result<FrameGeometry> {
        FrameGeometry::new(self, tol)
    }

    pub fn canonical_dual(&self, tol: &Tolerance) -> Result<OvSequence> {
        let g = self.geometry(tol)?;
        g.require_nonzero()?;
        OvSequence::from_analysis(&g.canonical_dual_analysis(), self.codomain_dim)
    }

    /// Orthonormal (Hilbert-Schmidt) basis of the dual parameter space.
    pub fn dual_param_space(&self, tol: &Tolerance) -> Result<Vec<DualParam>> {
        Ok(self.geometry(tol)?.dual_param_basis())
    }

    pub fn make_dual(&self, l: &DualParam, tol: &Tolerance) -> Result<OvSequence> {
        let g = self.geometry(tol)?;
        g.validate_param(l.matrix(), tol)?;
        OvSequence::from_analysis(&g.dual_analysis(l.matrix()), self.codomain_dim)
    }

    pub fn is_dual(&self, candidate: &OvSequence, tol: &Tolerance) -> Result<bool> {
        Ok(self.dual_check(candidate, tol)?.is_dual)
    }

    pub fn dual_check(&self, candidate: &OvSequence, tol: &Tolerance) -> Result<DualCheck> {
        if !self.same_shape(candidate) {
            return Err(FrameError::InvalidInput("sequences have different shapes".into()));
        }
        let g = self.geometry(tol)?;
        Ok(g.check_dual_analysis(&candidate.analysis_operator(), tol))
    }
}

/// Frame bounds and classification flags of an operator-valued sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub bessel_bound: f64,
    pub lower_bound: f64,
    #[serde(rename = "H_A_dim")]
    pub h_a_dim: usize,
    pub is_frame_sequence: bool,
    pub is_frame: bool,
    pub is_tight: bool,
    pub is_parseval: bool,
}

impl FrameReport {
    /// Optimal bounds from the nonzero singular values of an analysis operator.
    pub fn from_analysis(t: &Matrix, tol: &Tolerance) -> Self {
        let n = t.ncols();
        let s = linalg::singular_values(t);
        let r = linalg::rank(t, tol);
        if r == 0 {
            return Self {
                bessel_bound: s.first().map_or(0.0, |x| x * x),
                lower_bound: 0.0,
                h_a_dim: 0,
                is_frame_sequence: false,
                is_frame: false,
                is_tight: false,
                is_parseval: false,
            };
        }
        let beta = s[0] * s[0];
        let alpha = s[r - 1] * s[r - 1];
        let is_tight = (beta - alpha).abs() <= tol.scaled(beta);
        Self {
            bessel_bound: beta,
            lower_bound: alpha,
            h_a_dim: r,
            // ranges are closed in finite dimensions
            is_frame_sequence: true,
            is_frame: r == n,
            is_tight,
            is_parseval: is_tight && (beta - 1.0).abs() <= tol.eq && (alpha - 1.0).abs() <= tol.eq,
        }
    }
}

/// Outcome of a duality test, including whether `H_D = H_A` holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCheck {
    pub is_dual: bool,
    pub reconstruction_residual: f64,
    pub containment_residual: f64,
    pub subspaces_equal: bool,
}

/// Validated dual parameter `L`: `T_A^H L = 0` and `L P_A = L`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualParam {
    l: Matrix,
}

impl DualParam {
    pub fn new(seq: &OvSequence, l: Matrix, tol: &Tolerance) -> Result<Self> {
        seq.geometry(tol)?.validate_param(&l, tol)?;
        Ok(Self { l })
    }

    pub fn zero(seq: &OvSequence) -> Self {
        Self { l: linalg::zeros(seq.len() * seq.codomain_dim(), seq.domain_dim()) }
    }

    /// Wraps a matrix already known to satisfy the invariants.
    pub(crate) fn from_matrix_unchecked(l: Matrix) -> Self {
        Self { l }
    }

    /// Linear combination of parameters; the result stays in the parameter space.
    pub fn combination(basis: &[DualParam], coeffs: &[linalg::C64]) -> Option<Self> {
        let first = basis.first()?;
        let mut l = linalg::zeros(first.l.nrows(), first.l.ncols());
        for (p, c) in basis.iter().zip(coeffs) {
            l += &p.l * *c;
        }
        Some(Self { l })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.l
    }

    pub fn into_matrix(self) -> Matrix {
        self.l
    }
}

/// Cached operators attached to a sequence: `T_A`, `S_A`, `H_A`, `P_A`,
/// `(S_A|H_A)^{-1} P_A`, and `ker T_A^H`.
#[derive(Clone, Debug)]
pub struct FrameGeometry {
    pub analysis: Matrix,
    pub frame_operator: Matrix,
    pub subspace: Subspace,
    pub projection: Matrix,
    pub restricted_inverse: Matrix,
    pub synthesis_kernel: Subspace,
    pub report: FrameReport,
}

impl FrameGeometry {
    pub fn new(seq: &OvSequence, tol: &Tolerance) -> Result<Self> {
        let analysis = seq.analysis_operator();
        let frame_operator = analysis.adjoint() * &analysis;
        let subspace = seq.frame_subspace(tol);
        let projection = subspace.projection();
        let restricted_inverse = restricted_inverse(&frame_operator, &subspace, tol)?;
        let synthesis_kernel = linalg::kernel_basis(&analysis.adjoint(), tol)?;
        let report = FrameReport::from_analysis(&analysis, tol);
        Ok(Self {
            analysis,
            frame_operator,
            subspace,
            projection,
            restricted_inverse,
            synthesis_kernel,
            report,
        })
    }

    pub fn domain_dim(&self) -> usize {
        self.analysis.ncols()
    }

    pub fn require_nonzero(&self) -> Result<()> {
        if self.report.h_a_dim == 0 {
            Err(FrameError::NotAFrameSequence("all blocks vanish".into()))
        } else {
            Ok(())
        }
    }

    /// `T_A (S_A|H_A)^{-1} P_A`.
    pub fn canonical_dual_analysis(&self) -> Matrix {
        &self.analysis * &self.restricted_inverse
    }

    /// `(T_A (S_A|H_A)^{-1} + L) P_A`.
    pub fn dual_analysis(&self, l: &Matrix) -> Matrix {
        (self.canonical_dual_analysis() + l) * &self.projection
    }

    /// Frame operator of the dual with parameter `L`, `((S_A|H_A)^{-1} + L^H L) P_A`.
    pub fn dual_frame_operator(&self, l: &Matrix) -> Matrix {
        (&self.restricted_inverse + l.adjoint() * l) * &self.projection
    }

    /// Orthogonal projection onto `ker T_A^H`.
    pub fn kernel_projection(&self) -> Matrix {
        self.synthesis_kernel.projection()
    }

    pub fn validate_param(&self, l: &Matrix, tol: &Tolerance) -> Result<()> {
        let shape = self.analysis.shape();
        if l.shape() != shape {
            return Err(FrameError::InvalidDualParam(format!(
                "parameter has shape {:?}, expected {shape:?}",
                l.shape()
            )));
        }
        check_finite(l).map_err(|e| FrameError::InvalidDualParam(e.to_string()))?;
        let scale = norm(l).max(1.0) * norm(&self.analysis).max(1.0);
        let annihilation = norm(&(self.analysis.adjoint() * l));
        if annihilation > tol.scaled(scale) {
            return Err(FrameError::InvalidDualParam(format!(
                "T^H L does not vanish (norm {annihilation:e})"
            )));
        }
        let leak = dist(&(l * &self.projection), l);
        if leak > tol.scaled(norm(l)) {
            return Err(FrameError::InvalidDualParam(format!(
                "L does not vanish on the complement of H_A (norm {leak:e})"
            )));
        }
        Ok(())
    }

    /// Basis `K_a U_b^H` with `K` spanning `ker T_A^H` and `U` spanning `H_A`.
    pub fn dual_param_basis(&self) -> Vec<DualParam> {
        let k = self.synthesis_kernel.basis();
        let u = self.subspace.basis();
        let mut out = Vec::with_capacity(k.ncols() * u.ncols());
        for a in 0..k.ncols() {
            for b in 0..u.ncols() {
                out.push(DualParam { l: k.column(a) * u.column(b).adjoint() });
            }
        }
        out
    }

    pub fn check_dual_analysis(&self, candidate: &Matrix, tol: &Tolerance) -> DualCheck {
        let scale = norm(candidate).max(1.0) * norm(&self.analysis).max(1.0);
        let reconstruction_residual =
            dist(&(candidate.adjoint() * &self.analysis), &self.projection);
        let n = self.domain_dim();
        let containment_residual = norm(&((identity(n) - &self.projection) * candidate.adjoint()));
        let is_dual = reconstruction_residual <= tol.scaled(scale)
            && containment_residual <= tol.scaled(norm(candidate));
        let candidate_rank = linalg::rank(candidate, tol);
        DualCheck {
            is_dual,
            reconstruction_residual,
            containment_residual,
            subspaces_equal: is_dual && candidate_rank == self.subspace.dim(),
        }
    }
}
