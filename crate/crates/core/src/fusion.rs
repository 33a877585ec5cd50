//! Fusion frames `((W_i, c_i))` and their duals.
//!
//! A fusion sequence is handled through the operator-valued sequence
//! `(c_i P_{W_i})`, so `T_W`, `S_W`, `H_W` are those of that sequence. The
//! convention `W_i = {0} <=> c_i = 0` is enforced on construction.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::linalg::{self, c64, dist, identity, norm, Matrix, Subspace, Tolerance, C64};
use crate::ovframe::{FrameGeometry, FrameReport, OvSequence};

#[derive(Clone, Debug, PartialEq)]
pub struct FusionPair {
    pub subspace: Subspace,
    pub weight: f64,
}

impl FusionPair {
    pub fn new(subspace: Subspace, weight: f64) -> Self {
        Self { subspace, weight }
    }

    pub fn is_degenerate(&self) -> bool {
        self.weight == 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusionSequence {
    ambient_dim: usize,
    pairs: Vec<FusionPair>,
}

impl FusionSequence {
    pub fn new(ambient_dim: usize, pairs: Vec<FusionPair>) -> Result<Self> {
        for (i, p) in pairs.iter().enumerate() {
            if p.subspace.ambient_dim() != ambient_dim {
                return Err(FrameError::InvalidInput(format!(
                    "subspace {i} lives in dimension {}, expected {ambient_dim}",
                    p.subspace.ambient_dim()
                )));
            }
            if !(p.weight >= 0.0 && p.weight.is_finite()) {
                return Err(FrameError::InvalidInput(format!(
                    "weight {i} must be finite and nonnegative, got {}",
                    p.weight
                )));
            }
            if p.subspace.is_zero() != (p.weight == 0.0) {
                return Err(FrameError::InvalidInput(format!(
                    "pair {i}: the subspace is zero exactly when the weight is zero"
                )));
            }
        }
        Ok(Self { ambient_dim, pairs })
    }

    /// Builds a sequence from spanning sets, mapping zero spans and zero
    /// weights to the degenerate pair `({0}, 0)`.
    pub fn from_spans(
        ambient_dim: usize,
        spans: &[(Matrix, f64)],
        tol: &Tolerance,
    ) -> Result<Self> {
        let pairs = spans
            .iter()
            .map(|(m, c)| {
                let s = Subspace::span(m, tol)?;
                if s.is_zero() || *c == 0.0 {
                    Ok(FusionPair::new(Subspace::zero(ambient_dim), 0.0))
                } else {
                    Ok(FusionPair::new(s, *c))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ambient_dim, pairs)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[FusionPair] {
        &self.pairs
    }

    pub fn weights(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.weight).collect()
    }

    pub fn projections(&self) -> Vec<Matrix> {
        self.pairs.iter().map(|p| p.subspace.projection()).collect()
    }

    pub fn to_ov(&self) -> OvSequence {
        fusion_to_ov(self)
    }

    pub fn classify(&self, tol: &Tolerance) -> FrameReport {
        self.to_ov().classify(tol)
    }

    pub fn geometry(&self, tol: &Tolerance) -> Result<FrameGeometry> {
        self.to_ov().geometry(tol)
    }

    fn check_compatible(&self, other: &FusionSequence) -> Result<()> {
        if self.ambient_dim != other.ambient_dim || self.len() != other.len() {
            return Err(FrameError::InvalidInput(
                "fusion sequences have different shapes".into(),
            ));
        }
        Ok(())
    }
}

/// `I_0(V, W)`: indices where either pair is degenerate.
pub fn degenerate_indices(v: &FusionSequence, w: &FusionSequence) -> Vec<usize> {
    v.pairs
        .iter()
        .zip(&w.pairs)
        .enumerate()
        .filter(|(_, (a, b))| a.is_degenerate() || b.is_degenerate())
        .map(|(i, _)| i)
        .collect()
}

/// The operator-valued sequence `(c_i P_{W_i})`.
pub fn fusion_to_ov(w: &FusionSequence) -> OvSequence {
    let n = w.ambient_dim;
    let blocks = w.pairs.iter().map(|p| p.subspace.projection() * c64(p.weight)).collect();
    OvSequence::new(n, n, blocks).expect("projections are finite and correctly shaped")
}

/// Frame operator and its inverse for a fusion frame of the whole space.
struct FrameData {
    geometry: FrameGeometry,
    inverse: Matrix,
}

fn frame_data(w: &FusionSequence, tol: &Tolerance) -> Result<FrameData> {
    let geometry = w.geometry(tol)?;
    if !geometry.report.is_frame {
        return Err(FrameError::NotAFrame(format!(
            "H_W has dimension {} in C^{}",
            geometry.report.h_a_dim, w.ambient_dim
        )));
    }
    let inverse = geometry.restricted_inverse.clone();
    Ok(FrameData { geometry, inverse })
}

/// Inverse frame operator `S_W^{-1}` of a fusion frame.
pub fn inverse_frame_operator(w: &FusionSequence, tol: &Tolerance) -> Result<Matrix> {
    Ok(frame_data(w, tol)?.inverse)
}

/// `sum c_i d_i P_{V_i} S_W^{-1} P_{W_i}`.
pub fn gavruta_sum(v: &FusionSequence, w: &FusionSequence, tol: &Tolerance) -> Result<Matrix> {
    v.check_compatible(w)?;
    let data = frame_data(w, tol)?;
    let n = w.ambient_dim;
    Ok(v.pairs.iter().zip(&w.pairs).fold(linalg::zeros(n, n), |acc, (pv, pw)| {
        acc + pv.subspace.projection() * &data.inverse * pw.subspace.projection()
            * c64(pv.weight * pw.weight)
    }))
}

pub fn gavruta_is_dual(v: &FusionSequence, w: &FusionSequence, tol: &Tolerance) -> Result<bool> {
    let sum = gavruta_sum(v, w, tol)?;
    Ok(dist(&sum, &identity(w.ambient_dim)) <= tol.eq)
}

/// Witness family `(Q_i)` for fusion frame duality.
#[derive(Clone, Debug, PartialEq)]
pub struct QWitness {
    pub q: Vec<Matrix>,
}

impl QWitness {
    /// The family `(Q_i^H)`, witnessing the reversed duality.
    pub fn adjoint(&self) -> QWitness {
        QWitness { q: self.q.iter().map(|m| m.adjoint()).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfDualCheck {
    pub is_dual: bool,
    pub reconstruction_residual: f64,
    pub diagnostics: Vec<String>,
}

/// Checks the witness conditions and `sum c_i d_i Q_i = I`.
pub fn ffdual_verify(
    v: &FusionSequence,
    w: &FusionSequence,
    q: &QWitness,
    tol: &Tolerance,
) -> Result<FfDualCheck> {
    v.check_compatible(w)?;
    frame_data(w, tol)?;
    let n = w.ambient_dim;
    if q.q.len() != w.len() || q.q.iter().any(|m| m.shape() != (n, n)) {
        return Err(FrameError::InvalidInput("witness does not match the sequences".into()));
    }
    let mut diagnostics = Vec::new();
    let id = identity(n);
    let mut sum = linalg::zeros(n, n);
    for (i, ((pv, pw), qi)) in v.pairs.iter().zip(&w.pairs).zip(&q.q).enumerate() {
        if !linalg::is_finite(qi) {
            diagnostics.push(format!("Q_{i} has non-finite entries"));
            continue;
        }
        let qn = norm(qi);
        let kernel_leak = norm(&(qi * (&id - pw.subspace.projection())));
        if kernel_leak > tol.scaled(qn) {
            diagnostics.push(format!("Q_{i} does not vanish on W_{i}^perp ({kernel_leak:e})"));
        }
        let range_leak = norm(&((&id - pv.subspace.projection()) * qi));
        if range_leak > tol.scaled(qn) {
            diagnostics.push(format!("ran Q_{i} is not inside V_{i} ({range_leak:e})"));
        }
        if pv.is_degenerate() || pw.is_degenerate() {
            if qn > tol.eq {
                diagnostics.push(format!("Q_{i} must vanish on a degenerate index (norm {qn:e})"));
            }
        } else if (qn - 1.0).abs() > tol.eq {
            diagnostics.push(format!("||Q_{i}|| = {qn}, expected 1"));
        }
        sum += qi * c64(pv.weight * pw.weight);
    }
    let scale = v.pairs.iter().zip(&w.pairs).map(|(a, b)| a.weight * b.weight).fold(0.0, f64::max);
    let reconstruction_residual = dist(&sum, &id);
    if reconstruction_residual > tol.scaled(scale) {
        diagnostics.push(format!("sum c_i d_i Q_i deviates from I by {reconstruction_residual:e}"));
    }
    Ok(FfDualCheck { is_dual: diagnostics.is_empty(), reconstruction_residual, diagnostics })
}

fn normalized_witness(ops: &[Matrix], tol: &Tolerance) -> (Vec<f64>, QWitness) {
    let norms: Vec<f64> = ops.iter().map(norm).collect();
    let q = ops
        .iter()
        .zip(&norms)
        .map(|(a, &na)| {
            if na > tol.eq * 1e-3 {
                a * c64(1.0 / na)
            } else {
                linalg::zeros(a.nrows(), a.ncols())
            }
        })
        .collect();
    (norms, QWitness { q })
}

/// Reweights a Gavruta dual `V` of `W` into a fusion frame dual with weights
/// `||P_{V_i} S_W^{-1} P_{W_i}|| d_i` and witness `Q_i = A_i / ||A_i||`.
pub fn ffdual_from_gavruta(
    v: &FusionSequence,
    w: &FusionSequence,
    tol: &Tolerance,
) -> Result<(FusionSequence, QWitness)> {
    v.check_compatible(w)?;
    let data = frame_data(w, tol)?;
    if !gavruta_is_dual(v, w, tol)? {
        return Err(FrameError::InvalidInput("V is not a Gavruta dual of W".into()));
    }
    let ops: Vec<Matrix> = v
        .pairs
        .iter()
        .zip(&w.pairs)
        .map(|(pv, pw)| pv.subspace.projection() * &data.inverse * pw.subspace.projection())
        .collect();
    let cutoff = tol.eq * norm(&data.inverse).max(1.0);
    let mut pairs = Vec::with_capacity(v.len());
    let mut q = Vec::with_capacity(v.len());
    for (i, ((pv, pw), a)) in v.pairs.iter().zip(&w.pairs).zip(&ops).enumerate() {
        let na = norm(a);
        let degenerate = pv.is_degenerate() || pw.is_degenerate();
        if na <= cutoff {
            if !degenerate {
                return Err(FrameError::DegenerateGavrutaDual(format!(
                    "P_V S^-1 P_W vanishes at index {i} outside I_0"
                )));
            }
            pairs.push(FusionPair::new(Subspace::zero(v.ambient_dim), 0.0));
            q.push(linalg::zeros(v.ambient_dim, v.ambient_dim));
        } else {
            pairs.push(FusionPair::new(pv.subspace.clone(), na * pv.weight));
            q.push(a * c64(1.0 / na));
        }
    }
    Ok((FusionSequence::new(v.ambient_dim, pairs)?, QWitness { q }))
}

/// The Gavruta dual `((S_W^{-1} W_i, c_i))`.
pub fn canonical_gavruta_dual(w: &FusionSequence, tol: &Tolerance) -> Result<FusionSequence> {
    let data = frame_data(w, tol)?;
    let pairs = w
        .pairs
        .iter()
        .map(|p| {
            if p.is_degenerate() {
                FusionPair::new(Subspace::zero(w.ambient_dim), 0.0)
            } else {
                FusionPair::new(p.subspace.image(&data.inverse, tol), p.weight)
            }
        })
        .collect();
    FusionSequence::new(w.ambient_dim, pairs)
}

/// Canonical fusion frame dual `((S_W^{-1} W_i, c_i ||S_W^{-1}|W_i||))`
/// together with its witness.
pub fn canonical_ffdual_with_witness(
    w: &FusionSequence,
    tol: &Tolerance,
) -> Result<(FusionSequence, QWitness)> {
    let data = frame_data(w, tol)?;
    let n = w.ambient_dim;
    let mut pairs = Vec::with_capacity(w.len());
    let mut q = Vec::with_capacity(w.len());
    for p in &w.pairs {
        if p.is_degenerate() {
            pairs.push(FusionPair::new(Subspace::zero(n), 0.0));
            q.push(linalg::zeros(n, n));
            continue;
        }
        let a = &data.inverse * p.subspace.projection();
        let na = norm(&a);
        pairs.push(FusionPair::new(p.subspace.image(&data.inverse, tol), p.weight * na));
        q.push(a * c64(1.0 / na));
    }
    Ok((FusionSequence::new(n, pairs)?, QWitness { q }))
}

pub fn canonical_ffdual(w: &FusionSequence, tol: &Tolerance) -> Result<FusionSequence> {
    Ok(canonical_ffdual_with_witness(w, tol)?.0)
}

/// Alternate fusion frame dual `((ran A_i, ||A_i||))` with
/// `A_i = (c_i S_W^{-1} + L_i^H) P_{W_i}`, `L_i` the `i`-th block of `L`,
/// for any `L` whose range lies in `ker T_W^H`.
pub fn alternate_ffdual(
    w: &FusionSequence,
    l: &Matrix,
    tol: &Tolerance,
) -> Result<(FusionSequence, QWitness)> {
    let data = frame_data(w, tol)?;
    let n = w.ambient_dim;
    let t = &data.geometry.analysis;
    if l.shape() != t.shape() {
        return Err(FrameError::InvalidDualParam(format!(
            "parameter has shape {:?}, expected {:?}",
            l.shape(),
            t.shape()
        )));
    }
    linalg::check_finite(l).map_err(|e| FrameError::InvalidDualParam(e.to_string()))?;
    let leak = norm(&(t.adjoint() * l));
    if leak > tol.scaled(norm(l) * norm(t)) {
        return Err(FrameError::InvalidDualParam(format!(
            "range of L is not inside ker T_W^H ({leak:e})"
        )));
    }
    let ops: Vec<Matrix> = w
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let li = l.rows(i * n, n);
            (&data.inverse * c64(p.weight) + li.adjoint()) * p.subspace.projection()
        })
        .collect();
    let (norms, witness) = normalized_witness(&ops, tol);
    let pairs = ops
        .iter()
        .zip(&norms)
        .map(|(a, &na)| {
            if na > tol.eq * 1e-3 {
                FusionPair::new(Subspace::span(a, tol).expect("finite"), na)
            } else {
                FusionPair::new(Subspace::zero(n), 0.0)
            }
        })
        .collect();
    Ok((FusionSequence::new(n, pairs)?, witness))
}

/// Result of a successful characterization search: blocks `L_i` with
/// `sum L_i^H c_i P_{W_i} = 0` and the induced witness.
#[derive(Clone, Debug)]
pub struct Characterization {
    pub l_blocks: Vec<Matrix>,
    pub witness: QWitness,
}

/// Searches for `L = (L_i)` with `T_L^H T_W = 0` such that
/// `A_i = (c_i S_W^{-1} + L_i^H) P_{W_i}` has range in `V_i` and norm `d_i`.
///
/// `L` is parametrized as `K X` with `K` an orthonormal basis of
/// `ker T_W^H`. The range constraints are linear in `X` and are solved by
/// least squares; the norm constraints are then enforced by a Gauss-Newton
/// walk inside the affine solution set. A failed search returns `None`,
/// which does not prove that `V` is not a dual.
pub fn ffdual_characterize(
    v: &FusionSequence,
    w: &FusionSequence,
    tol: &Tolerance,
) -> Result<Option<Characterization>> {
    v.check_compatible(w)?;
    let data = frame_data(w, tol)?;
    let n = w.ambient_dim;
    let m = w.len();
    let k = data.geometry.synthesis_kernel.basis().clone();
    let p = k.ncols();
    let id = identity(n);

    // per-index pieces: A_i(Y) = base_i + Y * right_i
    let base: Vec<Matrix> = w
        .pairs
        .iter()
        .map(|pw| &data.inverse * pw.subspace.projection() * c64(pw.weight))
        .collect();
    let right: Vec<Matrix> = w
        .pairs
        .iter()
        .enumerate()
        .map(|(i, pw)| k.rows(i * n, n).adjoint() * pw.subspace.projection())
        .collect();
    let leak: Vec<Matrix> = v.pairs.iter().map(|pv| &id - pv.subspace.projection()).collect();

    let unknowns = n * p;
    let ops_at = |y: &Matrix| -> Vec<Matrix> {
        base.iter().zip(&right).map(|(b, r)| b + y * r).collect()
    };

    // linear range constraints (I - P_{V_i}) (base_i + Y right_i) = 0
    let mut y0 = linalg::zeros(n, p);
    let mut null_dirs: Vec<Matrix> = Vec::new();
    if unknowns > 0 {
        let mut system = linalg::zeros(m * n * n, unknowns);
        let mut rhs = linalg::zeros(m * n * n, 1);
        for i in 0..m {
            let kron = right[i].transpose().kronecker(&leak[i]);
            system.view_mut((i * n * n, 0), (n * n, unknowns)).copy_from(&kron);
            let target = -(&leak[i] * &base[i]);
            for (idx, z) in target.iter().enumerate() {
                rhs[(i * n * n + idx, 0)] = *z;
            }
        }
        let sol = linalg::lstsq(&system, &rhs, tol);
        y0 = Matrix::from_column_slice(n, p, sol.as_slice());
        let dec = linalg::svd(&system);
        let r = linalg::rank(&system, tol);
        let full_v = complete_right_basis(&dec.v, r, tol);
        null_dirs = full_v
            .iter()
            .map(|col| Matrix::from_column_slice(n, p, col.as_slice()))
            .collect();
    }
    let linear_residual: f64 = ops_at(&y0)
        .iter()
        .zip(&leak)
        .map(|(a, l)| norm(&(l * a)))
        .fold(0.0, f64::max);
    if linear_residual > tol.eq {
        return Ok(None);
    }

    let targets: Vec<Option<f64>> = v
        .pairs
        .iter()
        .zip(&w.pairs)
        .map(|(pv, pw)| (!(pv.is_degenerate() || pw.is_degenerate())).then_some(pv.weight))
        .collect();
    let y = refine_norms(&y0, &null_dirs, &right, &ops_at, &targets, tol);

    let ops = ops_at(&y);
    let q = ops
        .iter()
        .zip(&v.pairs)
        .map(|(a, pv)| {
            if pv.weight > 0.0 { a * c64(1.0 / pv.weight) } else { linalg::zeros(n, n) }
        })
        .collect();
    let witness = QWitness { q };
    if !ffdual_verify(v, w, &witness, tol)?.is_dual {
        return Ok(None);
    }
    let x = y.adjoint();
    let l = &k * x;
    let l_blocks = (0..m).map(|i| l.rows(i * n, n).into_owned()).collect();
    Ok(Some(Characterization { l_blocks, witness }))
}

/// Orthonormal basis of the null space of a matrix, given its thin right
/// singular vectors `v` and numerical `rank`.
fn complete_right_basis(v: &Matrix, rank: usize, tol: &Tolerance) -> Vec<Matrix> {
    let row_space = Subspace::span(&v.columns(0, rank).into_owned(), tol).expect("finite");
    let null = row_space.complement(tol);
    (0..null.dim()).map(|j| null.basis().columns(j, 1).into_owned()).collect()
}

/// Gauss-Newton on `||A_i(Y)|| - d_i = 0` over `Y = y0 + sum z_j N_j` with
/// complex coefficients `z_j`.
fn refine_norms(
    y0: &Matrix,
    dirs: &[Matrix],
    right: &[Matrix],
    ops_at: &dyn Fn(&Matrix) -> Vec<Matrix>,
    targets: &[Option<f64>],
    tol: &Tolerance,
) -> Matrix {
    let active: Vec<usize> = (0..targets.len()).filter(|&i| targets[i].is_some()).collect();
    let residual = |y: &Matrix| -> Vec<f64> {
        let ops = ops_at(y);
        active.iter().map(|&i| norm(&ops[i]) - targets[i].unwrap()).collect()
    };
    let size = |r: &[f64]| r.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let mut y = y0.clone();
    let mut res = residual(&y);
    if dirs.is_empty() || active.is_empty() {
        return y;
    }
    for _ in 0..200 {
        if size(&res) <= tol.eq * 1e-2 {
            break;
        }
        let ops = ops_at(&y);
        let mut jac = linalg::zeros(active.len(), 2 * dirs.len());
        for (row, &i) in active.iter().enumerate() {
            let dec = linalg::svd(&ops[i]);
            if dec.s.is_empty() {
                continue;
            }
            let u = dec.u.column(0);
            let vv = dec.v.column(0);
            for (j, d) in dirs.iter().enumerate() {
                let da = d * &right[i];
                let g: C64 = (u.adjoint() * da * vv)[(0, 0)];
                jac[(row, 2 * j)] = c64(g.re);
                jac[(row, 2 * j + 1)] = c64(-g.im);
            }
        }
        let rhs = Matrix::from_fn(active.len(), 1, |r, _| c64(-res[r]));
        let step = linalg::lstsq(&jac, &rhs, tol);
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let mut trial = y.clone();
            for (j, d) in dirs.iter().enumerate() {
                let z = C64::new(step[(2 * j, 0)].re, step[(2 * j + 1, 0)].re) * scale;
                trial += d * z;
            }
            let trial_res = residual(&trial);
            if size(&trial_res) < size(&res) {
                y = trial;
                res = trial_res;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    y
}

/// One group of a tight orthogonal decomposition: indices whose subspaces
/// lie in the `lambda`-eigenspace of `S_W`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightGroup {
    pub indices: Vec<usize>,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub groups: Vec<TightGroup>,
    /// Indices with `W_i = {0}`, compatible with every group.
    pub degenerate: Vec<usize>,
}

/// Splits `W` into mutually orthogonal tight fusion frame sequences when
/// every `W_i` lies in an eigenspace of `S_W`; `None` otherwise.
pub fn tight_orthogonal_decomposition(
    w: &FusionSequence,
    tol: &Tolerance,
) -> Option<Decomposition> {
    let s = w.to_ov().frame_operator();
    let scale = norm(&s);
    let mut groups: Vec<TightGroup> = Vec::new();
    let mut degenerate = Vec::new();
    for (i, p) in w.pairs.iter().enumerate() {
        if p.is_degenerate() {
            degenerate.push(i);
            continue;
        }
        let b = p.subspace.basis();
        let lambda = (b.adjoint() * &s * b).trace().re / p.subspace.dim() as f64;
        let residual = norm(&(&s * b - b * c64(lambda)));
        if residual > tol.scaled(scale) || lambda <= 0.0 {
            return None;
        }
        match groups.iter_mut().find(|g| (g.lambda - lambda).abs() <= tol.scaled(lambda)) {
            Some(g) => g.indices.push(i),
            None => groups.push(TightGroup { indices: vec![i], lambda }),
        }
    }
    Some(Decomposition { groups, degenerate })
}

/// Whether every block of the canonical operator-valued dual of
/// `(c_i P_{W_i})` is a nonnegative multiple of an orthogonal projection.
pub fn canonical_dual_is_fusion_sequence(w: &FusionSequence, tol: &Tolerance) -> Result<bool> {
    let dual = w.to_ov().canonical_dual(tol)?;
    Ok(dual.blocks().iter().all(|b| {
        let t = norm(b);
        linalg::is_hermitian(b, tol) && norm(&(b * b - b * c64(t))) <= tol.scaled(t * t)
    }))
}
