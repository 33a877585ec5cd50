//! Seeded random instances for property sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::fusion::{FusionPair, FusionSequence};
use crate::linalg::{self, c64, norm, Matrix, Subspace, Tolerance, C64};
use crate::ovframe::{DualParam, FrameGeometry, OvSequence};

/// Scalar field of a random instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn pick<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) { Field::Real } else { Field::Complex }
    }
}

/// Generator for trial `index` of a sweep seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn scalar<R: Rng + ?Sized>(rng: &mut R, field: Field) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    match field {
        Field::Real => c64(re),
        Field::Complex => C64::new(re, rng.sample(StandardNormal)) * c64(std::f64::consts::FRAC_1_SQRT_2),
    }
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, field: Field) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| scalar(rng, field))
}

/// Orthonormal factor of the polar decomposition, the closest matrix with
/// orthonormal columns.
pub fn polar_factor(m: &Matrix) -> Matrix {
    let dec = linalg::svd(m);
    &dec.u * dec.v.adjoint()
}

/// Random `n x r` matrix with orthonormal columns.
pub fn orthonormal<R: Rng + ?Sized>(rng: &mut R, n: usize, r: usize, field: Field) -> Matrix {
    polar_factor(&gaussian(rng, n, r, field))
}

pub fn subspace<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    dim: usize,
    field: Field,
    tol: &Tolerance,
) -> Subspace {
    Subspace::from_orthonormal(orthonormal(rng, n, dim, field), tol).expect("orthonormal columns")
}

/// Random sequence of `m` blocks `C^n -> C^k` whose analysis operator has
/// rank `rank`.
pub fn frame_sequence<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    m: usize,
    rank: usize,
    field: Field,
) -> OvSequence {
    let rank = rank.min(n).min(m * k);
    let basis = orthonormal(rng, n, rank, field);
    let t = gaussian(rng, m * k, rank, field) * basis.adjoint();
    OvSequence::from_analysis(&t, k).expect("finite")
}

/// Random frame for `C^n`; requires `m * k >= n`.
pub fn frame<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, m: usize, field: Field) -> OvSequence {
    assert!(m * k >= n, "a frame needs at least n rows");
    frame_sequence(rng, n, k, m, n, field)
}

/// Random shape `(n, k, m, rank)` within the given limits, with `m * k >= rank >= 1`.
pub fn shape<R: Rng + ?Sized>(
    rng: &mut R,
    max_n: usize,
    max_k: usize,
    max_m: usize,
    frame: bool,
) -> (usize, usize, usize, usize) {
    loop {
        let n = rng.random_range(1..=max_n);
        let k = rng.random_range(1..=max_k);
        let m = rng.random_range(1..=max_m);
        if m * k < n && frame {
            continue;
        }
        let rank = if frame { n } else { rng.random_range(1..=n.min(m * k)) };
        return (n, k, m, rank);
    }
}

/// Random element of the dual parameter space with operator norm `scale`.
pub fn dual_param<R: Rng + ?Sized>(
    rng: &mut R,
    geometry: &FrameGeometry,
    field: Field,
    scale: f64,
) -> DualParam {
    let basis = geometry.dual_param_basis();
    let coeffs: Vec<C64> = (0..basis.len()).map(|_| scalar(rng, field)).collect();
    let Some(l) = DualParam::combination(&basis, &coeffs) else {
        let (rows, cols) = geometry.analysis.shape();
        return DualParam::from_matrix_unchecked(linalg::zeros(rows, cols));
    };
    let size = norm(l.matrix());
    if size > 0.0 {
        DualParam::from_matrix_unchecked(l.into_matrix() * c64(scale / size))
    } else {
        l
    }
}

/// Perturbation of `a` keeping its rank, with `||T_A - T_B||` close to
/// `target_mu`.
///
/// `T_A = X U^H` with `U` an orthonormal basis of `H_A` is moved to
/// `(X + tE) polar(U + tG)^H`, and `t` is found by bisection.
pub fn perturbed<R: Rng + ?Sized>(
    rng: &mut R,
    a: &OvSequence,
    target_mu: f64,
    field: Field,
    tol: &Tolerance,
) -> OvSequence {
    let t_a = a.analysis_operator();
    let u = a.frame_subspace(tol).basis().clone();
    let x = &t_a * &u;
    let e = gaussian(rng, x.nrows(), x.ncols(), field);
    let g = gaussian(rng, u.nrows(), u.ncols(), field);
    let build = |t: f64| -> Matrix {
        (&x + &e * c64(t)) * polar_factor(&(&u + &g * c64(t))).adjoint()
    };
    let mu_at = |t: f64| linalg::dist(&t_a, &build(t));
    let t = if target_mu <= 0.0 || u.ncols() == 0 {
        0.0
    } else {
        let mut hi = target_mu / (norm(&e) + norm(&x) * norm(&g)).max(1e-12);
        let mut grow = 0;
        while mu_at(hi) < target_mu && grow < 60 {
            hi *= 2.0;
            grow += 1;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mu_at(mid) < target_mu { lo = mid } else { hi = mid }
        }
        0.5 * (lo + hi)
    };
    OvSequence::from_analysis(&build(t), a.codomain_dim()).expect("finite")
}

/// Random fusion frame for `C^n` with `m` subspaces and weights in `[0.5, 2]`.
pub fn fusion_frame<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    field: Field,
    tol: &Tolerance,
) -> FusionSequence {
    loop {
        let pairs: Vec<FusionPair> = (0..m)
            .map(|_| {
                let dim = rng.random_range(1..=n);
                FusionPair::new(subspace(rng, n, dim, field, tol), rng.random_range(0.5..=2.0))
            })
            .collect();
        let w = FusionSequence::new(n, pairs).expect("valid pairs");
        if w.classify(tol).is_frame && w.classify(tol).lower_bound > 1e-3 {
            return w;
        }
    }
}

/// Moves each subspace and weight of `w` by an amount proportional to `eta`.
pub fn perturbed_fusion<R: Rng + ?Sized>(
    rng: &mut R,
    w: &FusionSequence,
    eta: f64,
    field: Field,
    tol: &Tolerance,
) -> FusionSequence {
    let n = w.ambient_dim();
    let pairs = w
        .pairs()
        .iter()
        .map(|p| {
            if p.is_degenerate() {
                return p.clone();
            }
            let b = p.subspace.basis();
            let moved = polar_factor(&(b + gaussian(rng, n, b.ncols(), field) * c64(eta)));
            let s = Subspace::from_orthonormal(moved, tol).expect("orthonormal columns");
            let weight = (p.weight + eta * rng.random_range(-1.0..=1.0)).max(0.1 * p.weight);
            FusionPair::new(s, weight)
        })
        .collect();
    FusionSequence::new(n, pairs).expect("valid pairs")
}

/// Random invertible matrix with condition number below `max_cond`.
pub fn invertible<R: Rng + ?Sized>(rng: &mut R, n: usize, field: Field, max_cond: f64) -> Matrix {
    loop {
        let a = gaussian(rng, n, n, field);
        let s = linalg::singular_values(&a);
        if s[n - 1] > 0.0 && s[0] / s[n - 1] < max_cond {
            return a;
        }
    }
}

/// Random unit vector in `C^n`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, field: Field) -> Matrix {
    let v = gaussian(rng, n, 1, field);
    let size = v.norm();
    v * c64(1.0 / size)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_streams_are_reproducible_and_distinct() {
        let a: f64 = trial_rng(7, 3).random();
        let b: f64 = trial_rng(7, 3).random();
        let c: f64 = trial_rng(7, 4).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn orthonormal_columns() {
        let mut rng = trial_rng(1, 0);
        let q = orthonormal(&mut rng, 5, 3, Field::Complex);
        assert!(linalg::dist(&(q.adjoint() * &q), &linalg::identity(3)) < 1e-12);
    }

    #[test]
    fn perturbation_hits_target() {
        let tol = Tolerance::default();
        let mut rng = trial_rng(2, 0);
        let a = frame_sequence(&mut rng, 4, 2, 3, 3, Field::Real);
        let b = perturbed(&mut rng, &a, 0.1, Field::Real, &tol);
        let mu = linalg::dist(&a.analysis_operator(), &b.analysis_operator());
        assert!((mu - 0.1).abs() < 1e-9);
        assert_eq!(b.classify(&tol).h_a_dim, 3);
    }

    #[test]
    fn random_fusion_frames_are_frames() {
        let tol = Tolerance::default();
        let mut rng = trial_rng(3, 0);
        let w = fusion_frame(&mut rng, 4, 3, Field::Complex, &tol);
        assert!(w.classify(&tol).is_frame);
    }
}
