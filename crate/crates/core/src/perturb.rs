//! Perturbations of operator-valued frames and fusion frames.
//!
//! Every report states its hypotheses. Inequalities are only asserted when
//! the hypotheses hold; otherwise the operation returns `NotApplicable`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::fusion::{self, FusionPair, FusionSequence};
use crate::gap::{self, BoundCheck};
use crate::linalg::{self, c64, dist, hs_inner, identity, norm, Matrix, Subspace, Tolerance};
use crate::ovframe::{DualParam, FrameGeometry, OvSequence};
use crate::random::{self, Field};

/// `||T_A - T_B||`.
pub fn mu(a: &OvSequence, b: &OvSequence) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(FrameError::InvalidInput("sequences have different shapes".into()));
    }
    Ok(dist(&a.analysis_operator(), &b.analysis_operator()))
}

/// A named inequality `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl NamedCheck {
    fn new(name: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self { name: name.into(), lhs, rhs, holds: lhs <= rhs + slack }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbReport {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "delta_HAHB")]
    pub delta_hahb: f64,
    #[serde(rename = "Delta_HAHB")]
    pub big_delta_hahb: f64,
    pub predicted_lower: f64,
    pub predicted_upper: f64,
    pub measured_bounds: (f64, f64),
    pub range_gap_bound: f64,
    pub measured_range_gap: f64,
    pub applicable: bool,
    pub checks: Vec<NamedCheck>,
}

impl PerturbReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Geometry of a pair `(A, B)` with `A` a nonzero frame sequence.
struct Pair {
    a: FrameGeometry,
    b: FrameGeometry,
    mu: f64,
    alpha: f64,
    beta: f64,
    /// `Delta(H_A, H_B)`, exactly zero when both are frames.
    big_delta: f64,
    frame_case: bool,
}

impl Pair {
    fn new(a: &OvSequence, b: &OvSequence, tol: &Tolerance) -> Result<Self> {
        let mu = mu(a, b)?;
        let ga = a.geometry(tol)?;
        ga.require_nonzero()?;
        let gb = b.geometry(tol)?;
        let frame_case = ga.report.is_frame && gb.report.is_frame;
        let big_delta =
            if frame_case { 0.0 } else { gap::gap_symmetric(&ga.subspace, &gb.subspace)? };
        Ok(Self {
            alpha: ga.report.lower_bound,
            beta: ga.report.bessel_bound,
            a: ga,
            b: gb,
            mu,
            big_delta,
            frame_case,
        })
    }

    fn sqrt_alpha(&self) -> f64 {
        self.alpha.sqrt()
    }

    /// `mu < sqrt(alpha)` and `Delta(H_A, H_B) < 1`.
    fn stable(&self, tol: &Tolerance) -> bool {
        self.mu < self.sqrt_alpha() && self.big_delta < 1.0 - tol.eq
    }

    fn require_stable(&self, tol: &Tolerance) -> Result<()> {
        if self.stable(tol) {
            Ok(())
        } else {
            Err(FrameError::NotApplicable(format!(
                "need mu < sqrt(alpha) and Delta < 1; mu = {}, sqrt(alpha) = {}, Delta = {}",
                self.mu,
                self.sqrt_alpha(),
                self.big_delta
            )))
        }
    }
}

pub fn perturbation_report(
    a: &OvSequence,
    b: &OvSequence,
    tol: &Tolerance,
) -> Result<PerturbReport> {
    let p = Pair::new(a, b, tol)?;
    let sa = p.sqrt_alpha();
    let delta_hahb = gap::gap_delta(&p.a.subspace, &p.b.subspace)?;
    let ran_a = linalg::range_basis(&p.a.analysis, tol)?;
    let ran_b = linalg::range_basis(&p.b.analysis, tol)?;
    let measured_range_gap = gap::gap_symmetric(&ran_a, &ran_b)?;
    let directed_range_gap = gap::gap_delta(&ran_a, &ran_b)?;
    let h_a_perp = p.a.subspace.complement(tol);
    let delta_b_aperp = gap::gap_delta(&p.b.subspace, &h_a_perp)?;
    let predicted_lower = (sa - p.mu).max(0.0).powi(2);
    let predicted_upper = (delta_b_aperp * p.beta.sqrt() + p.mu).powi(2);
    let range_gap_bound = if p.mu < sa { p.mu / (sa - p.mu) } else { f64::INFINITY };
    let measured_bounds = (p.b.report.lower_bound, p.b.report.bessel_bound);
    let applicable = p.stable(tol);

    let mut checks = vec![
        NamedCheck::new("delta(H_A, H_B) <= mu / sqrt(alpha)", delta_hahb, p.mu / sa, tol.eq),
        NamedCheck::new(
            "delta(ran T_A, ran T_B) <= mu / sqrt(alpha)",
            directed_range_gap,
            p.mu / sa,
            tol.eq,
        ),
    ];
    if applicable {
        let scale = tol.scaled(p.beta);
        checks.push(NamedCheck::new(
            "(sqrt(alpha) - mu)^2 <= lower bound of B",
            predicted_lower,
            measured_bounds.0,
            scale,
        ));
        checks.push(NamedCheck::new(
            "upper bound of B <= (delta(H_B, H_A^perp) sqrt(beta) + mu)^2",
            measured_bounds.1,
            predicted_upper,
            scale,
        ));
        checks.push(NamedCheck::new(
            "Delta(ran T_A, ran T_B) <= mu / (sqrt(alpha) - mu)",
            measured_range_gap,
            range_gap_bound,
            tol.eq,
        ));
        if p.a.report.is_frame {
            checks.push(NamedCheck::new(
                "B is a frame when A is",
                0.0,
                if p.b.report.is_frame { 0.0 } else { -1.0 },
                0.0,
            ));
        }
    }
    Ok(PerturbReport {
        mu: p.mu,
        alpha: p.alpha,
        beta: p.beta,
        delta_hahb,
        big_delta_hahb: p.big_delta,
        predicted_lower,
        predicted_upper,
        measured_bounds,
        range_gap_bound,
        measured_range_gap,
        applicable,
        checks,
    })
}

/// Bound on `||T_A~ - T_B~||` for canonical duals.
pub fn canonical_deviation_bound(mu: f64, alpha: f64, big_delta: f64) -> f64 {
    let sa = alpha.sqrt();
    (2.0 * mu + (2.0 * sa - mu) * big_delta) / (sa * (sa - mu))
}

/// Frame case of [`canonical_deviation_bound`].
pub fn canonical_deviation_bound_frame(mu: f64, alpha: f64) -> f64 {
    let sa = alpha.sqrt();
    2.0 * mu / (sa * (sa - mu))
}

/// Earlier bound for frames after substituting the perturbed frame bounds
/// `alpha_2 = (sqrt(alpha_1) - mu)^2`, `beta_2 = (sqrt(beta_1) + mu)^2`.
pub fn prior_work_bound(mu: f64, alpha: f64, beta: f64) -> f64 {
    let sa = alpha.sqrt();
    (alpha + 2.0 * beta + beta.sqrt() * mu) * mu / (alpha * (sa - mu).powi(2))
}

/// Deviation bound for the stable dual of a frame sequence.
pub fn stable_dual_lambda(mu: f64, alpha: f64, big_delta: f64, l_norm: f64) -> f64 {
    let sa = alpha.sqrt();
    (mu + (2.0 * sa - mu) * big_delta) / (sa * (sa - mu)) + (mu / (sa - mu) + big_delta) * l_norm
}

/// Frame case of [`stable_dual_lambda`].
pub fn stable_dual_lambda_frame(mu: f64, alpha: f64, l_norm: f64) -> f64 {
    let sa = alpha.sqrt();
    mu / (sa - mu) * (1.0 / sa + l_norm)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualDeviationReport {
    pub mu: f64,
    pub alpha: f64,
    #[serde(rename = "Delta")]
    pub big_delta: f64,
    pub measured: f64,
    pub bound: f64,
    pub lambda: Option<f64>,
    pub is_frame_case: bool,
    /// Earlier bound for comparison, frame case only.
    pub prior_work_bound: Option<f64>,
    pub holds: bool,
}

pub fn canonical_dual_deviation(
    a: &OvSequence,
    b: &OvSequence,
    tol: &Tolerance,
) -> Result<DualDeviationReport> {
    let p = Pair::new(a, b, tol)?;
    p.require_stable(tol)?;
    let measured = dist(&p.a.canonical_dual_analysis(), &p.b.canonical_dual_analysis());
    let bound = if p.frame_case {
        canonical_deviation_bound_frame(p.mu, p.alpha)
    } else {
        canonical_deviation_bound(p.mu, p.alpha, p.big_delta)
    };
    Ok(DualDeviationReport {
        mu: p.mu,
        alpha: p.alpha,
        big_delta: p.big_delta,
        measured,
        bound,
        lambda: None,
        is_frame_case: p.frame_case,
        prior_work_bound: p.frame_case.then(|| prior_work_bound(p.mu, p.alpha, p.beta)),
        holds: measured <= bound + tol.eq,
    })
}

/// `M = P_{ker T_B^H} T_{A~(L)} P_B`, the parameter of the stable dual.
fn stable_param(p: &Pair, l: &Matrix) -> Matrix {
    p.b.kernel_projection() * p.a.dual_analysis(l) * &p.b.projection
}

/// The dual `B~_L = B~(P_{ker T_B^H} T_{A~(L)} P_B)` of `B` and its
/// deviation from `A~(L)`.
pub fn stable_dual(
    a: &OvSequence,
    b: &OvSequence,
    l: &DualParam,
    tol: &Tolerance,
) -> Result<(OvSequence, DualDeviationReport)> {
    let p = Pair::new(a, b, tol)?;
    p.a.validate_param(l.matrix(), tol)?;
    p.require_stable(tol)?;
    let m = stable_param(&p, l.matrix());
    let t_dual = p.b.dual_analysis(&m);
    let dual = OvSequence::from_analysis(&t_dual, b.codomain_dim())?;
    let measured = dist(&t_dual, &p.a.dual_analysis(l.matrix()));
    let l_norm = norm(l.matrix());
    let lambda = if p.frame_case {
        stable_dual_lambda_frame(p.mu, p.alpha, l_norm)
    } else {
        stable_dual_lambda(p.mu, p.alpha, p.big_delta, l_norm)
    };
    let report = DualDeviationReport {
        mu: p.mu,
        alpha: p.alpha,
        big_delta: p.big_delta,
        measured,
        bound: lambda,
        lambda: Some(lambda),
        is_frame_case: p.frame_case,
        prior_work_bound: None,
        holds: measured <= lambda + tol.eq,
    };
    Ok((dual, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestApproxReport {
    pub trials: usize,
    /// `||T_{B~_L} - T_{A~(L)}||`.
    pub stable_deviation: f64,
    /// Smallest deviation among the sampled duals of `B`.
    pub min_sampled_deviation: f64,
    pub norm_violations: usize,
    pub pointwise_violations: usize,
    /// Largest residual of the affine HS-projection identity.
    pub projection_residual: f64,
    /// `||P_{D(B)} T_{A~(L)} - T_{B~_L}||`.
    pub projection_matches_stable: f64,
    pub holds: bool,
}

fn require_frames(p: &Pair) -> Result<()> {
    if p.frame_case {
        Ok(())
    } else {
        Err(FrameError::NotApplicable("both sequences must be frames for the whole space".into()))
    }
}

/// Compares `B~_L` against randomly sampled duals of `B`.
pub fn best_approx_check<R: Rng + ?Sized>(
    a: &OvSequence,
    b: &OvSequence,
    l: &DualParam,
    trials: usize,
    rng: &mut R,
    tol: &Tolerance,
) -> Result<BestApproxReport> {
    let p = Pair::new(a, b, tol)?;
    require_frames(&p)?;
    p.a.validate_param(l.matrix(), tol)?;
    p.require_stable(tol)?;
    let field = if [&p.a.analysis, &p.b.analysis, l.matrix()].iter().all(|m| linalg::is_real(m)) {
        Field::Real
    } else {
        Field::Complex
    };
    let n = p.a.domain_dim();
    let target = p.a.dual_analysis(l.matrix());
    let stable = p.b.dual_analysis(&stable_param(&p, l.matrix()));
    let stable_deviation = dist(&stable, &target);
    let scale = norm(&target).max(1.0);

    let mut min_sampled = f64::INFINITY;
    let mut norm_violations = 0;
    let mut pointwise_violations = 0;
    for _ in 0..trials {
        let size = rng.random_range(f64::EPSILON..=2.0);
        let m = random::dual_param(rng, &p.b, field, size);
        let other = p.b.dual_analysis(m.matrix());
        let deviation = dist(&other, &target);
        min_sampled = min_sampled.min(deviation);
        if deviation < stable_deviation - tol.scaled(scale) {
            norm_violations += 1;
        }
        let x = random::unit_vector(rng, n, field);
        let lhs = ((&other - &target) * &x).norm_squared();
        let rhs = ((&stable - &target) * &x).norm_squared();
        if lhs < rhs - tol.scaled(scale * scale) {
            pointwise_violations += 1;
        }
    }

    let basis = p.b.dual_param_basis();
    let canonical = p.b.canonical_dual_analysis();
    let kernel = p.b.kernel_projection();
    let mut projection_residual: f64 = 0.0;
    let (rows, cols) = p.b.analysis.shape();
    for _ in 0..trials.max(1) {
        let x = random::gaussian(rng, rows, cols, field);
        let y = &canonical + &kernel * &x;
        let dual_residual = dist(&(p.b.analysis.adjoint() * &y), &identity(n));
        let diff = &x - &y;
        let orthogonality = basis.iter().map(|e| hs_inner(&diff, e.matrix()).norm()).fold(0.0, f64::max);
        projection_residual = projection_residual.max(dual_residual).max(orthogonality);
    }
    let projection_matches_stable = dist(&(&canonical + &kernel * &target), &stable);
    let holds = norm_violations == 0
        && pointwise_violations == 0
        && projection_residual <= tol.eq
        && projection_matches_stable <= tol.eq;
    Ok(BestApproxReport {
        trials,
        stable_deviation,
        min_sampled_deviation: min_sampled,
        norm_violations,
        pointwise_violations,
        projection_residual,
        projection_matches_stable,
        holds,
    })
}

/// For `L = 0`: the canonical dual of `B` against the stable dual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalExcessReport {
    pub canonical_deviation: f64,
    pub stable_deviation: f64,
    /// Lower bound of `P_{ker T_B^H} T_A S_A^{-1}`.
    pub injectivity_constant: f64,
    pub ranges_intersect_trivially: bool,
    /// `canonical^2 >= stable^2 + c^2` up to tolerance.
    pub identity_holds: bool,
    pub strictly_farther: bool,
}

pub fn canonical_excess(a: &OvSequence, b: &OvSequence, tol: &Tolerance) -> Result<CanonicalExcessReport> {
    let p = Pair::new(a, b, tol)?;
    require_frames(&p)?;
    p.require_stable(tol)?;
    let (rows, cols) = p.a.analysis.shape();
    let zero = linalg::zeros(rows, cols);
    let target = p.a.canonical_dual_analysis();
    let canonical_deviation = dist(&p.b.canonical_dual_analysis(), &target);
    let stable_deviation = dist(&p.b.dual_analysis(&stable_param(&p, &zero)), &target);
    let leak = p.b.kernel_projection() * &target;
    let injectivity_constant = linalg::singular_values(&leak).last().copied().unwrap_or(0.0);
    let mut joined = linalg::zeros(rows, 2 * cols);
    joined.columns_mut(0, cols).copy_from(&p.a.analysis);
    joined.columns_mut(cols, cols).copy_from(&p.b.analysis);
    let ranges_intersect_trivially = linalg::rank(&joined, tol)
        == linalg::rank(&p.a.analysis, tol) + linalg::rank(&p.b.analysis, tol);
    let lhs = canonical_deviation.powi(2);
    let rhs = stable_deviation.powi(2) + injectivity_constant.powi(2);
    Ok(CanonicalExcessReport {
        canonical_deviation,
        stable_deviation,
        injectivity_constant,
        ranges_intersect_trivially,
        identity_holds: lhs >= rhs - tol.eq,
        strictly_farther: canonical_deviation > stable_deviation + tol.eq,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BijectionReport {
    pub dim_la: usize,
    pub dim_lb: usize,
    /// `max ||Q R X - X||` over a basis of the parameter space of `A`.
    pub qr_residual: f64,
    /// `max ||R Q Y - Y||` over a basis of the parameter space of `B`.
    pub rq_residual: f64,
    pub holds: bool,
}

/// The maps `R X = P_{ker T_B^H} X P_A P_B` and its inverse
/// `Q Y = (P_{ker T_B^H}|ker T_A^H)^{-1} Y (P_A|H_B)^{-1}` as matrices.
#[derive(Clone, Debug)]
pub struct DualBijection {
    kernel_b: Matrix,
    restrict: Matrix,
    kernel_inverse: Matrix,
    range_inverse: Matrix,
    /// Constant part of the affine map on parameters.
    offset: Matrix,
    pub report: BijectionReport,
}

impl DualBijection {
    /// Linear part `R`.
    pub fn forward(&self, x: &Matrix) -> Matrix {
        &self.kernel_b * x * &self.restrict
    }

    /// Linear part `Q`.
    pub fn inverse(&self, y: &Matrix) -> Matrix {
        &self.kernel_inverse * y * &self.range_inverse
    }

    /// Parameter `M` of the stable dual `B~_L` for a parameter `L` of `A`.
    pub fn stable_param(&self, l: &Matrix) -> Matrix {
        &self.offset + self.forward(l)
    }

    /// Parameter `L` of `A` whose stable dual has parameter `M`.
    pub fn preimage(&self, m: &Matrix) -> Matrix {
        self.inverse(&(m - &self.offset))
    }
}

/// `V (W^H V)^{-1} W^H`, the inverse of `P_W` restricted to `span V`,
/// composed with `P_W`.
fn oblique_inverse(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<Matrix> {
    if v.dim() != w.dim() {
        return Err(FrameError::NotApplicable(format!(
            "subspaces have dimensions {} and {}",
            v.dim(),
            w.dim()
        )));
    }
    let n = v.ambient_dim();
    if v.is_zero() {
        return Ok(linalg::zeros(n, n));
    }
    let cross = w.basis().adjoint() * v.basis();
    let inv = linalg::inverse(&cross, tol)
        .map_err(|_| FrameError::NotApplicable("restricted projection is not invertible".into()))?;
    Ok(v.basis() * inv * w.basis().adjoint())
}

/// Builds the bijection between the dual sets of `A` and `B` without
/// checking the size hypothesis on `mu`.
pub fn dual_bijection_unchecked(
    a: &OvSequence,
    b: &OvSequence,
    tol: &Tolerance,
) -> Result<DualBijection> {
    let p = Pair::new(a, b, tol)?;
    let kernel_b = p.b.kernel_projection();
    let restrict = &p.a.projection * &p.b.projection;
    let kernel_inverse = oblique_inverse(&p.a.synthesis_kernel, &p.b.synthesis_kernel, tol)?;
    let range_inverse = oblique_inverse(&p.b.subspace, &p.a.subspace, tol)?;
    let (rows, cols) = p.a.analysis.shape();
    let offset = stable_param(&p, &linalg::zeros(rows, cols));
    let mut bij = DualBijection {
        kernel_b,
        restrict,
        kernel_inverse,
        range_inverse,
        offset,
        report: BijectionReport {
            dim_la: 0,
            dim_lb: 0,
            qr_residual: 0.0,
            rq_residual: 0.0,
            holds: false,
        },
    };
    let basis_a = p.a.dual_param_basis();
    let basis_b = p.b.dual_param_basis();
    let qr = basis_a
        .iter()
        .map(|x| dist(&bij.inverse(&bij.forward(x.matrix())), x.matrix()))
        .fold(0.0, f64::max);
    let rq = basis_b
        .iter()
        .map(|y| dist(&bij.forward(&bij.inverse(y.matrix())), y.matrix()))
        .fold(0.0, f64::max);
    bij.report = BijectionReport {
        dim_la: basis_a.len(),
        dim_lb: basis_b.len(),
        qr_residual: qr,
        rq_residual: rq,
        holds: basis_a.len() == basis_b.len() && qr <= tol.eq && rq <= tol.eq,
    };
    Ok(bij)
}

/// Bijection `A~(L) -> B~_L`, for `mu < sqrt(alpha) / 2` and `Delta < 1`.
pub fn dual_bijection(a: &OvSequence, b: &OvSequence, tol: &Tolerance) -> Result<DualBijection> {
    let p = Pair::new(a, b, tol)?;
    if !(p.mu < 0.5 * p.sqrt_alpha() && p.big_delta < 1.0 - tol.eq) {
        return Err(FrameError::NotApplicable(format!(
            "need mu < sqrt(alpha)/2 and Delta < 1; mu = {}, sqrt(alpha) = {}, Delta = {}",
            p.mu,
            p.sqrt_alpha(),
            p.big_delta
        )));
    }
    dual_bijection_unchecked(a, b, tol)
}

/// `|| (T_{B~(M)} - T_{A~(L)}) - RHS ||` for the four-term expansion of the
/// difference of two dual analysis operators.
pub fn difference_decomposition_check(
    a: &OvSequence,
    b: &OvSequence,
    l: &Matrix,
    m: &Matrix,
    tol: &Tolerance,
) -> Result<f64> {
    let p = Pair::new(a, b, tol)?;
    p.b.require_nonzero()?;
    p.a.validate_param(l, tol)?;
    p.b.validate_param(m, tol)?;
    let n = p.a.domain_dim();
    let id = identity(n);
    let (pa, pb) = (&p.a.projection, &p.b.projection);
    let r = p.a.canonical_dual_analysis() + l;
    let tb_sb = p.b.canonical_dual_analysis();
    let lhs = p.b.dual_analysis(m) - p.a.dual_analysis(l);
    let rhs = &tb_sb * pb * (p.a.analysis.adjoint() - p.b.analysis.adjoint()) * &r * pa * pb
        + &tb_sb * pb * (&id - pa) * pb
        - &r * pa * (&id - pb)
        + (m - p.b.kernel_projection() * &r * pa) * pb;
    Ok(dist(&lhs, &rhs))
}

fn check_projection(p: &Matrix, tol: &Tolerance) -> Result<()> {
    linalg::check_finite(p)?;
    if p.nrows() != p.ncols()
        || !linalg::is_hermitian(p, tol)
        || dist(&(p * p), p) > tol.eq
    {
        return Err(FrameError::InvalidInput("not an orthogonal projection".into()));
    }
    Ok(())
}

/// `||P - Q|| <= sqrt(1/c^2 + 1/d^2) ||cP - dQ||`.
pub fn pq_projection_bound(
    p: &Matrix,
    q: &Matrix,
    c: f64,
    d: f64,
    tol: &Tolerance,
) -> Result<BoundCheck> {
    check_projection(p, tol)?;
    check_projection(q, tol)?;
    if p.shape() != q.shape() {
        return Err(FrameError::InvalidInput("projections have different shapes".into()));
    }
    if !(c > 0.0 && d > 0.0 && c.is_finite() && d.is_finite()) {
        return Err(FrameError::InvalidInput("weights must be positive".into()));
    }
    let combo = p * c64(c) - q * c64(d);
    Ok(BoundCheck {
        bound: (1.0 / (c * c) + 1.0 / (d * d)).sqrt() * norm(&combo),
        measured: dist(p, q),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RLambdaReport {
    pub lambda: f64,
    /// `||P_{AW} - R(lambda)^{-H} P_W A^H||`.
    pub projection_residual: f64,
    pub samples: usize,
    /// Samples violating the two-sided bound on `||R(lambda)^{-1} x||`.
    pub sandwich_violations: usize,
    /// Samples violating `d^{-1}||P_W A^H x|| <= ||P_{AW} x|| <= c^{-1}||P_W A^H x||`.
    pub projection_bound_violations: usize,
    pub holds: bool,
}

/// Checks the operator `R(lambda) = A P_W + lambda A^{-H} P_{W^perp}`:
/// invertibility, the projection formula and the norm estimates.
#[allow(clippy::too_many_arguments)]
pub fn r_lambda_suite<R: Rng + ?Sized>(
    a: &Matrix,
    w: &Subspace,
    lambda: f64,
    c: f64,
    d: f64,
    samples: usize,
    rng: &mut R,
    tol: &Tolerance,
) -> Result<RLambdaReport> {
    linalg::check_finite(a)?;
    let n = a.nrows();
    if a.ncols() != n || w.ambient_dim() != n {
        return Err(FrameError::InvalidInput("A must be square and act on the ambient space of W".into()));
    }
    let s = linalg::singular_values(a);
    if s.is_empty() || s[n - 1] <= tol.rank * s[0].max(1.0) {
        return Err(FrameError::InvalidInput("A is not invertible".into()));
    }
    if !(lambda > 0.0 && c > 0.0 && d > 0.0) {
        return Err(FrameError::InvalidInput("lambda, c and d must be positive".into()));
    }
    if c > s[n - 1] + tol.eq || d < s[0] - tol.eq {
        return Err(FrameError::InvalidInput(format!(
            "[{c}, {d}] does not bracket the singular values [{}, {}]",
            s[n - 1],
            s[0]
        )));
    }
    let a_inv = linalg::inverse(a, tol)?;
    let pw = w.projection();
    let pw_perp = identity(n) - &pw;
    let r = a * &pw + a_inv.adjoint() * &pw_perp * c64(lambda);
    let r_inv = linalg::inverse(&r, tol)
        .map_err(|_| FrameError::InvalidInput("R(lambda) is singular".into()))?;
    let p_aw = w.image(a, tol).projection();
    let projection_residual = dist(&p_aw, &(r_inv.adjoint() * &pw * a.adjoint()));

    let field = if linalg::is_real(a) && linalg::is_real(w.basis()) { Field::Real } else { Field::Complex };
    let ratio = c * d / lambda;
    let (lo, hi) = (ratio.min(1.0) / d, ratio.max(1.0) / c);
    let mut sandwich_violations = 0;
    let mut projection_bound_violations = 0;
    let slack = tol.eq;
    for _ in 0..samples {
        let x = random::unit_vector(rng, n, field);
        let y = (&r_inv * &x).norm();
        if y < lo - slack || y > hi + slack {
            sandwich_violations += 1;
        }
        let base = (&pw * a.adjoint() * &x).norm();
        let z = (&p_aw * &x).norm();
        if z < base / d - slack || z > base / c + slack {
            projection_bound_violations += 1;
        }
    }
    Ok(RLambdaReport {
        lambda,
        projection_residual,
        samples,
        sandwich_violations,
        projection_bound_violations,
        holds: projection_residual <= tol.eq && sandwich_violations == 0 && projection_bound_violations == 0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformedBoundsReport {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub measured_lower: f64,
    pub measured_upper: f64,
    pub predicted_lower: f64,
    pub predicted_upper: f64,
    pub holds: bool,
}

/// Bounds of `((A W_i, c_i))` against `[alpha gamma^{-2}, beta gamma^2]`,
/// `gamma = ||A|| ||A^{-1}||`.
pub fn transformed_fusion_bounds(
    w: &FusionSequence,
    a: &Matrix,
    tol: &Tolerance,
) -> Result<(FusionSequence, TransformedBoundsReport)> {
    let n = w.ambient_dim();
    if a.shape() != (n, n) {
        return Err(FrameError::InvalidInput("A must act on the ambient space".into()));
    }
    linalg::check_finite(a)?;
    let a_inv = linalg::inverse(a, tol)?;
    let report = w.classify(tol);
    if !report.is_frame {
        return Err(FrameError::NotAFrame("W does not span the space".into()));
    }
    let pairs = w
        .pairs()
        .iter()
        .map(|p| {
            if p.is_degenerate() {
                p.clone()
            } else {
                FusionPair::new(p.subspace.image(a, tol), p.weight)
            }
        })
        .collect();
    let moved = FusionSequence::new(n, pairs)?;
    let moved_report = moved.classify(tol);
    let gamma = norm(a) * norm(&a_inv);
    let (alpha, beta) = (report.lower_bound, report.bessel_bound);
    let predicted_lower = alpha / (gamma * gamma);
    let predicted_upper = beta * gamma * gamma;
    let slack = tol.scaled(predicted_upper);
    let holds = moved_report.is_frame
        && moved_report.lower_bound >= predicted_lower - slack
        && moved_report.bessel_bound <= predicted_upper + slack;
    Ok((
        moved,
        TransformedBoundsReport {
            alpha,
            beta,
            gamma,
            measured_lower: moved_report.lower_bound,
            measured_upper: moved_report.bessel_bound,
            predicted_lower,
            predicted_upper,
            holds,
        },
    ))
}

/// Constant `C` of the fusion frame stability estimate.
pub fn fusion_stability_constant(alpha: f64, beta: f64, mu: f64, tau: f64) -> f64 {
    let sa = alpha.sqrt();
    let c = 2.0 * beta.sqrt() + mu;
    let d = 1.0 / (sa - mu);
    let front = (c * c + d * d) / alpha;
    let first = (1.0 + (1.0 / alpha + beta).powi(2)) / sa * (2f64.sqrt() / tau + c * d * d);
    let second = d * d * (1.0 + c * c * d * d);
    front * (first + second)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionStabilityReport {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub tau: f64,
    pub c: f64,
    pub d: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub measured: f64,
    pub applicable: bool,
    /// `|c_i - d_i| <= mu` for every index.
    pub weights_within_mu: bool,
    pub holds: bool,
}

/// Distance between the canonical fusion frame duals of `W` and `V` against
/// `C mu`.
pub fn fusion_stability(
    w: &FusionSequence,
    v: &FusionSequence,
    tol: &Tolerance,
) -> Result<FusionStabilityReport> {
    if w.ambient_dim() != v.ambient_dim() || w.len() != v.len() {
        return Err(FrameError::InvalidInput("fusion sequences have different shapes".into()));
    }
    let report = w.classify(tol);
    if !report.is_frame {
        return Err(FrameError::NotAFrame("W does not span the space".into()));
    }
    let (alpha, beta) = (report.lower_bound, report.bessel_bound);
    let mu = dist(&w.to_ov().analysis_operator(), &v.to_ov().analysis_operator());
    let mut tau = f64::INFINITY;
    for (i, (pw, pv)) in w.pairs().iter().zip(v.pairs()).enumerate() {
        match (pw.is_degenerate(), pv.is_degenerate()) {
            (true, true) => {}
            (false, false) => tau = tau.min(pw.weight).min(pv.weight),
            _ => {
                return Err(FrameError::NotApplicable(format!(
                    "index {i} is degenerate in only one sequence"
                )))
            }
        }
    }
    if !tau.is_finite() || tau <= 0.0 {
        return Err(FrameError::NotApplicable("weights are not bounded below".into()));
    }
    let sa = alpha.sqrt();
    if mu >= sa {
        return Err(FrameError::NotApplicable(format!("mu = {mu} >= sqrt(alpha) = {sa}")));
    }
    let weights_within_mu = w
        .pairs()
        .iter()
        .zip(v.pairs())
        .all(|(a, b)| (a.weight - b.weight).abs() <= mu + tol.eq);
    let dual_w = fusion::canonical_ffdual(w, tol)?;
    let dual_v = fusion::canonical_ffdual(v, tol)?;
    let measured = dist(&dual_w.to_ov().analysis_operator(), &dual_v.to_ov().analysis_operator());
    let big_c = fusion_stability_constant(alpha, beta, mu, tau);
    Ok(FusionStabilityReport {
        mu,
        alpha,
        beta,
        tau,
        c: 2.0 * beta.sqrt() + mu,
        d: 1.0 / (sa - mu),
        big_c,
        measured,
        applicable: true,
        weights_within_mu,
        holds: weights_within_mu && measured <= big_c * mu + tol.eq,
    })
}
