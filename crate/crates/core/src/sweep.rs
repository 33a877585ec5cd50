//! Seeded randomized suites over the duality and perturbation results.
//!
//! Trial `i` of a suite draws from `random::trial_rng(seed, i)`, so results
//! do not depend on scheduling. With the `parallel` feature trials run on
//! the rayon pool.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fusion::{self, FusionPair, FusionSequence, QWitness};
use crate::linalg::{self, c64, dist, identity, norm, Matrix, Subspace, Tolerance};
use crate::ovframe::{DualParam, OvSequence};
use crate::perturb;
use crate::random::{self, Field};

/// Outcome of a single trial. `margin` is `measured - bound` for the
/// tightest check of the trial, so it is nonpositive on success.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Pass { margin: f64 },
    Fail { margin: f64, note: String },
    Skipped,
}

impl Outcome {
    /// Folds a list of `(name, measured, bound)` checks into one outcome.
    pub fn from_checks(checks: &[(&str, f64, f64)]) -> Self {
        let mut margin = f64::NEG_INFINITY;
        let mut failed = Vec::new();
        for (name, measured, bound) in checks {
            let m = measured - bound;
            margin = margin.max(m);
            if m.is_nan() || m > 0.0 {
                failed.push(format!("{name}: {measured:e} > {bound:e}"));
            }
        }
        if failed.is_empty() {
            Outcome::Pass { margin }
        } else {
            Outcome::Fail { margin, note: failed.join("; ") }
        }
    }

    fn from_result(r: Result<Outcome>) -> Self {
        r.unwrap_or_else(|e| Outcome::Fail { margin: f64::INFINITY, note: e.to_string() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub skipped: usize,
    pub violations: usize,
    pub worst_margin: f64,
    /// First few failure descriptions, prefixed by the trial index.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn from_outcomes(name: &str, outcomes: &[Outcome]) -> Self {
        let mut report = SuiteReport {
            name: name.into(),
            trials: outcomes.len(),
            skipped: 0,
            violations: 0,
            worst_margin: f64::NEG_INFINITY,
            failures: Vec::new(),
        };
        for (i, o) in outcomes.iter().enumerate() {
            match o {
                Outcome::Pass { margin } => report.worst_margin = report.worst_margin.max(*margin),
                Outcome::Fail { margin, note } => {
                    report.violations += 1;
                    report.worst_margin = report.worst_margin.max(*margin);
                    if report.failures.len() < 5 {
                        report.failures.push(format!("trial {i}: {note}"));
                    }
                }
                Outcome::Skipped => report.skipped += 1,
            }
        }
        report
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.skipped < self.trials
    }
}

/// Runs `f` on trials `0..trials`, in parallel when the feature is enabled.
pub fn run_trials<T, F>(seed: u64, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials)
            .into_par_iter()
            .map(|i| f(&mut random::trial_rng(seed, i as u64), i))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_trials_sequential(seed, trials, f)
    }
}

/// Sequential counterpart of [`run_trials`] with identical results.
pub fn run_trials_sequential<T, F>(seed: u64, trials: usize, f: F) -> Vec<T>
where
    F: Fn(&mut ChaCha8Rng, usize) -> T,
{
    (0..trials).map(|i| f(&mut random::trial_rng(seed, i as u64), i)).collect()
}

fn suite<F>(name: &str, seed: u64, trials: usize, f: F) -> SuiteReport
where
    F: Fn(&mut ChaCha8Rng) -> Result<Outcome> + Sync + Send,
{
    let outcomes = run_trials(seed, trials, |rng, _| Outcome::from_result(f(rng)));
    SuiteReport::from_outcomes(name, &outcomes)
}

/// Suite tolerances, kept apart from the decision thresholds in [`Tolerance`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub tol: Tolerance,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 42, tol: Tolerance::default() }
    }
}

fn random_frame_sequence<R: Rng + ?Sized>(rng: &mut R, frame: bool) -> (OvSequence, Field) {
    let field = Field::pick(rng);
    let (n, k, m, r) = random::shape(rng, 6, 6, 8, frame);
    (random::frame_sequence(rng, n, k, m, r, field), field)
}

/// Dual parameterization identities and canonical dual bounds.
pub fn duality_identities(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("duality identities", cfg.seed, trials, move |rng| {
        let frame = rng.random_bool(0.5);
        let (a, field) = random_frame_sequence(rng, frame);
        let g = a.geometry(&tol)?;
        let size = rng.random_range(0.0..=2.0);
        let l = random::dual_param(rng, &g, field, size);
        let dual = g.dual_analysis(l.matrix());
        let scale = norm(&dual).max(1.0) * norm(&g.analysis).max(1.0);
        let recon = dist(&(dual.adjoint() * &g.analysis), &g.projection) / scale;
        let s_dual = dual.adjoint() * &dual;
        let predicted = (&g.restricted_inverse + l.matrix().adjoint() * l.matrix()) * &g.projection;
        let frame_op = dist(&s_dual, &predicted) / norm(&s_dual).max(1.0);
        let canonical = a.canonical_dual(&tol)?.classify(&tol);
        let (alpha, beta) = (g.report.lower_bound, g.report.bessel_bound);
        let lower = (canonical.lower_bound - 1.0 / beta).abs() / (1.0 / beta).max(1.0);
        let upper = (canonical.bessel_bound - 1.0 / alpha).abs() / (1.0 / alpha).max(1.0);
        Ok(Outcome::from_checks(&[
            ("T_dual^H T_A = P_A", recon, 1e-9),
            ("S_dual formula", frame_op, 1e-9),
            ("canonical dual lower bound 1/beta", lower, 1e-8),
            ("canonical dual upper bound 1/alpha", upper, 1e-8),
        ]))
    })
}

/// Draws `B` near `A` with `mu` a fraction in `range` of `sqrt(alpha)` and
/// `Delta(H_A, H_B) < 1`.
fn perturbed_pair<R: Rng + ?Sized>(
    rng: &mut R,
    frame: bool,
    range: (f64, f64),
    tol: &Tolerance,
) -> Option<(OvSequence, OvSequence, Field)> {
    for _ in 0..20 {
        let (a, field) = random_frame_sequence(rng, frame);
        let alpha = a.classify(tol).lower_bound;
        let target = rng.random_range(range.0..=range.1) * alpha.sqrt();
        let b = random::perturbed(rng, &a, target, field, tol);
        let ha = a.frame_subspace(tol);
        let hb = b.frame_subspace(tol);
        if crate::gap::gap_symmetric(&ha, &hb).ok()? < 1.0 - tol.eq {
            return Some((a, b, field));
        }
    }
    None
}

/// All perturbation inequalities on random pairs with `mu <= 0.3 sqrt(alpha)`.
pub fn perturbation_bounds(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("perturbation bounds", cfg.seed, trials, move |rng| {
        let frame = rng.random_bool(0.5);
        let Some((a, b, field)) = perturbed_pair(rng, frame, (0.01, 0.3), &tol) else {
            return Ok(Outcome::Skipped);
        };
        let report = perturb::perturbation_report(&a, &b, &tol)?;
        let mut checks: Vec<(String, f64, f64)> = report
            .checks
            .iter()
            .map(|c| (c.name.clone(), if c.holds { 0.0 } else { c.lhs - c.rhs }, 0.0))
            .collect();
        let canonical = perturb::canonical_dual_deviation(&a, &b, &tol)?;
        checks.push(("canonical dual deviation".into(), canonical.measured, canonical.bound + 1e-8));
        let g = a.geometry(&tol)?;
        let size = rng.random_range(0.0..=2.0);
        let l = random::dual_param(rng, &g, field, size);
        let (dual, stable) = perturb::stable_dual(&a, &b, &l, &tol)?;
        checks.push(("stable dual deviation".into(), stable.measured, stable.bound + 1e-8));
        let is_dual = b.is_dual(&dual, &tol)?;
        checks.push(("stable dual is a dual of B".into(), if is_dual { 0.0 } else { 1.0 }, 0.0));
        let named: Vec<(&str, f64, f64)> =
            checks.iter().map(|(n, m, b)| (n.as_str(), *m, *b)).collect();
        if !report.applicable {
            return Ok(Outcome::Fail { margin: f64::INFINITY, note: "pair not applicable".into() });
        }
        Ok(Outcome::from_checks(&named))
    })
}

/// Stable dual versus sampled duals, and the HS projection identity.
pub fn best_approximation(cfg: &SuiteConfig, trials: usize, samples: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("best approximation", cfg.seed, trials, move |rng| {
        let Some((a, b, field)) = perturbed_pair(rng, true, (0.01, 0.3), &tol) else {
            return Ok(Outcome::Skipped);
        };
        let g = a.geometry(&tol)?;
        let size = rng.random_range(0.0..=2.0);
        let l = random::dual_param(rng, &g, field, size);
        let r = perturb::best_approx_check(&a, &b, &l, samples, rng, &tol)?;
        Ok(Outcome::from_checks(&[
            ("sampled dual closer than stable dual", (r.norm_violations + r.pointwise_violations) as f64, 0.0),
            ("HS projection identity", r.projection_residual, 1e-9),
            ("projection equals stable dual", r.projection_matches_stable, 1e-9),
        ]))
    })
}

/// Searches random frame pairs with `ran T_A` and `ran T_B` intersecting
/// trivially; counts instances where the canonical dual of `B` is strictly
/// farther from the canonical dual of `A` than the stable dual.
pub fn canonical_not_best(cfg: &SuiteConfig, trials: usize) -> (usize, SuiteReport) {
    let tol = cfg.tol;
    let outcomes = run_trials(cfg.seed, trials, |rng, _| {
        let field = Field::pick(rng);
        let n: usize = rng.random_range(1..=3);
        let k: usize = rng.random_range(1..=2);
        let m = rng.random_range((2 * n).div_ceil(k)..=8);
        let a = random::frame(rng, n, k, m, field);
        let alpha = a.classify(&tol).lower_bound;
        let target = rng.random_range(0.05..=0.3) * alpha.sqrt();
        let b = random::perturbed(rng, &a, target, field, &tol);
        match perturb::canonical_excess(&a, &b, &tol) {
            Ok(r) => {
                let witness = r.ranges_intersect_trivially && r.strictly_farther;
                let outcome = Outcome::from_checks(&[(
                    "canonical^2 >= stable^2 + c^2",
                    if r.identity_holds { 0.0 } else { 1.0 },
                    0.0,
                )]);
                (witness, outcome)
            }
            Err(e) => (false, Outcome::Fail { margin: f64::INFINITY, note: e.to_string() }),
        }
    });
    let witnesses = outcomes.iter().filter(|(w, _)| *w).count();
    let list: Vec<Outcome> = outcomes.into_iter().map(|(_, o)| o).collect();
    (witnesses, SuiteReport::from_outcomes("canonical dual not best", &list))
}

/// `Q R = id` and `R Q = id` on random pairs with `mu < sqrt(alpha) / 2`.
pub fn dual_bijection(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("dual bijection", cfg.seed, trials, move |rng| {
        let frame = rng.random_bool(0.5);
        let Some((a, b, _)) = perturbed_pair(rng, frame, (0.01, 0.45), &tol) else {
            return Ok(Outcome::Skipped);
        };
        let r = perturb::dual_bijection(&a, &b, &tol)?.report;
        Ok(Outcome::from_checks(&[
            ("Q R = id", r.qr_residual, 1e-9),
            ("R Q = id", r.rq_residual, 1e-9),
            ("parameter dimensions agree", (r.dim_la as f64 - r.dim_lb as f64).abs(), 0.0),
        ]))
    })
}

/// Four-term expansion of `T_{B~(M)} - T_{A~(L)}`.
pub fn difference_decomposition(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("difference decomposition", cfg.seed, trials, move |rng| {
        let frame = rng.random_bool(0.5);
        let (a, field) = random_frame_sequence(rng, frame);
        let alpha = a.classify(&tol).lower_bound;
        let target = rng.random_range(0.0..=0.5) * alpha.sqrt();
        let b = random::perturbed(rng, &a, target, field, &tol);
        let ga = a.geometry(&tol)?;
        let gb = b.geometry(&tol)?;
        let sl = rng.random_range(0.0..=2.0);
        let sm = rng.random_range(0.0..=2.0);
        let l = random::dual_param(rng, &ga, field, sl);
        let m = random::dual_param(rng, &gb, field, sm);
        let residual = perturb::difference_decomposition_check(&a, &b, l.matrix(), m.matrix(), &tol)?;
        Ok(Outcome::from_checks(&[("four-term identity", residual, 1e-10)]))
    })
}

/// Our canonical dual bound against the earlier bound on random frames.
pub fn bound_sharpness(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("bound sharpness", cfg.seed, trials, move |rng| {
        let Some((a, b, _)) = perturbed_pair(rng, true, (0.01, 0.3), &tol) else {
            return Ok(Outcome::Skipped);
        };
        let r = perturb::canonical_dual_deviation(&a, &b, &tol)?;
        let prior = r.prior_work_bound.unwrap_or(f64::NAN);
        // strict inequality: the margin must be negative
        let outcome = if r.bound < prior {
            Outcome::Pass { margin: r.bound - prior }
        } else {
            Outcome::Fail {
                margin: r.bound - prior,
                note: format!("bound {} is not below {}", r.bound, prior),
            }
        };
        Ok(outcome)
    })
}

fn random_fusion<R: Rng + ?Sized>(rng: &mut R, tol: &Tolerance) -> (FusionSequence, Field) {
    let field = Field::pick(rng);
    let n = rng.random_range(1..=5);
    let m = rng.random_range(1..=8).max(1);
    (random::fusion_frame(rng, n, m, field, tol), field)
}

/// Random `L` whose range lies in `ker T_W^H`.
fn random_kernel_param<R: Rng + ?Sized>(
    rng: &mut R,
    w: &FusionSequence,
    field: Field,
    scale: f64,
    tol: &Tolerance,
) -> Result<Matrix> {
    let g = w.geometry(tol)?;
    let k = g.synthesis_kernel.basis();
    let x = random::gaussian(rng, k.ncols(), w.ambient_dim(), field);
    let l = k * x;
    let size = norm(&l);
    Ok(if size > 0.0 { l * c64(scale / size) } else { l })
}

/// Canonical fusion frame duals verify against their witnesses.
pub fn canonical_ffdual(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("canonical FF-dual", cfg.seed, trials, move |rng| {
        let (w, _) = random_fusion(rng, &tol);
        let (v, q) = fusion::canonical_ffdual_with_witness(&w, &tol)?;
        let check = fusion::ffdual_verify(&v, &w, &q, &tol)?;
        if check.is_dual {
            Ok(Outcome::Pass { margin: check.reconstruction_residual - tol.eq })
        } else {
            Ok(pass_fail(false, &check.diagnostics.join("; ")))
        }
    })
}

fn pass_fail(ok: bool, note: &str) -> Outcome {
    if ok {
        Outcome::Pass { margin: 0.0 }
    } else {
        Outcome::Fail { margin: f64::INFINITY, note: note.into() }
    }
}

/// Per-desideratum results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesiderataReport {
    pub d1: SuiteReport,
    pub d2a: SuiteReport,
    pub d2b: SuiteReport,
    pub d3: SuiteReport,
    pub d4: SuiteReport,
}

impl DesiderataReport {
    pub fn passed(&self) -> bool {
        [&self.d1, &self.d2a, &self.d2b, &self.d3, &self.d4].iter().all(|r| r.passed())
    }
}

/// Lifts a pair of dual vector frames to a fusion frame dual pair.
pub fn lift_vector_duals(
    phi: &[Matrix],
    psi: &[Matrix],
    tol: &Tolerance,
) -> Result<(FusionSequence, FusionSequence, QWitness)> {
    let n = phi.first().map_or(0, |p| p.nrows());
    let mut w_pairs = Vec::new();
    let mut v_pairs = Vec::new();
    let mut q = Vec::new();
    for (f, g) in phi.iter().zip(psi) {
        let (cf, cg) = (f.norm(), g.norm());
        let cut = tol.rank;
        if cf <= cut || cg <= cut {
            let wp = if cf <= cut {
                FusionPair::new(Subspace::zero(n), 0.0)
            } else {
                FusionPair::new(Subspace::span(f, tol)?, cf)
            };
            let vp = if cg <= cut {
                FusionPair::new(Subspace::zero(n), 0.0)
            } else {
                FusionPair::new(Subspace::span(g, tol)?, cg)
            };
            w_pairs.push(wp);
            v_pairs.push(vp);
            q.push(linalg::zeros(n, n));
        } else {
            w_pairs.push(FusionPair::new(Subspace::span(f, tol)?, cf));
            v_pairs.push(FusionPair::new(Subspace::span(g, tol)?, cg));
            q.push(g * f.adjoint() * c64(1.0 / (cf * cg)));
        }
    }
    Ok((FusionSequence::new(n, v_pairs)?, FusionSequence::new(n, w_pairs)?, QWitness { q }))
}

/// Recovers dual vector frames `(phi_i, psi_i)` from a fusion frame dual of
/// one-dimensional subspaces: `phi_i = c_i e_i` with `e_i` the stored unit
/// basis vector of `W_i` and `psi_i = c_i^{-1} d_i Q_i phi_i`.
pub fn extract_vector_duals(
    v: &FusionSequence,
    w: &FusionSequence,
    q: &QWitness,
) -> (Vec<Matrix>, Vec<Matrix>) {
    let n = w.ambient_dim();
    let mut phi = Vec::new();
    let mut psi = Vec::new();
    for ((pw, pv), qi) in w.pairs().iter().zip(v.pairs()).zip(&q.q) {
        if pw.is_degenerate() {
            phi.push(linalg::zeros(n, 1));
            psi.push(linalg::zeros(n, 1));
            continue;
        }
        let f = pw.subspace.basis().columns(0, 1) * c64(pw.weight);
        let g = qi * &f * c64(pv.weight / pw.weight);
        phi.push(f);
        psi.push(g);
    }
    (phi, psi)
}

/// Desiderata D1 to D4 on random instances.
pub fn desiderata(cfg: &SuiteConfig, trials: usize) -> DesiderataReport {
    let tol = cfg.tol;
    let d1 = suite("D1 reconstruction", cfg.seed, trials, move |rng| {
        let (w, field) = random_fusion(rng, &tol);
        let size = rng.random_range(0.0..=2.0);
        let l = random_kernel_param(rng, &w, field, size, &tol)?;
        let (v, q) = fusion::alternate_ffdual(&w, &l, &tol)?;
        let x = random::unit_vector(rng, w.ambient_dim(), field);
        let rebuilt = v.pairs().iter().zip(w.pairs()).zip(&q.q).fold(
            linalg::zeros(w.ambient_dim(), 1),
            |acc, ((pv, pw), qi)| acc + qi * pw.subspace.projection() * &x * c64(pv.weight * pw.weight),
        );
        let check = fusion::ffdual_verify(&v, &w, &q, &tol)?;
        Ok(Outcome::from_checks(&[
            ("x = sum c_i d_i Q_i P_W_i x", (rebuilt - x).norm(), 1e-8),
            ("alternate dual verifies", if check.is_dual { 0.0 } else { 1.0 }, 0.0),
        ]))
    });
    let lifted = move |rng: &mut ChaCha8Rng| -> Result<_> {
        let field = Field::pick(rng);
        let n = rng.random_range(1..=5);
        let m = rng.random_range(n..=n + 3);
        let a = random::frame(rng, n, 1, m, field);
        let g = a.geometry(&tol)?;
        let size = rng.random_range(0.0..=2.0);
        let l = random::dual_param(rng, &g, field, size);
        let dual = a.make_dual(&l, &tol)?;
        let phi = a.to_vectors(&tol)?;
        let psi = dual.to_vectors(&tol)?;
        let (v, w, q) = lift_vector_duals(&phi, &psi, &tol)?;
        Ok((v, w, q))
    };
    let d2a = suite("D2a vector frame lift", cfg.seed, trials, move |rng| {
        let (v, w, q) = lifted(rng)?;
        let check = fusion::ffdual_verify(&v, &w, &q, &tol)?;
        Ok(pass_fail(check.is_dual, &check.diagnostics.join("; ")))
    });
    let d2b = suite("D2b vector frame extraction", cfg.seed, trials, move |rng| {
        let (v, w, q) = lifted(rng)?;
        let (phi, psi) = extract_vector_duals(&v, &w, &q);
        let a = OvSequence::from_vectors(&phi)?;
        let d = OvSequence::from_vectors(&psi)?;
        let norms = psi
            .iter()
            .zip(v.pairs())
            .map(|(g, p)| (g.norm() - p.weight).abs())
            .fold(0.0, f64::max);
        let recon = dist(&(d.analysis_operator().adjoint() * a.analysis_operator()), &identity(w.ambient_dim()));
        Ok(Outcome::from_checks(&[("||psi_i|| = d_i", norms, 1e-8), ("T_psi^H T_phi = I", recon, 1e-8)]))
    });
    let d3 = suite("D3 symmetry", cfg.seed, trials, move |rng| {
        let (w, field) = random_fusion(rng, &tol);
        let size = rng.random_range(0.0..=2.0);
        let l = random_kernel_param(rng, &w, field, size, &tol)?;
        let (v, q) = fusion::alternate_ffdual(&w, &l, &tol)?;
        let is_frame = v.classify(&tol).is_frame;
        let reversed = fusion::ffdual_verify(&w, &v, &q.adjoint(), &tol)?;
        Ok(pass_fail(is_frame && reversed.is_dual, &reversed.diagnostics.join("; ")))
    });
    let d4 = suite("D4 canonical dual", cfg.seed, trials, move |rng| {
        let (w, _) = random_fusion(rng, &tol);
        let (v, q) = fusion::canonical_ffdual_with_witness(&w, &tol)?;
        let check = fusion::ffdual_verify(&v, &w, &q, &tol)?;
        let ov = v
            .pairs()
            .iter()
            .zip(&q.q)
            .map(|(p, qi)| qi.adjoint() * c64(p.weight))
            .collect::<Vec<_>>();
        let n = w.ambient_dim();
        let ov = OvSequence::new(n, n, ov)?;
        let ov_dual = w.to_ov().is_dual(&ov, &tol)?;
        Ok(pass_fail(check.is_dual && ov_dual, &check.diagnostics.join("; ")))
    });
    DesiderataReport { d1, d2a, d2b, d3, d4 }
}

/// Projection difference estimate on random projections and weights.
pub fn pq_bound(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("projection difference bound", cfg.seed, trials, move |rng| {
        let field = Field::pick(rng);
        let n = rng.random_range(1..=6);
        let (dp, dq) = (rng.random_range(0..=n), rng.random_range(0..=n));
        let p = random::subspace(rng, n, dp, field, &tol).projection();
        let q = random::subspace(rng, n, dq, field, &tol).projection();
        let c = rng.random_range(0.1..=3.0);
        let d = rng.random_range(0.1..=3.0);
        let r = perturb::pq_projection_bound(&p, &q, c, d, &tol)?;
        Ok(Outcome::from_checks(&[("||P - Q||", r.measured, r.bound + 1e-8)]))
    })
}

/// `R(lambda)` identities for random invertible `A`, subspaces and `lambda`.
pub fn r_lambda(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("R(lambda) identities", cfg.seed, trials, move |rng| {
        let field = Field::pick(rng);
        let n = rng.random_range(1..=6);
        let a = random::invertible(rng, n, field, 100.0);
        let dim = rng.random_range(0..=n);
        let w = random::subspace(rng, n, dim, field, &tol);
        let s = linalg::singular_values(&a);
        let lambda = rng.random_range(0.1..=10.0);
        let r = perturb::r_lambda_suite(&a, &w, lambda, s[n - 1], s[0], 20, rng, &tol)?;
        Ok(Outcome::from_checks(&[
            ("P_AW formula", r.projection_residual, 1e-8),
            ("norm sandwich", r.sandwich_violations as f64, 0.0),
            ("P_AW bounds", r.projection_bound_violations as f64, 0.0),
        ]))
    })
}

/// Bounds of `((A W_i, c_i))` on random fusion frames and invertible `A`.
pub fn transformed_bounds(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("transformed fusion frame bounds", cfg.seed, trials, move |rng| {
        let (w, field) = random_fusion(rng, &tol);
        let a = random::invertible(rng, w.ambient_dim(), field, 50.0);
        let (_, r) = perturb::transformed_fusion_bounds(&w, &a, &tol)?;
        let slack = 1e-8 * r.predicted_upper.max(1.0);
        Ok(Outcome::from_checks(&[
            ("lower bound", r.predicted_lower, r.measured_lower + slack),
            ("upper bound", r.measured_upper, r.predicted_upper + slack),
        ]))
    })
}

/// Canonical FF-dual stability with `mu` up to `0.3 sqrt(alpha)`.
pub fn fusion_stability(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    let tol = cfg.tol;
    suite("fusion frame stability", cfg.seed, trials, move |rng| {
        let (w, field) = random_fusion(rng, &tol);
        let alpha = w.classify(&tol).lower_bound;
        let cap = 0.3 * alpha.sqrt();
        let mut eta = rng.random_range(0.0..=1.0) * cap;
        let v = loop {
            let v = random::perturbed_fusion(rng, &w, eta, field, &tol);
            let mu = dist(&w.to_ov().analysis_operator(), &v.to_ov().analysis_operator());
            if mu <= cap {
                break v;
            }
            eta *= 0.5;
        };
        let r = perturb::fusion_stability(&w, &v, &tol)?;
        Ok(Outcome::from_checks(&[
            ("||T_W~ - T_V~|| <= C mu", r.measured, r.big_c * r.mu + 1e-8),
            ("|c_i - d_i| <= mu", if r.weights_within_mu { 0.0 } else { 1.0 }, 0.0),
        ]))
    })
}

/// `mu` is symmetric, vanishes on the diagonal and satisfies the triangle
/// inequality.
pub fn mu_metric(cfg: &SuiteConfig, trials: usize) -> SuiteReport {
    suite("mu is a metric", cfg.seed, trials, move |rng| {
        let field = Field::pick(rng);
        let (n, k, m, _) = random::shape(rng, 5, 3, 5, false);
        let seq = |rng: &mut ChaCha8Rng| {
            OvSequence::from_analysis(&random::gaussian(rng, m * k, n, field), k)
        };
        let (a, b, c) = (seq(rng)?, seq(rng)?, seq(rng)?);
        let ab = perturb::mu(&a, &b)?;
        Ok(Outcome::from_checks(&[
            ("symmetry", (ab - perturb::mu(&b, &a)?).abs(), 1e-12),
            ("diagonal", perturb::mu(&a, &a)?, 0.0),
            ("triangle", ab, perturb::mu(&a, &c)? + perturb::mu(&c, &b)? + 1e-12),
        ]))
    })
}

/// Suite names with their default trial counts.
pub const SUITES: &[(&str, usize)] = &[
    ("duality", 500),
    ("perturbation", 200),
    ("best-approx", 100),
    ("canonical-not-best", 50),
    ("bijection", 100),
    ("decomposition", 200),
    ("sharpness", 100),
    ("canonical-ffdual", 200),
    ("desiderata", 100),
    ("pq", 500),
    ("r-lambda", 300),
    ("transformed", 200),
    ("fusion-stability", 200),
    ("mu-metric", 200),
];

/// Runs the suite called `name`; `None` for unknown names.
pub fn run_named(name: &str, cfg: &SuiteConfig, trials: Option<usize>) -> Option<Vec<SuiteReport>> {
    let default = SUITES.iter().find(|(n, _)| *n == name)?.1;
    let t = trials.unwrap_or(default);
    let reports = match name {
        "duality" => vec![duality_identities(cfg, t)],
        "perturbation" => vec![perturbation_bounds(cfg, t)],
        "best-approx" => vec![best_approximation(cfg, t, 20)],
        "canonical-not-best" => {
            let (witnesses, mut r) = canonical_not_best(cfg, t);
            if witnesses == 0 {
                r.violations += 1;
                r.failures.push("no instance with the canonical dual strictly farther".into());
            }
            vec![r]
        }
        "bijection" => vec![dual_bijection(cfg, t)],
        "decomposition" => vec![difference_decomposition(cfg, t)],
        "sharpness" => vec![bound_sharpness(cfg, t)],
        "canonical-ffdual" => vec![canonical_ffdual(cfg, t)],
        "desiderata" => {
            let d = desiderata(cfg, t);
            vec![d.d1, d.d2a, d.d2b, d.d3, d.d4]
        }
        "pq" => vec![pq_bound(cfg, t)],
        "r-lambda" => vec![r_lambda(cfg, t)],
        "transformed" => vec![transformed_bounds(cfg, t)],
        "fusion-stability" => vec![fusion_stability(cfg, t)],
        "mu-metric" => vec![mu_metric(cfg, t)],
        _ => unreachable!("listed in SUITES"),
    };
    Some(reports)
}

/// A convenience used by tests and the bench: a fixed-size frame pair.
pub fn sample_pair(seed: u64, tol: &Tolerance) -> (OvSequence, OvSequence, DualParam) {
    let mut rng = random::trial_rng(seed, 0);
    let a = random::frame(&mut rng, 4, 2, 4, Field::Complex);
    let b = random::perturbed(&mut rng, &a, 0.1 * a.classify(tol).lower_bound.sqrt(), Field::Complex, tol);
    let g = a.geometry(tol).expect("frame");
    let l = random::dual_param(&mut rng, &g, Field::Complex, 1.0);
    (a, b, l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SuiteConfig {
        SuiteConfig::default()
    }

    #[test]
    fn outcome_folding() {
        assert!(matches!(Outcome::from_checks(&[("a", 1.0, 2.0)]), Outcome::Pass { .. }));
        assert!(matches!(Outcome::from_checks(&[("a", 3.0, 2.0)]), Outcome::Fail { .. }));
        assert!(matches!(Outcome::from_checks(&[("a", f64::NAN, 2.0)]), Outcome::Fail { .. }));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let f = |rng: &mut ChaCha8Rng, i: usize| rng.random::<u64>() ^ i as u64;
        assert_eq!(run_trials(3, 50, f), run_trials_sequential(3, 50, f));
    }

    #[test]
    fn small_suites_pass() {
        let c = cfg();
        for r in [
            duality_identities(&c, 10),
            perturbation_bounds(&c, 10),
            best_approximation(&c, 4, 5),
            dual_bijection(&c, 10),
            difference_decomposition(&c, 10),
            bound_sharpness(&c, 10),
            canonical_ffdual(&c, 10),
            pq_bound(&c, 10),
            r_lambda(&c, 10),
            transformed_bounds(&c, 10),
            fusion_stability(&c, 10),
            mu_metric(&c, 10),
        ] {
            assert!(r.passed(), "{r:?}");
        }
        assert!(desiderata(&c, 10).passed());
    }

    #[test]
    fn every_named_suite_runs() {
        let c = cfg();
        for (name, _) in SUITES {
            let reports = run_named(name, &c, Some(3)).unwrap();
            assert!(!reports.is_empty());
        }
        assert!(run_named("nope", &c, None).is_none());
    }
}
