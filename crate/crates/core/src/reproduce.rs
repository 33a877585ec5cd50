//! Worked examples with fixed inputs from `fixtures/`.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::fusion::{self, FusionSequence};
use crate::io;
use crate::linalg::{c64, from_real_rows, identity, zeros, Matrix, Tolerance};
use crate::ovframe::{DualParam, OvSequence};
use crate::perturb;

/// Fixture files by name, embedded at build time.
pub const FIXTURES: &[(&str, &str)] = &[
    ("mercedes.json", include_str!("../fixtures/mercedes.json")),
    ("mercedes_eps_0.05.json", include_str!("../fixtures/mercedes_eps_0.05.json")),
    ("mercedes_eps_0.1.json", include_str!("../fixtures/mercedes_eps_0.1.json")),
    ("mercedes_eps_0.3.json", include_str!("../fixtures/mercedes_eps_0.3.json")),
    ("mercedes_L.json", include_str!("../fixtures/mercedes_L.json")),
    ("gavruta_W.json", include_str!("../fixtures/gavruta_W.json")),
    ("gavruta_V.json", include_str!("../fixtures/gavruta_V.json")),
    ("orthonormal_lines.json", include_str!("../fixtures/orthonormal_lines.json")),
    ("skew_pair.json", include_str!("../fixtures/skew_pair.json")),
    ("two_blocks.json", include_str!("../fixtures/two_blocks.json")),
    ("orthonormal.json", include_str!("../fixtures/orthonormal.json")),
    ("zero.json", include_str!("../fixtures/zero.json")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

fn load(name: &str) -> &'static str {
    fixture(name).expect("embedded fixture")
}

pub const MERCEDES_EPSILONS: [(f64, &str); 3] = [
    (0.05, "mercedes_eps_0.05.json"),
    (0.1, "mercedes_eps_0.1.json"),
    (0.3, "mercedes_eps_0.3.json"),
];

pub const NAMES: [&str; 3] = ["mercedes", "gavruta-counterexample", "decomposition"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Assertion {
    fn close(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self { name: name.into(), error, tolerance, pass: error <= tolerance }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), error: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproReport {
    pub name: String,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

impl ReproReport {
    fn new(name: &str, assertions: Vec<Assertion>) -> Self {
        let passed = assertions.iter().all(|a| a.pass);
        Self { name: name.into(), assertions, passed }
    }
}

fn max_entry(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn equal_rows(a: f64, b: f64) -> Matrix {
    from_real_rows(&[&[a, b], &[a, b], &[a, b]])
}

/// Closed form of the stable dual of the perturbed Mercedes-Benz frame for
/// `L` with all rows `(a, b)`.
pub fn mercedes_stable_dual_closed_form(eps: f64, a: f64, b: f64) -> Matrix {
    let big = 9.0 - 4.0 * eps * eps;
    let t = (1.0 - eps * eps).sqrt();
    let s3 = 3f64.sqrt();
    let pm = 6.0 * t * t + (3.0 - 2.0 * s3 * eps) * t - s3 * eps;
    let pp = 6.0 * t * t + (3.0 + 2.0 * s3 * eps) * t + s3 * eps;
    let k = (2.0f64 / 3.0).sqrt() + b;
    let h = 1.5f64.sqrt();
    from_real_rows(&[
        &[3.0 * (1.0 + 2.0 * t) * a, (6f64.sqrt() + 3.0 * b) * (1.0 + 2.0 * t)],
        &[big / 2f64.sqrt() + pm * a, -h * big + k * pm],
        &[-big / 2f64.sqrt() + pp * a, -h * big + k * pp],
    ]) * c64(1.0 / big)
}

/// Row `(a, b)` of the parameter whose stable dual is the canonical dual of `B`.
pub fn mercedes_canonical_parameter(eps: f64) -> (f64, f64) {
    let t = (1.0 - eps * eps).sqrt();
    let f = (2.0f64 / 3.0).sqrt() / (1.0 + 2.0 * t);
    (f * eps, f * (t - 1.0))
}

pub fn mercedes(tol: &Tolerance) -> Result<ReproReport> {
    let mut out = Vec::new();
    let a = io::ov_from_json(load("mercedes.json"))?;
    let s3 = 3f64.sqrt();
    let expected_a = from_real_rows(&[&[0.0, 2.0], &[s3, -1.0], &[-s3, -1.0]]) * c64(1.0 / 6f64.sqrt());
    out.push(Assertion::close("T_A entries", max_entry(&(a.analysis_operator() - expected_a)), 1e-9));
    let ra = a.classify(tol);
    out.push(Assertion::close(
        "A is tight with bound 1",
        (ra.lower_bound - 1.0).abs().max((ra.bessel_bound - 1.0).abs()),
        1e-9,
    ));
    let l_matrix = io::matrix_from_json(load("mercedes_L.json"))?;
    let (la, lb) = (l_matrix[(0, 0)].re, l_matrix[(0, 1)].re);
    let l = DualParam::new(&a, l_matrix, tol)?;
    for (eps, file) in MERCEDES_EPSILONS {
        let b = io::ov_from_json(load(file))?;
        let delta = 1.0 - (1.0 - eps * eps).sqrt();
        let t = (1.0 - eps * eps).sqrt();
        let expected_b = from_real_rows(&[&[2.0 * eps, 2.0 * t], &[s3, -1.0], &[-s3, -1.0]])
            * c64(1.0 / 6f64.sqrt());
        out.push(Assertion::close(
            format!("eps={eps}: T_B entries"),
            max_entry(&(b.analysis_operator() - expected_b)),
            1e-9,
        ));
        let mu = perturb::mu(&a, &b)?;
        out.push(Assertion::close(
            format!("eps={eps}: ||T_A - T_B|| = 2 sqrt(delta/3)"),
            (mu - 2.0 * (delta / 3.0).sqrt()).abs(),
            1e-10,
        ));
        let rb = b.classify(tol);
        let below = ((1.0 - eps).powi(2) - rb.lower_bound).max(0.0);
        let above = (rb.bessel_bound - (1.0 + eps).powi(2)).max(0.0);
        out.push(Assertion::close(
            format!("eps={eps}: frame bounds of B in [(1-eps)^2, (1+eps)^2]"),
            below.max(above),
            1e-9,
        ));
        let (dual, _) = perturb::stable_dual(&a, &b, &l, tol)?;
        let closed = mercedes_stable_dual_closed_form(eps, la, lb);
        out.push(Assertion::close(
            format!("eps={eps}: T_B_L closed form"),
            max_entry(&(dual.analysis_operator() - closed)),
            1e-9,
        ));
        let bij = perturb::dual_bijection_unchecked(&a, &b, tol)?;
        let recovered = bij.preimage(&zeros(3, 2));
        let (pa, pb) = mercedes_canonical_parameter(eps);
        out.push(Assertion::close(
            format!("eps={eps}: (a, b) of the canonical dual of B"),
            max_entry(&(recovered - equal_rows(pa, pb))),
            1e-9,
        ));
    }
    Ok(ReproReport::new("mercedes", out))
}

pub fn gavruta_counterexample(tol: &Tolerance) -> Result<ReproReport> {
    let w = io::fusion_from_json(load("gavruta_W.json"), tol)?;
    let v = io::fusion_from_json(load("gavruta_V.json"), tol)?;
    let forward = fusion::gavruta_sum(&v, &w, tol)?;
    let reversed = fusion::gavruta_sum(&w, &v, tol)?;
    let out = vec![
        Assertion::close("sum c_i d_i P_V_i S_W^-1 P_W_i = I", max_entry(&(forward - identity(2))), 1e-12),
        Assertion::close(
            "sum c_i d_i P_W_i S_V^-1 P_V_i = I/2",
            max_entry(&(reversed - identity(2) * c64(0.5))),
            1e-12,
        ),
        Assertion::flag("V is a Gavruta dual of W", fusion::gavruta_is_dual(&v, &w, tol)?),
        Assertion::flag("W is not a Gavruta dual of V", !fusion::gavruta_is_dual(&w, &v, tol)?),
    ];
    Ok(ReproReport::new("gavruta-counterexample", out))
}

fn group_lambdas(w: &FusionSequence, tol: &Tolerance) -> Option<Vec<f64>> {
    let d = fusion::tight_orthogonal_decomposition(w, tol)?;
    let mut l: Vec<f64> = d.groups.iter().map(|g| g.lambda).collect();
    l.sort_by(f64::total_cmp);
    Some(l)
}

fn lambdas_match(found: Option<Vec<f64>>, expected: &[f64]) -> f64 {
    match found {
        Some(l) if l.len() == expected.len() => {
            l.iter().zip(expected).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        }
        _ => f64::INFINITY,
    }
}

pub fn decomposition(tol: &Tolerance) -> Result<ReproReport> {
    let lines = io::fusion_from_json(load("orthonormal_lines.json"), tol)?;
    let skew = io::fusion_from_json(load("skew_pair.json"), tol)?;
    let blocks = io::fusion_from_json(load("two_blocks.json"), tol)?;
    let out = vec![
        Assertion::close("orthonormal lines: one group, lambda = 1", lambdas_match(group_lambdas(&lines, tol), &[1.0]), 1e-9),
        Assertion::flag("orthonormal lines: canonical dual is a fusion sequence", fusion::canonical_dual_is_fusion_sequence(&lines, tol)?),
        Assertion::flag("{e1, e1+e2}: no decomposition", group_lambdas(&skew, tol).is_none()),
        Assertion::flag("{e1, e1+e2}: canonical dual is not a fusion sequence", !fusion::canonical_dual_is_fusion_sequence(&skew, tol)?),
        Assertion::close("two blocks: lambdas 1 and 4", lambdas_match(group_lambdas(&blocks, tol), &[1.0, 4.0]), 1e-9),
        Assertion::flag("two blocks: canonical dual is a fusion sequence", fusion::canonical_dual_is_fusion_sequence(&blocks, tol)?),
    ];
    Ok(ReproReport::new("decomposition", out))
}

pub fn run(name: &str, tol: &Tolerance) -> Result<ReproReport> {
    match name {
        "mercedes" => mercedes(tol),
        "gavruta-counterexample" => gavruta_counterexample(tol),
        "decomposition" => decomposition(tol),
        other => Err(FrameError::InvalidInput(format!(
            "unknown example {other:?}; expected one of {}",
            NAMES.join(", ")
        ))),
    }
}

/// `A` and its perturbation for the given `eps` fixture.
pub fn mercedes_pair(eps_file: &str) -> Result<(OvSequence, OvSequence)> {
    let b = fixture(eps_file).ok_or_else(|| FrameError::InvalidInput(format!("no fixture {eps_file}")))?;
    Ok((io::ov_from_json(load("mercedes.json"))?, io::ov_from_json(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;

    #[test]
    fn all_examples_pass() {
        let t = Tolerance::default();
        for name in NAMES {
            let r = run(name, &t).unwrap();
            assert!(r.passed, "{r:?}");
        }
        assert!(run("nope", &t).is_err());
    }

    #[test]
    fn fixtures_parse() {
        let t = Tolerance::default();
        for (name, text) in FIXTURES {
            assert!(io::frame_from_json(text, &t).is_ok() || io::matrix_from_json(text).is_ok(), "{name}");
        }
    }

    #[test]
    fn closed_form_at_zero_is_the_alternate_dual() {
        let t = Tolerance::default();
        let (a, _) = mercedes_pair("mercedes_eps_0.1.json").unwrap();
        let l = DualParam::new(&a, equal_rows(0.2, 0.1), &t).unwrap();
        let dual = a.make_dual(&l, &t).unwrap();
        assert!(dist(&dual.analysis_operator(), &mercedes_stable_dual_closed_form(0.0, 0.2, 0.1)) < 1e-12);
    }
}
