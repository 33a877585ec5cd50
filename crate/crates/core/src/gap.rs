//! Gap geometry between subspaces.
//!
//! `delta(V, W) = ||P_{W^perp}|V||` is computed as the spectral norm of
//! `(I - P_W) * basis(V)`, with `delta({0}, W) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::linalg::{self, identity, norm, Matrix, Subspace, Tolerance};

fn check_ambient(v: &Subspace, w: &Subspace) -> Result<()> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(FrameError::InvalidInput(format!(
            "subspaces live in dimensions {} and {}",
            v.ambient_dim(),
            w.ambient_dim()
        )));
    }
    Ok(())
}

/// Directed gap from `v` to `w`.
pub fn gap_delta(v: &Subspace, w: &Subspace) -> Result<f64> {
    check_ambient(v, w)?;
    if v.is_zero() {
        return Ok(0.0);
    }
    let n = v.ambient_dim();
    let residual = (identity(n) - w.projection()) * v.basis();
    Ok(norm(&residual).clamp(0.0, 1.0))
}

/// Infimum cosine angle `R(V, W) = min { ||P_W v|| : v in V, ||v|| = 1 }`.
pub fn infimum_cosine(v: &Subspace, w: &Subspace) -> Result<f64> {
    check_ambient(v, w)?;
    if v.is_zero() {
        return Ok(1.0);
    }
    let compressed = w.projection() * v.basis();
    let s = linalg::singular_values(&compressed);
    Ok(s.last().copied().unwrap_or(0.0).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub delta_vw: f64,
    pub delta_wv: f64,
    #[serde(rename = "R_vw")]
    pub r_vw: f64,
    #[serde(rename = "Delta")]
    pub big_delta: f64,
    pub below_one: bool,
    /// `| max(delta_vw, delta_wv) - ||P_V - P_W|| |`.
    pub projection_discrepancy: f64,
}

/// Symmetric gap `Delta(V, W)` together with both directed gaps.
pub fn gap_report(v: &Subspace, w: &Subspace, tol: &Tolerance) -> Result<GapReport> {
    let delta_vw = gap_delta(v, w)?;
    let delta_wv = gap_delta(w, v)?;
    let r_vw = infimum_cosine(v, w)?;
    let big_delta = delta_vw.max(delta_wv);
    let projection_gap = linalg::dist(&v.projection(), &w.projection());
    Ok(GapReport {
        delta_vw,
        delta_wv,
        r_vw,
        big_delta,
        below_one: big_delta < 1.0 - tol.eq,
        projection_discrepancy: (big_delta - projection_gap).abs(),
    })
}

/// `Delta(V, W) = max(delta(V, W), delta(W, V))`.
pub fn gap_symmetric(v: &Subspace, w: &Subspace) -> Result<f64> {
    Ok(gap_delta(v, w)?.max(gap_delta(w, v)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub bound: f64,
    pub measured: f64,
}

impl BoundCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.measured <= self.bound + tol
    }
}

/// Range gap estimate `delta(ran T, ran S) <= ||T - S|| / c` for `c` a lower
/// bound of `T` on `(ker T)^perp`.
pub fn gap_range_bound(t: &Matrix, s: &Matrix, c: f64, tol: &Tolerance) -> Result<BoundCheck> {
    linalg::check_finite(t)?;
    linalg::check_finite(s)?;
    if t.shape() != s.shape() {
        return Err(FrameError::InvalidInput("operators have different shapes".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(FrameError::InvalidInput(format!("lower bound must be positive, got {c}")));
    }
    let ran_t = linalg::range_basis(t, tol)?;
    if !ran_t.is_zero() {
        let smin = linalg::min_nonzero_sv(t, tol)?;
        if c > smin + tol.eq {
            return Err(FrameError::InvalidInput(format!(
                "{c} is not a lower bound: smallest nonzero singular value is {smin}"
            )));
        }
    }
    let ran_s = linalg::range_basis(s, tol)?;
    Ok(BoundCheck { bound: linalg::dist(t, s) / c, measured: gap_delta(&ran_t, &ran_s)? })
}

/// Consequences of small gaps: trivial intersection with `W^perp` and
/// isomorphic restricted projections. `None` means the hypothesis fails
/// and nothing is asserted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedBelowReport {
    pub delta_vw: f64,
    pub delta_wv: f64,
    #[serde(rename = "Delta")]
    pub big_delta: f64,
    pub trivial_intersection: Option<bool>,
    pub deltas_equal: Option<bool>,
    pub isomorphisms: Option<bool>,
}

impl BoundedBelowReport {
    /// True when every asserted consequence holds.
    pub fn all_pass(&self) -> bool {
        [self.trivial_intersection, self.deltas_equal, self.isomorphisms]
            .iter()
            .all(|f| f.unwrap_or(true))
    }
}

pub fn bounded_below_consequences(
    v: &Subspace,
    w: &Subspace,
    tol: &Tolerance,
) -> Result<BoundedBelowReport> {
    let delta_vw = gap_delta(v, w)?;
    let delta_wv = gap_delta(w, v)?;
    let big_delta = delta_vw.max(delta_wv);
    let below = |x: f64| x < 1.0 - tol.eq;

    let trivial_intersection = below(delta_vw).then(|| {
        v.is_zero() || infimum_cosine(v, w).map(|r| r > tol.rank).unwrap_or(false)
    });
    let (deltas_equal, isomorphisms) = if below(big_delta) {
        let compressed = w.basis().adjoint() * v.basis();
        let invertible = v.dim() == w.dim()
            && (v.is_zero()
                || linalg::singular_values(&compressed).last().is_some_and(|&s| s > tol.rank));
        (Some((delta_vw - delta_wv).abs() <= tol.eq), Some(invertible))
    } else {
        (None, None)
    };
    Ok(BoundedBelowReport {
        delta_vw,
        delta_wv,
        big_delta,
        trivial_intersection,
        deltas_equal,
        isomorphisms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, real_vector};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn line(theta: f64) -> Subspace {
        Subspace::span(&real_vector(&[theta.cos(), theta.sin()]), &tol()).unwrap()
    }

    #[test]
    fn delta_examples() {
        let e1 = line(0.0);
        assert_abs_diff_eq!(gap_delta(&e1, &e1).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            gap_delta(&e1, &line(FRAC_PI_4)).unwrap(),
            2f64.sqrt() / 2.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            gap_delta(&e1, &line(std::f64::consts::FRAC_PI_2)).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn delta_conventions_for_zero_subspace() {
        let z = Subspace::zero(2);
        assert_eq!(gap_delta(&z, &line(0.3)).unwrap(), 0.0);
        assert_abs_diff_eq!(gap_delta(&line(0.3), &z).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ambient_mismatch_is_rejected() {
        assert!(gap_delta(&Subspace::full(2), &Subspace::full(3)).is_err());
    }

    #[test]
    fn report_for_lines() {
        let t = tol();
        let r = gap_report(&line(0.0), &line(0.0), &t).unwrap();
        assert!(r.big_delta.abs() < 1e-15 && r.delta_vw.abs() < 1e-15);
        let theta = 0.4;
        let r = gap_report(&line(0.0), &line(theta), &t).unwrap();
        assert_abs_diff_eq!(r.big_delta, theta.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.r_vw, theta.cos(), epsilon = 1e-14);
        assert!(r.projection_discrepancy < 1e-14);
        assert!(r.below_one);
    }

    #[test]
    fn unequal_dimensions_have_unit_gap() {
        let t = tol();
        let plane = Subspace::span(
            &from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]),
            &t,
        )
        .unwrap();
        let l = Subspace::span(&real_vector(&[0.3, 0.4, 0.5]), &t).unwrap();
        let r = gap_report(&l, &plane, &t).unwrap();
        assert_abs_diff_eq!(r.big_delta, 1.0, epsilon = 1e-14);
        assert!(!r.below_one);
    }

    #[test]
    fn range_bound_examples() {
        let t = tol();
        let m = from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0], &[0.0, 0.0]]);
        let r = gap_range_bound(&m, &m, 1.0, &t).unwrap();
        assert_eq!((r.bound, r.measured), (0.0, 0.0));
        assert!(gap_range_bound(&m, &m, 1.5, &t).is_err());
        let s = from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0], &[0.1, 0.0]]);
        let r = gap_range_bound(&m, &s, 1.0, &t).unwrap();
        assert!(r.holds(1e-12));
    }

    #[test]
    fn bounded_below_consequences_hold() {
        let t = tol();
        let e1 = line(0.0);
        let r = bounded_below_consequences(&e1, &e1, &t).unwrap();
        assert_eq!(r.trivial_intersection, Some(true));
        assert_eq!(r.isomorphisms, Some(true));
        assert!(r.all_pass());

        let r = bounded_below_consequences(&e1, &line(FRAC_PI_3), &t).unwrap();
        assert_abs_diff_eq!(r.delta_vw, FRAC_PI_3.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.delta_wv, FRAC_PI_3.sin(), epsilon = 1e-14);
        assert_eq!(r.isomorphisms, Some(true));
        assert_eq!(r.deltas_equal, Some(true));

        let r = bounded_below_consequences(&e1, &line(std::f64::consts::FRAC_PI_2), &t).unwrap();
        assert_eq!(r.trivial_intersection, None);
        assert_eq!(r.isomorphisms, None);
    }
}
