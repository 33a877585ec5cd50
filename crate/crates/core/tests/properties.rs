//! Property tests. Reference values come from small oracles written here:
//! LU inverses, Gram-Schmidt projections and power iteration, none of which
//! share code with the library's SVD path.

use framelab::fusion::{self, FusionPair, FusionSequence};
use framelab::gap;
use framelab::io;
use framelab::linalg::{c64, dist, identity, Matrix, Subspace};
use framelab::perturb;
use framelab::{DualParam, OvSequence, Tolerance, C64};
use proptest::prelude::*;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn entry() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0, any::<bool>()).prop_map(|(re, im, real)| C64::new(re, if real { 0.0 } else { im }))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(entry(), rows * cols).prop_map(move |d| Matrix::from_row_slice(rows, cols, &d))
}

/// Well-conditioned frames: `T = [I; X]` padded and mixed by a unitary-ish
/// factor keeps the lower bound at least one.
fn frame(n: usize, k: usize, m: usize) -> impl Strategy<Value = OvSequence> {
    matrix(m * k - n, n).prop_map(move |x| {
        let mut t = Matrix::zeros(m * k, n);
        t.view_mut((0, 0), (n, n)).copy_from(&identity(n));
        t.view_mut((n, 0), (m * k - n, n)).copy_from(&x);
        OvSequence::from_analysis(&t, k).unwrap()
    })
}

fn frame_any() -> impl Strategy<Value = OvSequence> {
    (1usize..=4, 1usize..=3)
        .prop_flat_map(|(n, k)| {
            let min_m = n.div_ceil(k) + 1;
            (Just(n), Just(k), min_m..=min_m + 3)
        })
        .prop_flat_map(|(n, k, m)| frame(n, k, m))
}

/// Orthogonal projection onto the span of the columns by Gram-Schmidt.
fn oracle_projection(v: &Matrix) -> Matrix {
    let n = v.nrows();
    let mut q: Vec<Matrix> = Vec::new();
    for j in 0..v.ncols() {
        let mut x = v.columns(j, 1).into_owned();
        for _ in 0..2 {
            for e in &q {
                let coeff = (e.adjoint() * &x)[(0, 0)];
                x -= e * coeff;
            }
        }
        let size = x.norm();
        if size > 1e-9 {
            q.push(x / c64(size));
        }
    }
    q.iter().fold(Matrix::zeros(n, n), |acc, e| acc + e * e.adjoint())
}

/// Largest singular value by power iteration on `M^H M`.
fn oracle_norm(m: &Matrix) -> f64 {
    let g = m.adjoint() * m;
    let mut x = Matrix::from_fn(g.ncols(), 1, |i, _| C64::new(1.0 + i as f64 * 0.37, 0.1 * i as f64));
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let y = &g * &x;
        let size = y.norm();
        if size == 0.0 {
            return 0.0;
        }
        lambda = size / x.norm();
        x = y / c64(size);
    }
    lambda.sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_dual_matches_lu_oracle(a in frame_any()) {
        let t = a.analysis_operator();
        let s_inv = (t.adjoint() * &t).try_inverse().unwrap();
        let expected = &t * s_inv;
        let dual = a.canonical_dual(&tol()).unwrap();
        prop_assert!(dist(&dual.analysis_operator(), &expected) < 1e-9);
        prop_assert!(a.is_dual(&dual, &tol()).unwrap());
    }

    #[test]
    fn alternate_duals_reconstruct(a in frame_any(), seed in any::<u64>(), size in 0.0f64..3.0) {
        let g = a.geometry(&tol()).unwrap();
        let mut rng = framelab::random::trial_rng(seed, 0);
        let l = framelab::random::dual_param(&mut rng, &g, framelab::random::Field::Complex, size);
        let dual = a.make_dual(&l, &tol()).unwrap();
        let n = a.domain_dim();
        let recon = dual.analysis_operator().adjoint() * a.analysis_operator();
        prop_assert!(dist(&recon, &identity(n)) < 1e-9);
        // the canonical dual has the smallest analysis operator among duals
        let canonical = a.canonical_dual(&tol()).unwrap();
        prop_assert!(oracle_norm(&canonical.analysis_operator()) <= oracle_norm(&dual.analysis_operator()) + 1e-9);
    }

    #[test]
    fn mu_is_a_metric(a in matrix(6, 3), b in matrix(6, 3), c in matrix(6, 3)) {
        let (a, b, c) = (
            OvSequence::from_analysis(&a, 2).unwrap(),
            OvSequence::from_analysis(&b, 2).unwrap(),
            OvSequence::from_analysis(&c, 2).unwrap(),
        );
        let ab = perturb::mu(&a, &b).unwrap();
        prop_assert!((ab - perturb::mu(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert_eq!(perturb::mu(&a, &a).unwrap(), 0.0);
        prop_assert!(ab <= perturb::mu(&a, &c).unwrap() + perturb::mu(&c, &b).unwrap() + 1e-12);
        prop_assert!((ab - oracle_norm(&(a.analysis_operator() - b.analysis_operator()))).abs() < 1e-7);
    }

    #[test]
    fn gap_matches_projection_oracle(v in matrix(4, 2), w in matrix(4, 2)) {
        let t = tol();
        let (sv, sw) = (Subspace::span(&v, &t).unwrap(), Subspace::span(&w, &t).unwrap());
        let (pv, pw) = (oracle_projection(&v), oracle_projection(&w));
        let directed = oracle_norm(&((identity(4) - &pw) * &pv));
        prop_assert!((gap::gap_delta(&sv, &sw).unwrap() - directed).abs() < 1e-7);
        let sym = gap::gap_symmetric(&sv, &sw).unwrap();
        prop_assert!((sym - oracle_norm(&(pv - pw))).abs() < 1e-7);
        prop_assert!((sym - gap::gap_symmetric(&sw, &sv).unwrap()).abs() < 1e-12);
        let r = gap::infimum_cosine(&sv, &sw).unwrap();
        let d = gap::gap_delta(&sv, &sw).unwrap();
        prop_assert!((r * r + d * d - 1.0).abs() < 1e-9);
    }

    #[test]
    fn canonical_ffdual_verifies(
        dims in prop::collection::vec(1usize..=3, 2..=5),
        weights in prop::collection::vec(0.5f64..2.0, 5),
        seed in any::<u64>(),
    ) {
        let t = tol();
        let n = 3;
        let mut rng = framelab::random::trial_rng(seed, 1);
        let pairs: Vec<FusionPair> = dims.iter().zip(&weights).map(|(&d, &c)| {
            FusionPair::new(framelab::random::subspace(&mut rng, n, d, framelab::random::Field::Real, &t), c)
        }).collect();
        let w = FusionSequence::new(n, pairs).unwrap();
        prop_assume!(w.classify(&t).is_frame && w.classify(&t).lower_bound > 1e-2);
        let (v, q) = fusion::canonical_ffdual_with_witness(&w, &t).unwrap();
        prop_assert!(fusion::ffdual_verify(&v, &w, &q, &t).unwrap().is_dual);
        // the canonical FF-dual reconstructs with the LU inverse of S_W
        let s_inv = w.to_ov().frame_operator().try_inverse().unwrap();
        let sum = w.pairs().iter().fold(Matrix::zeros(n, n), |acc, p| {
            acc + &s_inv * p.subspace.projection() * c64(p.weight * p.weight)
        });
        prop_assert!(dist(&sum, &identity(n)) < 1e-9);
    }

    #[test]
    fn json_round_trip_is_exact(m in matrix(3, 2)) {
        let text = io::to_exact_json(&io::matrix_to_value(&m));
        prop_assert_eq!(io::matrix_from_json(&text).unwrap(), m);
    }

    #[test]
    fn stable_dual_is_a_dual_of_b(a in frame(3, 1, 5), seed in any::<u64>(), frac in 0.01f64..0.3) {
        let t = tol();
        let mut rng = framelab::random::trial_rng(seed, 2);
        let field = framelab::random::Field::Real;
        let alpha = a.classify(&t).lower_bound;
        let b = framelab::random::perturbed(&mut rng, &a, frac * alpha.sqrt(), field, &t);
        let g = a.geometry(&t).unwrap();
        let l = framelab::random::dual_param(&mut rng, &g, field, 1.0);
        let (dual, report) = perturb::stable_dual(&a, &b, &l, &t).unwrap();
        prop_assert!(b.is_dual(&dual, &t).unwrap());
        prop_assert!(report.measured <= report.bound + 1e-8);
        // closed form T_B S_B^{-1} + (I - T_B S_B^{-1} T_B^H)(T_A S_A^{-1} + L) via LU
        let (ta, tb) = (a.analysis_operator(), b.analysis_operator());
        let sa_inv = (ta.adjoint() * &ta).try_inverse().unwrap();
        let sb_inv = (tb.adjoint() * &tb).try_inverse().unwrap();
        let m = ta.nrows();
        let expected = &tb * &sb_inv
            + (identity(m) - &tb * &sb_inv * tb.adjoint()) * (&ta * sa_inv + l.matrix());
        prop_assert!(dist(&dual.analysis_operator(), &expected) < 1e-8);
    }

    #[test]
    fn invalid_parameters_are_rejected(a in frame(2, 1, 3), x in matrix(3, 2)) {
        let t = tol();
        let leak = (a.analysis_operator().adjoint() * &x).norm();
        let result = DualParam::new(&a, x, &t);
        if leak > 1e-6 {
            prop_assert!(result.is_err());
        }
    }
}
