mod common;

use gradcat::criteria::{blows_up, dispatch};
use gradcat::decisive::{build_q, coefficients, GradientPair, TIE_TOL};
use gradcat::linalg2::{classify_spectrum, jordanize, Matrix2, SpectralClass, DEFAULT_EPS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

const MARGIN: f64 = 1e-6;

fn instance(route: usize, seed: u64, h: f64) -> (Matrix2, GradientPair) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (sample_matrix(&mut rng, ROUTES[route], h), sample_pair(&mut rng, 5.0))
}

fn in_margin(q: &Matrix2, v0: GradientPair) -> bool {
    let jd = jordanize(q, DEFAULT_EPS).unwrap();
    build_q(&coefficients(&jd, v0)).infimum().abs() <= MARGIN
}

fn same_class(a: &SpectralClass, b: &SpectralClass) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn jordan_residual_is_small(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64, d in -5.0..5.0f64) {
        let q = Matrix2::new(a, b, c, d);
        let jd = jordanize(&q, DEFAULT_EPS).unwrap();
        prop_assert!(jd.residual(&q) <= 1e-10 * q.max_abs().powi(2).max(1.0));
        let id = jd.a.mul(&jd.a_inv);
        prop_assert!(id.dist(&Matrix2::IDENTITY) <= 1e-12);
    }

    #[test]
    fn similarity_preserves_class(route in 0usize..5, seed in any::<u64>(), theta in 0.0..6.3f64, k in 0.5..2.0f64) {
        let (q, _) = instance(route, seed, 3.0);
        let (s, c) = theta.sin_cos();
        let m = Matrix2::new(c, -s, s, c).mul(&Matrix2::diag(k, 1.0 / k));
        let q2 = m.mul(&q).mul(&m.inverse().unwrap());
        let (c1, c2) = (classify_spectrum(&q, DEFAULT_EPS).unwrap(), classify_spectrum(&q2, DEFAULT_EPS).unwrap());
        prop_assert!(same_class(&c1, &c2), "{c1:?} vs {c2:?}");
        for (x, y) in c1.eigenvalues().iter().zip(c2.eigenvalues()) {
            prop_assert!((x.0 - y.0).abs() <= 1e-8 && (x.1 - y.1).abs() <= 1e-8);
        }
    }

    #[test]
    fn normalization_is_unobservable(route in 0usize..5, seed in any::<u64>(), s in 0.1..10.0f64, r in -10.0..-0.1f64) {
        let (q, v0) = instance(route, seed, 3.0);
        let jd = jordanize(&q, DEFAULT_EPS).unwrap();
        let base = coefficients(&jd, v0);
        let other = coefficients(&perturb_transition(&jd, s, r), v0);
        prop_assert!(rel(other.c1, base.c1) <= 1e-12 && rel(other.c2, base.c2) <= 1e-12);
        let (f, g) = (build_q(&base), build_q(&other));
        for i in 0..=20 {
            let t = 0.1 * i as f64;
            prop_assert!(rel(g.eval(t), f.eval(t)) <= 1e-12);
        }
        prop_assert_eq!(f.eval(0.0), 1.0);
    }

    #[test]
    fn criterion_matches_root(route in 0usize..5, seed in any::<u64>()) {
        let (q, v0) = instance(route, seed, 3.0);
        prop_assume!(!in_margin(&q, v0));
        let jd = jordanize(&q, DEFAULT_EPS).unwrap();
        let coeffs = coefficients(&jd, v0);
        let verdict = dispatch(coeffs.class, coeffs.c1, coeffs.c2).unwrap();
        let root = build_q(&coeffs).first_positive_root(f64::INFINITY, TIE_TOL).unwrap();
        prop_assert_eq!(verdict.blows_up, root.is_some(), "{:?} {:?} {:?}", q, v0, verdict);
    }

    #[test]
    fn time_scaling_covariance(route in 0usize..5, seed in any::<u64>(), s in 0.2..5.0f64) {
        let (q, v0) = instance(route, seed, 3.0);
        prop_assume!(!in_margin(&q, v0));
        let base = blows_up(&q, v0, true).unwrap();
        let scaled = blows_up(&q.scale(s), v0.scale(s), true).unwrap();
        prop_assert_eq!(base.blows_up, scaled.blows_up);
        if let (Some(a), Some(b)) = (base.t_star, scaled.t_star) {
            prop_assert!(rel(b, a / s) <= 1e-9, "{} vs {}", b, a / s);
        }
        let f = build_q(&coefficients(&jordanize(&q, DEFAULT_EPS).unwrap(), v0));
        let g = build_q(&coefficients(&jordanize(&q.scale(s), DEFAULT_EPS).unwrap(), v0.scale(s)));
        for i in 0..=10 {
            let t = 0.1 * i as f64;
            prop_assert!(rel(g.eval(t / s), f.eval(t)) <= 1e-9);
        }
    }

    #[test]
    fn first_row_preserving_similarity(route in 0usize..5, seed in any::<u64>(), p in -2.0..2.0f64, r in 0.3..3.0f64) {
        // P = [[1, 0], [p, r]] keeps e₁ᵀ e^{Qt} v₀ and hence q
        let (q, v0) = instance(route, seed, 3.0);
        prop_assume!(!in_margin(&q, v0));
        let pm = Matrix2::new(1.0, 0.0, p, r);
        let q2 = pm.mul(&q).mul(&pm.inverse().unwrap());
        let v2 = GradientPair::from(pm.apply(v0.as_array()));
        prop_assume!(!in_margin(&q2, v2));
        let (a, b) = (blows_up(&q, v0, true).unwrap(), blows_up(&q2, v2, true).unwrap());
        prop_assert_eq!(a.blows_up, b.blows_up);
        if let (Some(x), Some(y)) = (a.t_star, b.t_star) {
            prop_assert!(rel(x, y) <= 1e-6, "{} vs {}", x, y);
        }
    }

    #[test]
    fn dispatcher_is_total(a in -1e3..1e3f64, b in -1e3..1e3f64, c in -1e3..1e3f64, d in -1e3..1e3f64,
                           v1 in -1e3..1e3f64, v2 in -1e3..1e3f64) {
        let v = blows_up(&Matrix2::new(a, b, c, d), GradientPair::new(v1, v2), false).unwrap();
        prop_assert!(!v.clause.is_empty());
    }
}
