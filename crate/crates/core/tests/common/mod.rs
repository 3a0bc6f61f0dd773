#![allow(dead_code)]

use gradcat::decisive::GradientPair;
use gradcat::dynamics::integrator::{integrate, Control, Dopri5Options};
use gradcat::linalg2::{JordanData, Matrix2, SpectralClass};
use rand::Rng;

/// Spectral routes used for stratified sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Distinct,
    Scalar,
    OneZero,
    Defective,
    Complex,
}

pub const ROUTES: [Route; 5] = [Route::Distinct, Route::Scalar, Route::OneZero, Route::Defective, Route::Complex];

pub fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Random matrix of the given route with entries in `[−h, h]`.
pub fn sample_matrix<R: Rng>(rng: &mut R, route: Route, h: f64) -> Matrix2 {
    loop {
        let q = match route {
            Route::Distinct | Route::Complex => {
                Matrix2::new(uniform(rng, -h, h), uniform(rng, -h, h), uniform(rng, -h, h), uniform(rng, -h, h))
            }
            Route::Scalar => Matrix2::scalar(uniform(rng, -h, h)),
            Route::OneZero => {
                // rank one u·wᵀ
                let r = h.sqrt();
                let u = [uniform(rng, -r, r), uniform(rng, -r, r)];
                let w = [uniform(rng, -r, r), uniform(rng, -r, r)];
                Matrix2::new(u[0] * w[0], u[0] * w[1], u[1] * w[0], u[1] * w[1])
            }
            Route::Defective => {
                // λI + s·[[−pr, p²], [−r², pr]]
                let lambda = uniform(rng, -h / 2.0, h / 2.0);
                let (p, r) = (uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
                let s = uniform(rng, -h / 2.0, h / 2.0);
                Matrix2::new(lambda - s * p * r, s * p * p, -s * r * r, lambda + s * p * r)
            }
        };
        let disc = q.discriminant();
        let ok = match route {
            Route::Distinct => disc > 1e-3,
            Route::Complex => disc < -1e-3,
            Route::OneZero => q.trace().abs() > 1e-3,
            Route::Defective => q.sub(&Matrix2::scalar(0.5 * q.trace())).max_abs() > 1e-3,
            Route::Scalar => true,
        };
        if ok {
            return q;
        }
    }
}

pub fn sample_pair<R: Rng>(rng: &mut R, h: f64) -> GradientPair {
    GradientPair::new(uniform(rng, -h, h), uniform(rng, -h, h))
}

/// Another admissible transition: `M·A` with `M` commuting with `J`.
pub fn perturb_transition(jd: &JordanData, s: f64, r: f64) -> JordanData {
    let m = match jd.class {
        SpectralClass::RealDistinct { .. } | SpectralClass::RealRepeatedDiagonalizable { .. } => Matrix2::diag(s, r),
        SpectralClass::RealRepeatedDefective { .. } => Matrix2::new(s, r, 0.0, s),
        SpectralClass::ComplexPair { .. } => Matrix2::new(s, r, -r, s),
    };
    JordanData::from_transition(jd.class, m.mul(&jd.a)).unwrap()
}

/// `y' = f(y)` with tight tolerances, sampled at the requested times.
pub fn integrate_at<const N: usize>(f: impl Fn(&[f64; N]) -> [f64; N], y0: [f64; N], times: &[f64], rtol: f64) -> Vec<[f64; N]> {
    let opts = Dopri5Options { rtol, atol: rtol * 1e-3, ..Default::default() };
    let mut out = vec![y0];
    let mut y = y0;
    for w in times.windows(2) {
        let o = integrate(|_, y: &[f64; N]| f(y), w[0], y, w[1], &opts, |_, _| Control::Continue);
        y = o.y;
        out.push(y);
    }
    out
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
