//! Characteristic evolution, Radon reconstruction of the gradient system,
//! a direct nonlinear oracle and equilibrium classification.
//!
//! Along a characteristic `dx/dt = V₁` the solution obeys `V' = QV`, and the
//! gradients `v = (V_x, E_x)` obey the Riccati system `v' = −v₁v + Qv`.

pub mod equilibria;
pub mod integrator;

use serde::Serialize;

use crate::criteria::blows_up;
use crate::decisive::{build_q, coefficients, GradientPair, TIE_TOL};
use crate::error::{Error, Result};
use crate::linalg2::{jordanize, Matrix2, SpectralClass, DEFAULT_EPS};

pub use equilibria::{equilibria, EquilibriumKind, EquilibriumLabel, EquilibriumReport, Stability};
use integrator::{integrate, Control, Dopri5Options, Termination};

/// State on a characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharState {
    pub t: f64,
    pub x: f64,
    #[serde(rename = "V1")]
    pub v1: f64,
    #[serde(rename = "V2")]
    pub v2: f64,
}

/// Gradient pair along a characteristic, with its transformed image
/// `w = A·v` and the decisive function value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeState {
    pub t: f64,
    pub v1: f64,
    pub v2: f64,
    pub w1: f64,
    pub w2: f64,
    pub q: f64,
}

/// `cosh(√x)` and `sinh(√x)/√x` continued to `x < 0` as `cos`/`sin`.
fn even_odd(x: f64) -> (f64, f64) {
    if x.abs() < 1e-2 {
        // Σ xⁿ/(2n)!, Σ xⁿ/(2n+1)!
        let (mut c, mut s) = (1.0, 1.0);
        let (mut tc, mut ts) = (1.0, 1.0);
        for n in 1..10 {
            let nf = n as f64;
            tc *= x / ((2.0 * nf - 1.0) * (2.0 * nf));
            ts *= x / ((2.0 * nf) * (2.0 * nf + 1.0));
            c += tc;
            s += ts;
        }
        (c, s)
    } else if x > 0.0 {
        let r = x.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-x).sqrt();
        (r.cos(), r.sin() / r)
    }
}

/// `exp(Qt)` in closed form: with `τ = tr Q/2`, `N = Q − τI` and `N² = δ²I`,
/// `exp(Qt) = e^{τt}(cosh(δt)·I + sinh(δt)/δ·N)`, read as `cos`/`sin` when
/// `δ² < 0` and as `I + tN` when `δ² = 0`.
pub fn expm(q: &Matrix2, t: f64) -> Matrix2 {
    let tau = 0.5 * q.trace();
    let n = q.sub(&Matrix2::scalar(tau));
    let delta2 = 0.25 * q.discriminant();
    let (c, s) = even_odd(delta2 * t * t);
    Matrix2::scalar(c).add(&n.scale(t * s)).scale((tau * t).exp())
}

/// `exp(Jt)` for a real Jordan form.
pub fn expm_jordan(class: &SpectralClass, t: f64) -> Matrix2 {
    match *class {
        SpectralClass::RealDistinct { lambda1, lambda2 } => Matrix2::diag((lambda1 * t).exp(), (lambda2 * t).exp()),
        SpectralClass::RealRepeatedDiagonalizable { lambda } => Matrix2::scalar((lambda * t).exp()),
        SpectralClass::RealRepeatedDefective { lambda } => Matrix2::new(1.0, t, 0.0, 1.0).scale((lambda * t).exp()),
        SpectralClass::ComplexPair { alpha, beta } => {
            let (s, c) = (beta * t).sin_cos();
            Matrix2::new(c, s, -s, c).scale((alpha * t).exp())
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("time must be finite and non-negative, got {t}")))
    }
}

/// Closed-form characteristic through `x₀` with data `V₀`.
///
/// `V(t) = exp(Qt)·V₀`; `x(t) = x₀ + ∫₀ᵗ V₁`, where the integral is the
/// increment of the decisive function built with `V₀` in place of the
/// gradients (both are `∫₀ᵗ [exp(Qs)·z]₁ ds`).
pub fn solve_characteristic(q: &Matrix2, big_v0: [f64; 2], x0: f64, t: f64) -> Result<CharState> {
    check_time(t)?;
    if !(big_v0.iter().all(|v| v.is_finite()) && x0.is_finite()) {
        return Err(Error::invalid("non-finite characteristic data"));
    }
    let jd = jordanize(q, DEFAULT_EPS)?;
    let v = expm(q, t).apply(big_v0);
    let dx = build_q(&coefficients(&jd, GradientPair::from(big_v0))).increment(t);
    Ok(CharState { t, x: x0 + dx, v1: v[0], v2: v[1] })
}

/// Right-hand side of the gradient system `v' = −v₁v + Qv`.
pub fn gradient_rhs(q: &Matrix2, v: &[f64; 2]) -> [f64; 2] {
    let qv = q.apply(*v);
    [qv[0] - v[0] * v[0], qv[1] - v[0] * v[1]]
}

/// Jacobian of [`gradient_rhs`] at `v`.
pub fn gradient_jacobian(q: &Matrix2, v: [f64; 2]) -> Matrix2 {
    Matrix2::new(q.a - 2.0 * v[0], q.b, q.c - v[1], q.d - v[0])
}

/// Gradients at time `t` via the linearized system: `u = exp(Jt)·A·v₀`,
/// `w = u/q`, `v = A⁻¹·w`.
pub fn radon_derivatives(q: &Matrix2, v0: GradientPair, t: f64) -> Result<DerivativeState> {
    check_time(t)?;
    let v0 = GradientPair::checked(v0.v1, v0.v2)?;
    let jd = jordanize(q, DEFAULT_EPS)?;
    let dq = build_q(&coefficients(&jd, v0));
    if t > 0.0 {
        if let Some(t_star) = dq.first_positive_root(t, TIE_TOL)? {
            return Err(Error::BlowupCrossed { t_star });
        }
    }
    let qt = dq.eval(t);
    let u = expm_jordan(&jd.class, t).apply(jd.a.apply(v0.as_array()));
    let w = [u[0] / qt, u[1] / qt];
    let v = jd.a_inv.apply(w);
    Ok(DerivativeState { t, v1: v[0], v2: v[1], w1: w[0], w2: w[1], q: qt })
}

/// Three-valued oracle outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleOutcome {
    BlewUp,
    Smooth,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleVerdict {
    pub outcome: OracleOutcome,
    pub t_blow: Option<f64>,
    pub max_norm: f64,
}

impl OracleVerdict {
    /// `Some(true)` for blow-up, `Some(false)` for smooth, `None` if undecided.
    pub fn blew_up(&self) -> Option<bool> {
        match self.outcome {
            OracleOutcome::BlewUp => Some(true),
            OracleOutcome::Smooth => Some(false),
            OracleOutcome::Undecided => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub t_max: f64,
    pub blow_threshold: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { t_max: 50.0, blow_threshold: 1e8, rtol: 1e-10, atol: 1e-12 }
    }
}

/// Direct adaptive integration of `v' = −v₁v + Qv` with default tolerances.
pub fn integrate_extended_oracle(q: &Matrix2, v0: GradientPair, t_max: f64, blow_threshold: f64) -> Result<OracleVerdict> {
    integrate_extended_oracle_with(q, v0, &OracleOptions { t_max, blow_threshold, ..Default::default() })
}

/// Direct integration with explicit options.
///
/// Blow-up is declared when `‖v‖` exceeds the threshold or the step size
/// underflows. Otherwise the run is smooth when at `t_max` the norm is not
/// increasing, the state has settled near an equilibrium, or the norm
/// oscillates below its earlier maximum; anything else is undecided.
pub fn integrate_extended_oracle_with(q: &Matrix2, v0: GradientPair, opts: &OracleOptions) -> Result<OracleVerdict> {
    q.validate()?;
    let v0 = GradientPair::checked(v0.v1, v0.v2)?;
    if !(opts.t_max > 0.0 && opts.t_max.is_finite()) {
        return Err(Error::invalid(format!("t_max must be positive, got {}", opts.t_max)));
    }
    if !(opts.blow_threshold >= 1e6) {
        return Err(Error::invalid(format!("blow threshold must be at least 1e6, got {}", opts.blow_threshold)));
    }
    let dopri = Dopri5Options { rtol: opts.rtol, atol: opts.atol, ..Default::default() };
    let half = 0.5 * opts.t_max;
    let norm0 = v0.v1.hypot(v0.v2);
    let mut max_norm = norm0;
    let mut max_first_half = norm0;
    let mut max_second_half: f64 = 0.0;
    let (mut prev, mut prev2) = (norm0, norm0);
    let mut peak_in_second_half = false;
    let mut crossed = None;
    let out = integrate(
        |_, v: &[f64; 2]| gradient_rhs(q, v),
        0.0,
        v0.as_array(),
        opts.t_max,
        &dopri,
        |t, v| {
            let n = v[0].hypot(v[1]);
            max_norm = max_norm.max(n);
            if n > opts.blow_threshold {
                crossed = Some(t);
                return Control::Stop;
            }
            if t <= half {
                max_first_half = max_first_half.max(n);
            } else {
                max_second_half = max_second_half.max(n);
                if prev > prev2 && prev > n {
                    peak_in_second_half = true;
                }
            }
            prev2 = prev;
            prev = n;
            Control::Continue
        },
    );
    let verdict = |outcome, t_blow| Ok(OracleVerdict { outcome, t_blow, max_norm });
    if let Some(t) = crossed {
        return verdict(OracleOutcome::BlewUp, Some(t));
    }
    match out.termination {
        Termination::StepUnderflow | Termination::NonFinite => return verdict(OracleOutcome::BlewUp, Some(out.t)),
        Termination::MaxSteps => return verdict(OracleOutcome::Undecided, None),
        Termination::Completed | Termination::Stopped => {}
    }
    let v = out.y;
    let n = v[0].hypot(v[1]);
    let f = gradient_rhs(q, &v);
    let growth = v[0] * f[0] + v[1] * f[1];
    let speed = f[0].hypot(f[1]);
    let settled = speed <= 1e-6 * n.max(1.0);
    let recurrent = peak_in_second_half && max_second_half <= max_first_half * (1.0 + 1e-6);
    if growth <= 0.0 || settled || recurrent {
        verdict(OracleOutcome::Smooth, None)
    } else {
        verdict(OracleOutcome::Undecided, None)
    }
}

/// Integrates the gradient system directly, returning the states at every
/// accepted step up to `t_end`.
pub fn integrate_gradients(q: &Matrix2, v0: GradientPair, t_end: f64, rtol: f64) -> Result<Vec<DerivativeState>> {
    check_time(t_end)?;
    let mut states = vec![];
    let opts = Dopri5Options { rtol, atol: rtol * 1e-2, ..Default::default() };
    let out = integrate(
        |_, v: &[f64; 2]| gradient_rhs(q, v),
        0.0,
        v0.as_array(),
        t_end,
        &opts,
        |t, v| {
            states.push(DerivativeState { t, v1: v[0], v2: v[1], w1: f64::NAN, w2: f64::NAN, q: f64::NAN });
            Control::Continue
        },
    );
    if out.termination != Termination::Completed {
        return Err(Error::NumericalFailure(format!("direct integration stopped at t = {}: {:?}", out.t, out.termination)));
    }
    Ok(states)
}

/// `T* = min t*` over the samples whose verdict is blow-up.
pub fn global_blowup_time(q: &Matrix2, samples: &[(f64, GradientPair)]) -> Result<Option<f64>> {
    if samples.is_empty() {
        return Err(Error::invalid("sample list is empty"));
    }
    let mut best: Option<f64> = None;
    for (_, v0) in samples {
        let v = blows_up(q, *v0, true)?;
        if let Some(t) = v.t_star {
            best = Some(best.map_or(t, |b| b.min(t)));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    const GOLDEN: f64 = 1.618_033_988_749_895;

    /// Scaling and squaring with a Taylor core.
    fn expm_oracle(q: &Matrix2, t: f64) -> Matrix2 {
        let m = q.scale(t);
        let norm = m.max_abs().max(1e-300);
        let k = (norm.log2().ceil() as i32 + 4).max(0);
        let small = m.scale(0.5f64.powi(k));
        let mut sum = Matrix2::IDENTITY;
        let mut term = Matrix2::IDENTITY;
        for n in 1..25 {
            term = term.mul(&small).scale(1.0 / n as f64);
            sum = sum.add(&term);
        }
        for _ in 0..k {
            sum = sum.mul(&sum);
        }
        sum
    }

    fn random_q(rng: &mut ChaCha8Rng, r: f64) -> Matrix2 {
        Matrix2::new(
            rng.random_range(-r..r),
            rng.random_range(-r..r),
            rng.random_range(-r..r),
            rng.random_range(-r..r),
        )
    }

    #[test]
    fn exponential_branches_match_scaling_and_squaring() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut qs: Vec<Matrix2> = (0..300).map(|_| random_q(&mut rng, 2.0)).collect();
        qs.extend([
            Matrix2::new(0.0, 1.0, 0.0, 0.0),
            Matrix2::new(1.0, 1.0, 0.0, 1.0),
            Matrix2::new(0.0, -1.0, 1.0, 0.0),
            Matrix2::scalar(0.5),
        ]);
        for q in qs {
            let jd = jordanize(&q, DEFAULT_EPS).unwrap();
            for t in [0.0, 0.3, 1.0, 2.0] {
                let oracle = expm_oracle(&q, t);
                let scale = oracle.max_abs().max(1.0);
                assert!(expm(&q, t).dist(&oracle) < 1e-10 * scale, "{q:?} t={t}");
                let via_j = jd.a_inv.mul(&expm_jordan(&jd.class, t)).mul(&jd.a);
                assert!(via_j.dist(&oracle) < 1e-10 * scale, "{q:?} t={t}");
            }
        }
    }

    #[test]
    fn free_streaming() {
        let s = solve_characteristic(&Matrix2::ZERO, [1.0, 0.0], 0.0, 2.0).unwrap();
        assert_eq!((s.v1, s.v2, s.x), (1.0, 0.0, 2.0));
    }

    #[test]
    fn rotation_characteristic() {
        let q = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        for t in [0.5, 1.0, 3.0, 7.0] {
            let s = solve_characteristic(&q, [1.0, 0.0], 0.0, t).unwrap();
            assert!((s.v1 - t.cos()).abs() < 1e-14);
            assert!((s.v2 - t.sin()).abs() < 1e-14);
            assert!((s.x - t.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn characteristic_matches_integration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let q = random_q(&mut rng, 1.0);
            let big_v0 = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let x0 = rng.random_range(-1.0..1.0);
            let opts = Dopri5Options { rtol: 1e-13, atol: 1e-14, ..Default::default() };
            let out = integrate(
                |_, y: &[f64; 3]| {
                    let v = q.apply([y[0], y[1]]);
                    [v[0], v[1], y[0]]
                },
                0.0,
                [big_v0[0], big_v0[1], x0],
                3.0,
                &opts,
                |_, _| Control::Continue,
            );
            let s = solve_characteristic(&q, big_v0, x0, 3.0).unwrap();
            let scale = out.y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            assert!((s.v1 - out.y[0]).abs() < 1e-10 * scale);
            assert!((s.v2 - out.y[1]).abs() < 1e-10 * scale);
            assert!((s.x - out.y[2]).abs() < 1e-10 * scale, "{q:?}");
        }
    }

    #[test]
    fn zero_gradients_stay_zero() {
        let q = Matrix2::new(0.3, -1.2, 0.8, -0.1);
        for t in [0.0, 1.0, 10.0] {
            let d = radon_derivatives(&q, GradientPair::ZERO, t).unwrap();
            assert_eq!((d.v1, d.v2), (0.0, 0.0));
        }
    }

    #[test]
    fn radon_matches_direct_on_nilpotent_cell() {
        let q = Matrix2::new(0.0, 1.0, 0.0, 0.0);
        let v0 = GradientPair::new(1.0, -2.0);
        let d = radon_derivatives(&q, v0, 1.0).unwrap();
        let states = integrate_gradients(&q, v0, 1.0, 1e-12).unwrap();
        let last = states.last().unwrap();
        assert!((d.v1 - last.v1).abs() < 1e-6 && (d.v2 - last.v2).abs() < 1e-6);
        match radon_derivatives(&q, v0, 2.0) {
            Err(Error::BlowupCrossed { t_star }) => assert!((t_star - GOLDEN).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rotation_orbit_is_periodic() {
        let q = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        let v0 = GradientPair::new(0.0, 0.4);
        let d = radon_derivatives(&q, v0, TAU).unwrap();
        assert!((d.v1 - 0.0).abs() < 1e-6 && (d.v2 - 0.4).abs() < 1e-6);
        let states = integrate_gradients(&q, v0, TAU, 1e-12).unwrap();
        let last = states.last().unwrap();
        assert!(last.v1.abs() < 1e-6 && (last.v2 - 0.4).abs() < 1e-6);
    }

    #[test]
    fn oracle_examples() {
        let v = integrate_extended_oracle(&Matrix2::new(0.3, 1.0, -2.0, 0.1), GradientPair::ZERO, 50.0, 1e8).unwrap();
        assert_eq!(v.outcome, OracleOutcome::Smooth);
        let v = integrate_extended_oracle(&Matrix2::new(0.0, 1.0, 0.0, 0.0), GradientPair::new(1.0, -2.0), 50.0, 1e8)
            .unwrap();
        assert_eq!(v.outcome, OracleOutcome::BlewUp);
        assert!((v.t_blow.unwrap() - GOLDEN).abs() < 1e-3);
        let v = integrate_extended_oracle(&Matrix2::new(0.0, -1.0, 1.0, 0.0), GradientPair::new(0.0, 0.4), 50.0, 1e8)
            .unwrap();
        assert_eq!(v.outcome, OracleOutcome::Smooth);
        assert!(integrate_extended_oracle(&Matrix2::ZERO, GradientPair::ZERO, 50.0, 10.0).is_err());
        assert!(integrate_extended_oracle(&Matrix2::ZERO, GradientPair::ZERO, -1.0, 1e8).is_err());
    }

    #[test]
    fn global_time_examples() {
        let q = Matrix2::new(0.0, 1.0, 0.0, 0.0);
        let v0 = GradientPair::new(1.0, -2.0);
        let uniform: Vec<_> = (0..5).map(|i| (i as f64, v0)).collect();
        let t = global_blowup_time(&q, &uniform).unwrap().unwrap();
        assert!((t - GOLDEN).abs() < 1e-12);
        // q = 1 − t/2 under free streaming
        let t = global_blowup_time(&Matrix2::ZERO, &[(0.0, GradientPair::new(-0.5, 0.0))]).unwrap();
        assert!((t.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(global_blowup_time(&q, &[(0.0, GradientPair::new(1.0, 1.0))]).unwrap(), None);
        assert!(global_blowup_time(&q, &[]).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let q = Matrix2::new(0.4, -1.1, 2.0, 0.3);
        let v = [0.7, -0.2];
        let j = gradient_jacobian(&q, v);
        let h = 1e-6;
        for k in 0..2 {
            let mut vp = v;
            let mut vm = v;
            vp[k] += h;
            vm[k] -= h;
            let (fp, fm) = (gradient_rhs(&q, &vp), gradient_rhs(&q, &vm));
            let col = [(fp[0] - fm[0]) / (2.0 * h), (fp[1] - fm[1]) / (2.0 * h)];
            let exact = if k == 0 { [j.a, j.c] } else { [j.b, j.d] };
            assert!((col[0] - exact[0]).abs() < 1e-8 && (col[1] - exact[1]).abs() < 1e-8);
        }
    }
}
