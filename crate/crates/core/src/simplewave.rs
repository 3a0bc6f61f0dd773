//! Simple waves: first integrals of `dV₂/dV₁ = (cV₁ + dV₂)/(aV₁ + bV₂)`
//! and the Euler-Poisson simple-wave gradient formula.
//!
//! In the coordinates `W = A·V` the integral curves are level sets of
//! * `λ₁·ln|W₂| − λ₂·ln|W₁|` (diagonal form; logarithm of the power form),
//! * `λ·W₁/W₂ − ln|W₂|` (Jordan cell),
//! * `β·ln(W₁² + W₂²) + 2α·arctan(W₂/W₁)` (rotation block).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg2::{JordanData, Matrix2, SpectralClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstIntegralValue {
    pub value: f64,
    pub class: SpectralClass,
    pub w1: f64,
    pub w2: f64,
}

/// Evaluates the first integral at `(V₁, V₂)`.
pub fn first_integral(jd: &JordanData, v1: f64, v2: f64) -> Result<FirstIntegralValue> {
    if !(v1.is_finite() && v2.is_finite()) {
        return Err(Error::invalid("non-finite point"));
    }
    let [w1, w2] = jd.a.apply([v1, v2]);
    let value = match jd.class {
        SpectralClass::RealDistinct { lambda1: l1, lambda2: l2 } => diagonal_integral(l1, l2, w1, w2)?,
        SpectralClass::RealRepeatedDiagonalizable { lambda } => diagonal_integral(lambda, lambda, w1, w2)?,
        SpectralClass::RealRepeatedDefective { lambda } => {
            if w2 == 0.0 {
                return Err(Error::SingularLocus("W2 = 0"));
            }
            lambda * w1 / w2 - w2.abs().ln()
        }
        SpectralClass::ComplexPair { alpha, beta } => {
            if w1 == 0.0 {
                return Err(Error::SingularLocus("W1 = 0"));
            }
            beta * (w1 * w1 + w2 * w2).ln() + 2.0 * alpha * (w2 / w1).atan()
        }
    };
    Ok(FirstIntegralValue { value, class: jd.class, w1, w2 })
}

fn diagonal_integral(l1: f64, l2: f64, w1: f64, w2: f64) -> Result<f64> {
    if l1 != 0.0 && w2 == 0.0 {
        return Err(Error::SingularLocus("W2 = 0"));
    }
    if l2 != 0.0 && w1 == 0.0 {
        return Err(Error::SingularLocus("W1 = 0"));
    }
    let part = |l: f64, w: f64| if l == 0.0 { 0.0 } else { l * w.abs().ln() };
    Ok(part(l1, w2) - part(l2, w1))
}

/// Whether the first integral is constant along `path` within
/// `1e−6·(1 + median |value|)`. For the rotation block the `arctan` branch
/// jumps (multiples of `2πα`) are unwrapped along the path.
pub fn is_constant_along(jd: &JordanData, path: &[(f64, f64)]) -> Result<bool> {
    if path.len() <= 1 {
        return Ok(true);
    }
    let mut values = Vec::with_capacity(path.len());
    for &(v1, v2) in path {
        values.push(first_integral(jd, v1, v2)?.value);
    }
    if let SpectralClass::ComplexPair { alpha, .. } = jd.class {
        if alpha != 0.0 {
            let jump = 2.0 * PI * alpha;
            let mut offset = 0.0;
            for i in 1..values.len() {
                let raw = values[i] + offset;
                let k = ((raw - values[i - 1]) / jump).round();
                offset -= k * jump;
                values[i] = raw - k * jump;
            }
        }
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    Ok(hi - lo <= 1e-6 * (1.0 + median))
}

/// Integral curves are bounded iff the origin is a center:
/// `a = −d` and `d² + bc < 0`.
pub fn bounded_integral_curves(q: &Matrix2) -> bool {
    (q.a + q.d).abs() <= 1e-12 && q.d * q.d + q.b * q.c < 0.0
}

fn check_model(k: i32, n: i32) -> Result<()> {
    if k != 1 && k != -1 {
        return Err(Error::invalid(format!("k must be ±1, got {k}")));
    }
    if n != 0 && n != 1 {
        return Err(Error::invalid(format!("N must be 0 or 1, got {n}")));
    }
    Ok(())
}

fn check_sign(sign: i32) -> Result<f64> {
    match sign {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => Err(Error::invalid(format!("sign must be ±1, got {sign}"))),
    }
}

/// Simple-wave gradient `v = ±√(k(NV² − C)) / (sign(k)·V + C̃)`.
///
/// `c` is the value of `NV² − kE²` on the characteristic and `sign` the
/// sign of `E`.
pub fn ep_simple_wave_gradient(k: i32, n: i32, v: f64, c: f64, ctilde: f64, sign: i32) -> Result<f64> {
    check_model(k, n)?;
    let s = check_sign(sign)?;
    let (kf, nf) = (k as f64, n as f64);
    let rad = kf * (nf * v * v - c);
    if rad < 0.0 {
        return Err(Error::OutsideBranch);
    }
    let den = kf.signum() * v + ctilde;
    if den == 0.0 {
        return Err(Error::GradientSingularity);
    }
    Ok(s * rad.sqrt() / den)
}

/// Companion field gradient `e = NVv/(kE)`.
pub fn ep_simple_wave_companion(k: i32, n: i32, v_big: f64, e_big: f64, v: f64) -> Result<f64> {
    check_model(k, n)?;
    if e_big == 0.0 {
        return Err(Error::SingularLocus("E = 0"));
    }
    Ok(n as f64 * v_big * v / (k as f64 * e_big))
}

/// `C̃ = ±√(k(NV₀² − C))/V₀' − sign(k)·V₀` from the data at `x₀`.
pub fn ep_simple_wave_constant(k: i32, n: i32, v0: f64, dv0: f64, c: f64, sign: i32) -> Result<f64> {
    check_model(k, n)?;
    let s = check_sign(sign)?;
    let (kf, nf) = (k as f64, n as f64);
    let rad = kf * (nf * v0 * v0 - c);
    if rad < 0.0 {
        return Err(Error::OutsideBranch);
    }
    if dv0 == 0.0 {
        return Err(Error::GradientSingularity);
    }
    Ok(s * rad.sqrt() / dv0 - kf.signum() * v0)
}
