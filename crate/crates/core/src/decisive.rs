//! The decisive function `q(t)`: the scalar whose first positive zero marks
//! gradient blow-up along a characteristic.
//!
//! For every `Q` the derivative of `q` is `q'(t) = [exp(Qt)·v₀]₁`, so `q`
//! does not depend on the choice of transition matrix. The closed forms
//! below are written in terms of `φ₁(λ,t) = (e^{λt} − 1)/λ` and
//! `φ₂(λ,t) = ∫₀ᵗ s·e^{λs} ds`, evaluated without cancellation near `λ = 0`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg2::{JordanData, SpectralClass};

/// Default root tolerance on `|q|`; also the slack granted to non-strict
/// inequalities in the criteria.
pub const TIE_TOL: f64 = 1e-12;

/// Default search horizon for [`DecisiveFunction::first_positive_root`].
pub const DEFAULT_T_MAX: f64 = 1e3;

const MAX_BISECTIONS: usize = 2000;
const MAX_DOUBLINGS: usize = 1100;

/// Initial gradients `(V_x, E_x)` at a point `x₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientPair {
    pub v1: f64,
    pub v2: f64,
}

impl GradientPair {
    pub const ZERO: GradientPair = GradientPair { v1: 0.0, v2: 0.0 };

    pub const fn new(v1: f64, v2: f64) -> Self {
        GradientPair { v1, v2 }
    }

    pub fn checked(v1: f64, v2: f64) -> Result<Self> {
        if v1.is_finite() && v2.is_finite() {
            Ok(GradientPair { v1, v2 })
        } else {
            Err(Error::invalid(format!("non-finite gradient pair ({v1}, {v2})")))
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.v1, self.v2]
    }

    pub fn scale(&self, s: f64) -> Self {
        GradientPair { v1: s * self.v1, v2: s * self.v2 }
    }
}

impl From<[f64; 2]> for GradientPair {
    fn from(v: [f64; 2]) -> Self {
        GradientPair { v1: v[0], v2: v[1] }
    }
}

/// Decisive constants `C₁, C₂` together with the spectral class they belong to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisiveCoefficients {
    pub class: SpectralClass,
    pub c1: f64,
    pub c2: f64,
}

/// Computes `C₁, C₂` from the transition matrix and the initial gradients.
///
/// With `w = A·v₀`:
/// * diagonal `J`: `C₁ = a₂₂·w₁/det A`, `C₂ = −a₁₂·w₂/det A`;
/// * Jordan cell: `C₁ = (a₂₂·w₁ − a₁₂·w₂)/det A`, `C₂ = a₂₂·w₂/det A`;
/// * rotation block: `C₁ = (a₁₂·w₁ + a₂₂·w₂)/det A`, `C₂ = v₁`.
pub fn coefficients(jd: &JordanData, v0: GradientPair) -> DecisiveCoefficients {
    let a = &jd.a;
    let det = jd.det_a;
    let w = a.apply(v0.as_array());
    let (c1, c2) = match jd.class {
        SpectralClass::RealDistinct { .. } | SpectralClass::RealRepeatedDiagonalizable { .. } => {
            (a.d * w[0] / det, -a.b * w[1] / det)
        }
        SpectralClass::RealRepeatedDefective { .. } => ((a.d * w[0] - a.b * w[1]) / det, a.d * w[1] / det),
        SpectralClass::ComplexPair { .. } => ((a.b * w[0] + a.d * w[1]) / det, v0.v1),
    };
    DecisiveCoefficients { class: jd.class, c1, c2 }
}

/// Closed-form `q(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum DecisiveFunction {
    /// `q = 1 + C₁φ₁(λ₁,t) + C₂φ₁(λ₂,t)`; covers every diagonal `J`,
    /// including zero and repeated eigenvalues.
    Exponential { l1: f64, l2: f64, c1: f64, c2: f64 },
    /// `q = 1 + C₁φ₁(λ,t) + C₂φ₂(λ,t)`.
    JordanCell { l: f64, c1: f64, c2: f64 },
    /// `q = 1 + ∫₀ᵗ e^{αs}(C₁ sin βs + C₂ cos βs) ds`.
    Oscillatory { alpha: f64, beta: f64, c1: f64, c2: f64 },
}

/// Builds `q` for the class stored in `coeffs`.
pub fn build_q(coeffs: &DecisiveCoefficients) -> DecisiveFunction {
    let (c1, c2) = (coeffs.c1, coeffs.c2);
    match coeffs.class {
        SpectralClass::RealDistinct { lambda1, lambda2 } => {
            DecisiveFunction::Exponential { l1: lambda1, l2: lambda2, c1, c2 }
        }
        SpectralClass::RealRepeatedDiagonalizable { lambda } => {
            DecisiveFunction::Exponential { l1: lambda, l2: lambda, c1, c2 }
        }
        SpectralClass::RealRepeatedDefective { lambda } => DecisiveFunction::JordanCell { l: lambda, c1, c2 },
        SpectralClass::ComplexPair { alpha, beta } => DecisiveFunction::Oscillatory { alpha, beta, c1, c2 },
    }
}

/// `(e^{λt} − 1)/λ`, equal to `t` at `λ = 0`.
pub fn phi1(lambda: f64, t: f64) -> f64 {
    if lambda == 0.0 {
        t
    } else {
        (lambda * t).exp_m1() / lambda
    }
}

/// `(z·e^z − e^z + 1)/z²`.
fn g2(z: f64) -> f64 {
    if z.abs() < 0.5 {
        // Σ zⁿ/(n!(n+2))
        let mut term = 1.0;
        let mut sum = 0.5;
        for n in 1..30 {
            term *= z / n as f64;
            let add = term / (n as f64 + 2.0);
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else if z > 1.0 {
        (z.exp() * (z - 1.0) + 1.0) / (z * z)
    } else {
        (z * z.exp() - z.exp_m1()) / (z * z)
    }
}

/// `∫₀ᵗ s·e^{λs} ds`.
pub fn phi2(lambda: f64, t: f64) -> f64 {
    t * t * g2(lambda * t)
}

/// `c·x`, treating an exactly zero coefficient as annihilating infinities.
fn term(c: f64, x: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * x
    }
}

/// `±∞` according to the sign of the fastest non-decaying term, if any.
fn dominant_limit(terms: &[(f64, f64)]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &(rate, c) in terms {
        if c != 0.0 && rate >= 0.0 && best.is_none_or(|(r, _)| rate > r) {
            best = Some((rate, c));
        }
    }
    best.map(|(_, c)| c.signum() * f64::INFINITY)
}

impl DecisiveFunction {
    /// `q(t) − 1`.
    pub fn increment(&self, t: f64) -> f64 {
        match *self {
            DecisiveFunction::Exponential { l1, l2, c1, c2 } => {
                if l1 == l2 {
                    term(c1 + c2, phi1(l1, t))
                } else {
                    term(c1, phi1(l1, t)) + term(c2, phi1(l2, t))
                }
            }
            DecisiveFunction::JordanCell { l, c1, c2 } => term(c1, phi1(l, t)) + term(c2, phi2(l, t)),
            DecisiveFunction::Oscillatory { alpha, beta, c1, c2 } => {
                let (s, c) = (beta * t).sin_cos();
                let half = (0.5 * beta * t).sin();
                let growth = (alpha * t).exp();
                // e^{αt}cos βt − 1 without cancellation
                let cos_part = (alpha * t).exp_m1() * c - 2.0 * half * half;
                let sin_coef = c1 * alpha + c2 * beta;
                let cos_coef = c2 * alpha - c1 * beta;
                (term(sin_coef, growth * s) + term(cos_coef, cos_part)) / (alpha * alpha + beta * beta)
            }
        }
    }

    /// `q(t)`; exactly `1` at `t = 0`. Overflow yields `±∞` with the sign of `q`.
    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        let q = 1.0 + self.increment(t);
        if q.is_finite() {
            return q;
        }
        match self.scaled(t) {
            Some(s) if s != 0.0 => s.signum() * f64::INFINITY,
            _ => q,
        }
    }

    /// Largest exponential rate in `q`.
    fn growth_rate(&self) -> f64 {
        match *self {
            DecisiveFunction::Exponential { l1, l2, .. } => l1.max(l2),
            DecisiveFunction::JordanCell { l, .. } => l,
            DecisiveFunction::Oscillatory { alpha, .. } => alpha,
        }
    }

    /// `q(t)·e^{−μt}` for the growth rate `μ > 0`; `None` when `μ ≤ 0`.
    fn scaled(&self, t: f64) -> Option<f64> {
        let mu = self.growth_rate();
        if !(mu > 0.0) {
            return None;
        }
        let decay = (-mu * t).exp();
        // (1 − e^{−μt})/μ
        let rise = -(-mu * t).exp_m1() / mu;
        Some(match *self {
            DecisiveFunction::Exponential { l1, l2, c1, c2 } => {
                if l1 == l2 {
                    decay + term(c1 + c2, rise)
                } else {
                    let (c_fast, l_slow, c_slow) = if l1 > l2 { (c1, l2, c2) } else { (c2, l1, c1) };
                    // φ₁(λ_slow, t)·e^{−μt}
                    let slow = if l_slow > 0.0 {
                        ((l_slow - mu) * t).exp() * -(-l_slow * t).exp_m1() / l_slow
                    } else {
                        decay * phi1(l_slow, t)
                    };
                    decay + term(c_fast, rise) + term(c_slow, slow)
                }
            }
            DecisiveFunction::JordanCell { c1, c2, .. } => {
                decay + term(c1, rise) + term(c2, (t - rise) / mu)
            }
            DecisiveFunction::Oscillatory { alpha, beta, c1, c2 } => {
                let (s, c) = (beta * t).sin_cos();
                let cos_coef = c2 * alpha - c1 * beta;
                decay + ((c1 * alpha + c2 * beta) * s + cos_coef * c - term(cos_coef, decay)) / (alpha * alpha + beta * beta)
            }
        })
    }

    /// A value with the sign of `q(t)`, rescaled where `q` is large enough to
    /// lose its sign to overflow or cancellation.
    fn sign_value(&self, t: f64) -> f64 {
        if self.growth_rate() * t > 50.0 {
            if let Some(s) = self.scaled(t) {
                return s;
            }
        }
        self.eval(t)
    }

    /// `q'(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            DecisiveFunction::Exponential { l1, l2, c1, c2 } => term(c1, (l1 * t).exp()) + term(c2, (l2 * t).exp()),
            DecisiveFunction::JordanCell { l, c1, c2 } => {
                let lin = c1 + c2 * t;
                term(lin, (l * t).exp())
            }
            DecisiveFunction::Oscillatory { alpha, beta, c1, c2 } => {
                let (s, c) = (beta * t).sin_cos();
                let amp = c1 * s + c2 * c;
                term(amp, (alpha * t).exp())
            }
        }
    }

    pub fn is_trivial(&self) -> bool {
        let (c1, c2) = self.constants();
        c1 == 0.0 && c2 == 0.0
    }

    pub fn constants(&self) -> (f64, f64) {
        match *self {
            DecisiveFunction::Exponential { c1, c2, .. }
            | DecisiveFunction::JordanCell { c1, c2, .. }
            | DecisiveFunction::Oscillatory { c1, c2, .. } => (c1, c2),
        }
    }

    /// Zeros of `q'` in `(0, ∞)` in increasing order. For the oscillatory
    /// form only the points up to and including the first minimum are listed.
    pub fn critical_points(&self) -> Vec<f64> {
        match *self {
            DecisiveFunction::Exponential { l1, l2, c1, c2 } => {
                if l1 != l2 && c1 * c2 < 0.0 {
                    let t = (-c2 / c1).ln() / (l1 - l2);
                    if t > 0.0 && t.is_finite() {
                        return vec![t];
                    }
                }
                Vec::new()
            }
            DecisiveFunction::JordanCell { c1, c2, .. } => {
                if c2 != 0.0 {
                    let t = -c1 / c2;
                    if t > 0.0 && t.is_finite() {
                        return vec![t];
                    }
                }
                Vec::new()
            }
            DecisiveFunction::Oscillatory { beta, .. } => match self.first_minimum() {
                Some(tm) => {
                    let prev = tm - PI / beta;
                    if prev > 0.0 {
                        vec![prev, tm]
                    } else {
                        vec![tm]
                    }
                }
                None => Vec::new(),
            },
        }
    }

    /// First local minimum of the oscillatory form on `(0, ∞)`.
    pub fn first_minimum(&self) -> Option<f64> {
        match *self {
            DecisiveFunction::Oscillatory { beta, c1, c2, .. } => {
                if c1 == 0.0 && c2 == 0.0 {
                    return None;
                }
                Some(first_min_angle(c1, c2) / beta)
            }
            _ => None,
        }
    }

    /// Analytic value of `q` at the `m`-th local minimum `(θ + 2πm)/β` of the
    /// oscillatory form.
    fn oscillatory_min_value(&self, m: f64) -> (f64, f64) {
        let DecisiveFunction::Oscillatory { alpha, beta, c1, c2 } = *self else {
            unreachable!("oscillatory form only")
        };
        let t = (first_min_angle(c1, c2) + TAU * m) / beta;
        let r = c1.hypot(c2);
        let s = alpha * alpha + beta * beta;
        (t, 1.0 - (beta * r * (alpha * t).exp() + c2 * alpha - c1 * beta) / s)
    }

    /// `lim_{t→∞} q(t)` (possibly `±∞`). `None` for forms with persistent
    /// oscillation (rotation block with `α ≥ 0` and nonzero constants).
    pub fn limit(&self) -> Option<f64> {
        match *self {
            DecisiveFunction::Exponential { l1, l2, c1, c2 } => {
                if l1 == l2 {
                    let c = c1 + c2;
                    return Some(if c == 0.0 {
                        1.0
                    } else if l1 >= 0.0 {
                        c.signum() * f64::INFINITY
                    } else {
                        1.0 - c / l1
                    });
                }
                if let Some(inf) = dominant_limit(&[(l1, c1), (l2, c2)]) {
                    return Some(inf);
                }
                Some(1.0 - term(c1, 1.0 / l1) - term(c2, 1.0 / l2))
            }
            DecisiveFunction::JordanCell { l, c1, c2 } => {
                if l >= 0.0 {
                    let lead = if c2 != 0.0 { c2 } else { c1 };
                    if lead == 0.0 {
                        Some(1.0)
                    } else {
                        Some(lead.signum() * f64::INFINITY)
                    }
                } else {
                    Some(1.0 - c1 / l + c2 / (l * l))
                }
            }
            DecisiveFunction::Oscillatory { alpha, beta, c1, c2 } => {
                if c1 == 0.0 && c2 == 0.0 {
                    Some(1.0)
                } else if alpha < 0.0 {
                    Some(1.0 - (c2 * alpha - c1 * beta) / (alpha * alpha + beta * beta))
                } else {
                    None
                }
            }
        }
    }

    /// `inf_{t>0} q(t)` computed analytically (may be `−∞`).
    pub fn infimum(&self) -> f64 {
        let mut inf: f64 = 1.0;
        match *self {
            DecisiveFunction::Oscillatory { alpha, .. } => {
                if self.is_trivial() {
                    return 1.0;
                }
                if alpha > 0.0 {
                    return f64::NEG_INFINITY;
                }
                inf = inf.min(self.oscillatory_min_value(0.0).1);
                if let Some(l) = self.limit() {
                    inf = inf.min(l);
                }
            }
            _ => {
                for t in self.critical_points() {
                    inf = inf.min(self.eval(t));
                }
                if let Some(l) = self.limit() {
                    inf = inf.min(l);
                }
            }
        }
        inf
    }

    /// Smallest `t* ∈ (0, t_max]` with `q(t*) = 0`; `t_max` may be `+∞`.
    ///
    /// The search walks the intervals between analytic extrema, on each of
    /// which `q` is monotone, and bisects the first interval where `q`
    /// changes sign. A minimum with `0 < q ≤ tol` is reported as a tangency.
    pub fn first_positive_root(&self, t_max: f64, tol: f64) -> Result<Option<f64>> {
        if !(t_max > 0.0) || t_max.is_nan() {
            return Err(Error::invalid(format!("t_max must be positive, got {t_max}")));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::invalid(format!("tol must be positive, got {tol}")));
        }
        if self.is_trivial() {
            return Ok(None);
        }
        if let DecisiveFunction::Oscillatory { alpha, beta, .. } = *self {
            if alpha > 0.0 {
                let t = self.growing_oscillation_root(beta, tol)?;
                return Ok(t.filter(|&t| t <= t_max));
            }
        }

        let mut points: Vec<(f64, bool)> = self
            .critical_points()
            .into_iter()
            .filter(|&t| t < t_max)
            .map(|t| (t, true))
            .collect();
        let oscillatory = matches!(self, DecisiveFunction::Oscillatory { .. });
        if t_max.is_finite() {
            let past_first_min = oscillatory && self.first_minimum().is_some_and(|m| m < t_max);
            if !past_first_min {
                points.push((t_max, false));
            }
        } else if !oscillatory && self.limit().is_some_and(|l| l < 0.0) {
            let mut hi = points.last().map_or(1.0, |p| p.0).max(1.0);
            let mut found = false;
            for _ in 0..MAX_DOUBLINGS {
                hi *= 2.0;
                let q = self.sign_value(hi);
                if q.is_nan() {
                    return Err(Error::NumericalFailure(format!("q is NaN at t = {hi}")));
                }
                if q <= 0.0 {
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::NumericalFailure("unbounded root search did not bracket".into()));
            }
            points.push((hi, false));
        }

        let mut lo = 0.0;
        for (p, interior) in points {
            let q = self.sign_value(p);
            if q.is_nan() {
                return Err(Error::NumericalFailure(format!("q is NaN at t = {p}")));
            }
            if q <= 0.0 {
                if q == 0.0 {
                    return Ok(Some(p));
                }
                return self.bisect(lo, p).map(Some);
            }
            if interior && self.eval(p) <= tol {
                return Ok(Some(p));
            }
            lo = p;
        }
        Ok(None)
    }

    /// Root search for `α > 0`: jump to the first minimum whose analytic
    /// value is `≤ tol`, then bisect on the preceding monotone stretch.
    fn growing_oscillation_root(&self, beta: f64, tol: f64) -> Result<Option<f64>> {
        let DecisiveFunction::Oscillatory { alpha, c1, c2, .. } = *self else {
            unreachable!("oscillatory form only")
        };
        let r = c1.hypot(c2);
        let s = alpha * alpha + beta * beta;
        let theta = first_min_angle(c1, c2);
        let need = s * (1.0 - tol) - (c2 * alpha - c1 * beta);
        let mut m = if need <= 0.0 {
            0.0
        } else {
            let t_req = (need / (beta * r)).ln() / alpha;
            ((beta * t_req - theta) / TAU).ceil().max(0.0)
        };
        if !m.is_finite() {
            return Err(Error::NumericalFailure("minimum index overflow".into()));
        }
        while m > 0.0 && self.oscillatory_min_value(m - 1.0).1 <= tol {
            m -= 1.0;
        }
        let mut guard = 0;
        while self.oscillatory_min_value(m).1 > tol {
            m += 1.0;
            guard += 1;
            if guard > 64 {
                return Err(Error::NumericalFailure("minimum index search did not settle".into()));
            }
        }
        let (t_min, _) = self.oscillatory_min_value(m);
        let q_min = self.sign_value(t_min);
        if q_min > 0.0 {
            return Ok(Some(t_min));
        }
        if q_min == 0.0 {
            return Ok(Some(t_min));
        }
        let lo = (t_min - PI / beta).max(0.0);
        if self.sign_value(lo) <= 0.0 {
            return Err(Error::NumericalFailure(format!("no sign change before minimum at t = {t_min}")));
        }
        self.bisect(lo, t_min).map(Some)
    }

    /// Bisection on `[lo, hi]` with `q(lo) > 0 ≥ q(hi)` down to adjacent floats.
    fn bisect(&self, mut lo: f64, mut hi: f64) -> Result<f64> {
        let mut q_lo = self.sign_value(lo);
        let mut q_hi = self.sign_value(hi);
        for _ in 0..MAX_BISECTIONS {
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                return Ok(if q_lo.abs() < q_hi.abs() { lo } else { hi });
            }
            let q = self.sign_value(mid);
            if q.is_nan() {
                return Err(Error::NumericalFailure(format!("q is NaN at t = {mid}")));
            }
            if q <= 0.0 {
                hi = mid;
                q_hi = q;
            } else {
                lo = mid;
                q_lo = q;
            }
        }
        Err(Error::NumericalFailure("bisection did not converge".into()))
    }
}

/// Angle `θ ∈ (0, 2π]` with `βt = θ` the first positive minimum of
/// `∫ e^{αs}(C₁ sin βs + C₂ cos βs) ds`.
pub(crate) fn first_min_angle(c1: f64, c2: f64) -> f64 {
    let th = (-c2).atan2(c1);
    if th <= 0.0 {
        th + TAU
    } else {
        th
    }
}
