//! Closed-form blow-up criteria for every spectral route and the dispatcher
//! from `(Q, v₀)` to a verdict.
//!
//! Each criterion evaluates the printed inequalities directly. Non-strict
//! inequalities (`≤`, `≥`) are granted a slack of [`TIE_TOL`] toward
//! blow-up; strict ones are evaluated exactly.
//!
//! Clause labels are stable strings of the form `route:clause`:
//!
//! | route          | spectrum                               | clauses                      |
//! |----------------|----------------------------------------|------------------------------|
//! | `distinct`     | `λ₁ > λ₂`, both nonzero                | `1a`–`1d`, `2a`–`2d`         |
//! | `repeated`     | `λI`, `λ ≠ 0`                          | `1`, `2`                     |
//! | `zero-second`  | `λ₁ > 0 = λ₂`                          | `1`–`3`                      |
//! | `zero-first`   | `0 = λ₁ > λ₂`                          | `1`–`3`                      |
//! | `cell`         | Jordan cell, `λ ≠ 0`                   | `1a`–`1c`, `2a`–`2c`         |
//! | `nilpotent`    | Jordan cell with `λ = 0`, or `Q = 0`   | `1`–`3`                      |
//! | `complex`      | `α ± iβ`                               | `1`, `2`, `3a`–`3d`, `trivial` |
//!
//! A verdict without blow-up carries the clause `route:none`.

use serde::Serialize;

use crate::decisive::{build_q, coefficients, first_min_angle, GradientPair, TIE_TOL};
use crate::error::{Error, Result};
use crate::linalg2::{jordanize, Matrix2, SpectralClass, DEFAULT_EPS};

/// Outcome of a criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupVerdict {
    pub blows_up: bool,
    pub clause: String,
    pub t_star: Option<f64>,
}

impl BlowupVerdict {
    fn fired(route: &str, clause: &str) -> Self {
        BlowupVerdict { blows_up: true, clause: format!("{route}:{clause}"), t_star: None }
    }

    fn smooth(route: &str) -> Self {
        BlowupVerdict { blows_up: false, clause: format!("{route}:none"), t_star: None }
    }
}

/// Which eigenvalue is zero in the one-zero layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroPosition {
    /// `λ₁ = 0 > λ₂`.
    First,
    /// `λ₁ > 0 = λ₂`.
    Second,
}

fn check_finite(vals: &[f64]) -> Result<()> {
    if vals.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("non-finite criterion input {vals:?}")))
    }
}

/// `x ≤ y` with slack toward `true`.
fn le(x: f64, y: f64) -> bool {
    x <= y + TIE_TOL
}

/// `x ≥ y` with slack toward `true`.
fn ge(x: f64, y: f64) -> bool {
    x + TIE_TOL >= y
}

/// Value of `q` at its interior minimum for two distinct nonzero rates and
/// `C₁ > 0 > C₂`.
fn distinct_min_value(l1: f64, l2: f64, c1: f64, c2: f64) -> f64 {
    c1 * (-c2 / c1).powf(l1 / (l1 - l2)) * (1.0 / l1 - 1.0 / l2) + 1.0 - c1 / l1 - c2 / l2
}

/// Two distinct nonzero real eigenvalues.
pub fn criterion_a_distinct(l1: f64, l2: f64, c1: f64, c2: f64) -> Result<BlowupVerdict> {
    check_finite(&[l1, l2, c1, c2])?;
    if l1 == l2 || l1 == 0.0 || l2 == 0.0 {
        return Err(Error::WrongCase(format!("distinct nonzero eigenvalues required, got ({l1}, {l2})")));
    }
    let (l1, l2, c1, c2) = if l1 > l2 { (l1, l2, c1, c2) } else { (l2, l1, c2, c1) };
    const R: &str = "distinct";
    let dip = |c1: f64, c2: f64| c1 > 0.0 && c2 < 0.0 && c1 + c2 < 0.0 && le(distinct_min_value(l1, l2, c1, c2), 0.0);
    let tail = |c1: f64, c2: f64| -> Option<&'static str> {
        if c1 == 0.0 && c2 < 0.0 && l2 > 0.0 {
            Some("c")
        } else if c1 == 0.0 && c2 < l2 && l2 < 0.0 {
            Some("d")
        } else {
            None
        }
    };
    let v = if l1 > 0.0 {
        if c1 < 0.0 {
            BlowupVerdict::fired(R, "1a")
        } else if dip(c1, c2) {
            BlowupVerdict::fired(R, "1b")
        } else if let Some(k) = tail(c1, c2) {
            BlowupVerdict::fired(R, &format!("1{k}"))
        } else {
            BlowupVerdict::smooth(R)
        }
    } else if dip(c1, c2) {
        BlowupVerdict::fired(R, "2a")
    } else if c1 < 0.0 && c1 / l1 + c2 / l2 > 1.0 {
        BlowupVerdict::fired(R, "2b")
    } else if let Some(k) = tail(c1, c2) {
        BlowupVerdict::fired(R, &format!("2{k}"))
    } else {
        BlowupVerdict::smooth(R)
    };
    Ok(v)
}

/// Scalar `Q = λI` with `λ ≠ 0`.
pub fn criterion_a_repeated(lambda: f64, c1: f64, c2: f64) -> Result<BlowupVerdict> {
    check_finite(&[lambda, c1, c2])?;
    if lambda == 0.0 {
        return Err(Error::WrongCase("repeated criterion needs λ ≠ 0".into()));
    }
    const R: &str = "repeated";
    let s = c1 + c2;
    Ok(if lambda > 0.0 && s < 0.0 {
        BlowupVerdict::fired(R, "1")
    } else if lambda < 0.0 && s < lambda {
        BlowupVerdict::fired(R, "2")
    } else {
        BlowupVerdict::smooth(R)
    })
}

/// One zero and one nonzero eigenvalue. `lambda` is the nonzero one; it
/// must be positive for [`ZeroPosition::Second`] and negative for
/// [`ZeroPosition::First`].
pub fn criterion_a_one_zero(lambda: f64, zero: ZeroPosition, c1: f64, c2: f64) -> Result<BlowupVerdict> {
    check_finite(&[lambda, c1, c2])?;
    match zero {
        ZeroPosition::Second => {
            if lambda <= 0.0 {
                return Err(Error::WrongCase(format!("zero-second layout needs λ₁ > 0, got {lambda}")));
            }
            const R: &str = "zero-second";
            Ok(if c1 < 0.0 {
                BlowupVerdict::fired(R, "1")
            } else if c1 == 0.0 && c2 < 0.0 {
                BlowupVerdict::fired(R, "2")
            } else if c1 > 0.0 && c2 < 0.0 && c1 + c2 < 0.0 && le(lambda + c2 * (-c2 / c1).ln(), c1 + c2) {
                BlowupVerdict::fired(R, "3")
            } else {
                BlowupVerdict::smooth(R)
            })
        }
        ZeroPosition::First => {
            if lambda >= 0.0 {
                return Err(Error::WrongCase(format!("zero-first layout needs λ₂ < 0, got {lambda}")));
            }
            const R: &str = "zero-first";
            Ok(if c1 < 0.0 {
                BlowupVerdict::fired(R, "1")
            } else if c1 == 0.0 && c2 < lambda {
                BlowupVerdict::fired(R, "2")
            } else if c1 > 0.0 && c2 < 0.0 && c1 + c2 < 0.0 && ge(lambda + c1 * (-c1 / c2).ln(), c1 + c2) {
                BlowupVerdict::fired(R, "3")
            } else {
                BlowupVerdict::smooth(R)
            })
        }
    }
}

/// Single Jordan cell with eigenvalue `λ` (zero allowed).
pub fn criterion_b(lambda: f64, c1: f64, c2: f64) -> Result<BlowupVerdict> {
    check_finite(&[lambda, c1, c2])?;
    if lambda == 0.0 {
        const R: &str = "nilpotent";
        return Ok(if c2 < 0.0 {
            BlowupVerdict::fired(R, "1")
        } else if c2 == 0.0 && c1 < 0.0 {
            BlowupVerdict::fired(R, "2")
        } else if c2 > 0.0 && c1 < 0.0 && ge(c1 * c1, 2.0 * c2) {
            BlowupVerdict::fired(R, "3")
        } else {
            BlowupVerdict::smooth(R)
        });
    }
    const R: &str = "cell";
    let dip = c1 < 0.0 && c2 > 0.0 && ge(c2 * (-c1 * lambda / c2).exp_m1() + c1 * lambda - lambda * lambda, 0.0);
    Ok(if lambda > 0.0 {
        if c2 < 0.0 {
            BlowupVerdict::fired(R, "1a")
        } else if dip {
            BlowupVerdict::fired(R, "1b")
        } else if c2 == 0.0 && c1 < 0.0 {
            BlowupVerdict::fired(R, "1c")
        } else {
            BlowupVerdict::smooth(R)
        }
    } else if c2 < 0.0 && 1.0 - c1 / lambda + c2 / (lambda * lambda) < 0.0 {
        BlowupVerdict::fired(R, "2a")
    } else if dip {
        BlowupVerdict::fired(R, "2b")
    } else if c2 == 0.0 && c1 < lambda {
        BlowupVerdict::fired(R, "2c")
    } else {
        BlowupVerdict::smooth(R)
    })
}

/// `arctan(C₂/C₁)` with `C₁ = 0` mapped to `±π/2` by the sign of `C₂`.
fn arctan_ratio(c1: f64, c2: f64) -> f64 {
    if c1 == 0.0 {
        c2.signum() * std::f64::consts::FRAC_PI_2
    } else {
        (c2 / c1).atan()
    }
}

/// Complex pair `α ± iβ`.
pub fn criterion_c(alpha: f64, beta: f64, c1: f64, c2: f64) -> Result<BlowupVerdict> {
    check_finite(&[alpha, beta, c1, c2])?;
    if beta <= 0.0 {
        return Err(Error::WrongCase(format!("complex criterion needs β > 0, got {beta}")));
    }
    const R: &str = "complex";
    if c1 == 0.0 && c2 == 0.0 {
        return Ok(BlowupVerdict { blows_up: false, clause: format!("{R}:trivial"), t_star: None });
    }
    if alpha > 0.0 {
        return Ok(BlowupVerdict::fired(R, "1"));
    }
    if alpha == 0.0 {
        return Ok(if le(beta * beta + 2.0 * c1 * beta, c2 * c2) {
            BlowupVerdict::fired(R, "2")
        } else {
            BlowupVerdict::smooth(R)
        });
    }
    // first minimum on the lattice βtₙ = πn − arctan(C₂/C₁)
    let at = arctan_ratio(c1, c2);
    let t_n = |n: f64| (std::f64::consts::PI * n - at) / beta;
    let (clause, t_min) = match (c1 >= 0.0, c2 >= 0.0) {
        (true, true) => ("3a", t_n(2.0)),
        (false, true) => ("3b", t_n(1.0)),
        (true, false) => ("3c", t_n(0.0)),
        (false, false) => ("3d", t_n(1.0)),
    };
    debug_assert!((t_min * beta - first_min_angle(c1, c2)).abs() < 1e-9 * (1.0 + t_min * beta));
    let r = c1.hypot(c2);
    let lhs = -beta * (alpha * t_min).exp() * r;
    let rhs = c2 * alpha - c1 * beta - alpha * alpha - beta * beta;
    Ok(if le(lhs, rhs) { BlowupVerdict::fired(R, clause) } else { BlowupVerdict::smooth(R) })
}

/// Routes decisive constants to the matching criterion.
pub fn dispatch(class: SpectralClass, c1: f64, c2: f64) -> Result<BlowupVerdict> {
    match class {
        SpectralClass::RealDistinct { lambda1, lambda2 } => {
            if lambda2 == 0.0 {
                criterion_a_one_zero(lambda1, ZeroPosition::Second, c1, c2)
            } else if lambda1 == 0.0 {
                criterion_a_one_zero(lambda2, ZeroPosition::First, c1, c2)
            } else {
                criterion_a_distinct(lambda1, lambda2, c1, c2)
            }
        }
        SpectralClass::RealRepeatedDiagonalizable { lambda } => {
            if lambda == 0.0 {
                // Q = 0: q = 1 + (C₁+C₂)t
                criterion_b(0.0, c1 + c2, 0.0)
            } else {
                criterion_a_repeated(lambda, c1, c2)
            }
        }
        SpectralClass::RealRepeatedDefective { lambda } => criterion_b(lambda, c1, c2),
        SpectralClass::ComplexPair { alpha, beta } => criterion_c(alpha, beta, c1, c2),
    }
}

/// Full pipeline `Q, v₀ → verdict`, optionally with the first blow-up time.
pub fn blows_up(q: &Matrix2, v0: GradientPair, want_time: bool) -> Result<BlowupVerdict> {
    let v0 = GradientPair::checked(v0.v1, v0.v2)?;
    let jd = jordanize(q, DEFAULT_EPS)?;
    let coeffs = coefficients(&jd, v0);
    let mut verdict = dispatch(coeffs.class, coeffs.c1, coeffs.c2)?;
    if want_time && verdict.blows_up {
        let t = build_q(&coeffs).first_positive_root(f64::INFINITY, TIE_TOL)?;
        match t {
            Some(t) => verdict.t_star = Some(t),
            None => {
                return Err(Error::NumericalFailure(format!(
                    "criterion {} fired but q has no located root",
                    verdict.clause
                )))
            }
        }
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fires(v: Result<BlowupVerdict>) -> (bool, String) {
        let v = v.unwrap();
        (v.blows_up, v.clause)
    }

    #[test]
    fn distinct_examples() {
        assert_eq!(fires(criterion_a_distinct(1.0, -1.0, -1.0, 0.5)), (true, "distinct:1a".into()));
        assert_eq!(fires(criterion_a_distinct(1.0, -1.0, 1.0, -3.0)).0, false);
        assert_eq!(fires(criterion_a_distinct(1.0, -1.0, 1.0, -5.0)), (true, "distinct:1b".into()));
        assert_eq!(fires(criterion_a_distinct(1.0, -1.0, 0.5, 0.5)).0, false);
        assert_eq!(fires(criterion_a_distinct(2.0, 1.0, 0.0, -0.1)), (true, "distinct:1c".into()));
        assert_eq!(fires(criterion_a_distinct(1.0, -1.0, 0.0, -1.5)), (true, "distinct:1d".into()));
        assert_eq!(fires(criterion_a_distinct(1.0, -1.0, 0.0, -0.5)).0, false);
        assert_eq!(fires(criterion_a_distinct(-1.0, -2.0, -2.0, 0.5)), (true, "distinct:2b".into()));
        assert_eq!(fires(criterion_a_distinct(-1.0, -2.0, 0.0, -3.0)), (true, "distinct:2d".into()));
        assert!(matches!(criterion_a_distinct(1.0, 1.0, 0.0, 0.0), Err(Error::WrongCase(_))));
        assert!(matches!(criterion_a_distinct(1.0, 0.0, 0.0, 0.0), Err(Error::WrongCase(_))));
    }

    #[test]
    fn repeated_examples() {
        assert!(criterion_a_repeated(2.0, -0.5, -0.5).unwrap().blows_up);
        assert!(!criterion_a_repeated(-1.0, -0.25, -0.25).unwrap().blows_up);
        assert!(criterion_a_repeated(-1.0, -1.0, -0.5).unwrap().blows_up);
        assert!(!criterion_a_repeated(2.0, 0.0, 0.0).unwrap().blows_up);
        assert!(matches!(criterion_a_repeated(0.0, 1.0, 1.0), Err(Error::WrongCase(_))));
    }

    #[test]
    fn one_zero_examples() {
        let z2 = ZeroPosition::Second;
        assert_eq!(fires(criterion_a_one_zero(1.0, z2, -1.0, 7.0)), (true, "zero-second:1".into()));
        assert!(!criterion_a_one_zero(1.0, z2, 1.0, -2.0).unwrap().blows_up);
        assert_eq!(fires(criterion_a_one_zero(1.0, z2, 1.0, -4.0)), (true, "zero-second:3".into()));
        assert_eq!(fires(criterion_a_one_zero(-1.0, ZeroPosition::First, 0.0, -2.0)), (true, "zero-first:2".into()));
        assert!(matches!(criterion_a_one_zero(-1.0, z2, 0.0, 0.0), Err(Error::WrongCase(_))));
        assert!(matches!(criterion_a_one_zero(1.0, ZeroPosition::First, 0.0, 0.0), Err(Error::WrongCase(_))));
    }

    #[test]
    fn cell_examples() {
        assert_eq!(fires(criterion_b(0.0, 3.0, -1.0)), (true, "nilpotent:1".into()));
        assert_eq!(fires(criterion_b(0.0, -2.0, 1.0)), (true, "nilpotent:3".into()));
        assert!(!criterion_b(0.0, -1.0, 1.0).unwrap().blows_up);
        assert_eq!(fires(criterion_b(-1.0, -3.0, -1.0)), (true, "cell:2a".into()));
        assert_eq!(fires(criterion_b(-1.0, -1.5, 0.0)), (true, "cell:2c".into()));
        assert!(!criterion_b(-1.0, -0.5, 0.0).unwrap().blows_up);
    }

    #[test]
    fn complex_examples() {
        assert_eq!(fires(criterion_c(0.0, 1.0, -0.6, 0.0)), (true, "complex:2".into()));
        assert!(!criterion_c(0.0, 1.0, -0.4, 0.0).unwrap().blows_up);
        assert_eq!(fires(criterion_c(0.3, 2.0, 1.0, 0.0)), (true, "complex:1".into()));
        assert_eq!(fires(criterion_c(0.3, 2.0, 0.0, 0.0)), (false, "complex:trivial".into()));
        assert!(matches!(criterion_c(0.0, 0.0, 1.0, 1.0), Err(Error::WrongCase(_))));
    }

    #[test]
    fn complex_decaying_matches_root_search() {
        use crate::decisive::DecisiveFunction;
        for (c1, c2) in [(-1.0, -1.0), (1.0, 1.0), (-2.0, 1.0), (2.0, -1.5), (0.0, -1.3), (0.0, 1.3), (-1.1, 0.0)] {
            let v = criterion_c(-0.2, 1.0, c1, c2).unwrap();
            let f = DecisiveFunction::Oscillatory { alpha: -0.2, beta: 1.0, c1, c2 };
            let root = f.first_positive_root(f64::INFINITY, TIE_TOL).unwrap();
            assert_eq!(v.blows_up, root.is_some(), "C = ({c1}, {c2}): {v:?}");
        }
    }

    #[test]
    fn dispatcher_examples() {
        let rot = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        assert!(blows_up(&rot, GradientPair::new(0.0, 0.6), false).unwrap().blows_up);
        for q in [rot, Matrix2::ZERO, Matrix2::new(1.0, 2.0, 3.0, 4.0)] {
            let v = blows_up(&q, GradientPair::ZERO, true).unwrap();
            assert!(!v.blows_up);
            assert_eq!(v.t_star, None);
        }
        let v = blows_up(&Matrix2::new(0.0, 1.0, 0.0, 0.0), GradientPair::new(1.0, -2.0), true).unwrap();
        assert!(v.blows_up);
        assert!((v.t_star.unwrap() - 1.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_routes_to_free_streaming() {
        let v = blows_up(&Matrix2::ZERO, GradientPair::new(-1.0, 5.0), true).unwrap();
        assert_eq!(v.clause, "nilpotent:2");
        assert!((v.t_star.unwrap() - 1.0).abs() < 1e-14);
        assert!(!blows_up(&Matrix2::ZERO, GradientPair::new(0.0, -3.0), false).unwrap().blows_up);
    }

    #[test]
    fn non_finite_inputs_rejected() {
        assert!(blows_up(&Matrix2::ZERO, GradientPair::new(f64::NAN, 0.0), false).is_err());
        assert!(criterion_c(0.0, 1.0, f64::INFINITY, 0.0).is_err());
    }
}
