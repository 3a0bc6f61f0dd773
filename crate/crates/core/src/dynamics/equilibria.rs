//! Equilibria of the gradient system `v' = −v₁v + Qv`.
//!
//! Points are found on the transformed plane `w = A·v`, where they sit on
//! the coordinate axes, and mapped back with `A⁻¹`. The linearization
//! eigenvalues `μ` come from closed forms in the eigenvalues of `Q`.

use num_complex::Complex64;
use serde::Serialize;

use super::gradient_jacobian;
use crate::error::Result;
use crate::linalg2::{jordanize, Matrix2, SpectralClass, DEFAULT_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumLabel {
    B1,
    B2,
    B3,
    B4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumKind {
    Node,
    Saddle,
    DicriticalNode,
    DegenerateNode,
    Focus,
    Center,
    /// A zero linearization eigenvalue.
    NonHyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    AsymptoticallyStable,
    Unstable,
    NonAsymptoticallyStable,
    UndeterminedByLinearization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub label: EquilibriumLabel,
    pub location: [f64; 2],
    #[serde(serialize_with = "ser_complex")]
    pub mu: [Complex64; 2],
    pub kind: EquilibriumKind,
    pub stability: Stability,
}

fn ser_complex<S: serde::Serializer>(mu: &[Complex64; 2], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    for z in mu {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Eigenvalues of a real 2×2 matrix, larger real part first.
pub fn eigenvalues(m: &Matrix2) -> [Complex64; 2] {
    let tau = 0.5 * m.trace();
    let d = 0.25 * m.discriminant();
    if d >= 0.0 {
        let r = d.sqrt();
        [Complex64::new(tau + r, 0.0), Complex64::new(tau - r, 0.0)]
    } else {
        let r = (-d).sqrt();
        [Complex64::new(tau, r), Complex64::new(tau, -r)]
    }
}

fn kind_of(mu: [Complex64; 2], jac: &Matrix2, tol: f64) -> EquilibriumKind {
    if mu[0].im.abs() > tol {
        return if mu[0].re.abs() <= tol { EquilibriumKind::Center } else { EquilibriumKind::Focus };
    }
    let (m1, m2) = (mu[0].re, mu[1].re);
    if m1.abs() <= tol || m2.abs() <= tol {
        EquilibriumKind::NonHyperbolic
    } else if m1 * m2 < 0.0 {
        EquilibriumKind::Saddle
    } else if (m1 - m2).abs() > tol {
        EquilibriumKind::Node
    } else if jac.sub(&Matrix2::scalar(0.5 * jac.trace())).max_abs() <= tol {
        EquilibriumKind::DicriticalNode
    } else {
        EquilibriumKind::DegenerateNode
    }
}

/// Equilibria of the gradient system for `q`.
pub fn equilibria(q: &Matrix2) -> Result<Vec<EquilibriumReport>> {
    let jd = jordanize(q, DEFAULT_EPS)?;
    let a = &jd.a;
    let det = jd.det_a;
    let scale = q.max_abs().max(1.0);
    let tol = 1e-10 * scale;
    let entry_tol = 1e-12;
    let real = |x: f64| Complex64::new(x, 0.0);

    // (label, w-plane point, μ)
    let mut pts: Vec<(EquilibriumLabel, [f64; 2], [Complex64; 2])> = Vec::new();
    match jd.class {
        SpectralClass::RealDistinct { lambda1: l1, lambda2: l2 } => {
            pts.push((EquilibriumLabel::B1, [0.0, 0.0], [real(l1), real(l2)]));
            if a.b.abs() > entry_tol {
                pts.push((EquilibriumLabel::B2, [0.0, -l2 * det / a.b], [real(l1 - l2), real(-l2)]));
            }
            if a.d.abs() > entry_tol {
                pts.push((EquilibriumLabel::B3, [l1 * det / a.d, 0.0], [real(-l1), real(l2 - l1)]));
            }
        }
        SpectralClass::RealRepeatedDiagonalizable { lambda } => {
            pts.push((EquilibriumLabel::B1, [0.0, 0.0], [real(lambda), real(lambda)]));
            if a.d.abs() > entry_tol {
                pts.push((EquilibriumLabel::B3, [lambda * det / a.d, 0.0], [real(-lambda), real(0.0)]));
            }
        }
        SpectralClass::RealRepeatedDefective { lambda } => {
            pts.push((EquilibriumLabel::B1, [0.0, 0.0], [real(lambda), real(lambda)]));
            if a.d.abs() > entry_tol {
                pts.push((EquilibriumLabel::B4, [lambda * det / a.d, 0.0], [real(-lambda), real(0.0)]));
            }
        }
        SpectralClass::ComplexPair { alpha, beta } => {
            pts.push((EquilibriumLabel::B1, [0.0, 0.0], [Complex64::new(alpha, beta), Complex64::new(alpha, -beta)]));
        }
    }

    let mut out = Vec::with_capacity(pts.len());
    for (label, w, mut mu) in pts {
        let v = jd.a_inv.apply(w);
        if label != EquilibriumLabel::B1 && v[0].hypot(v[1]) <= tol {
            continue;
        }
        if mu[0].re < mu[1].re {
            mu.swap(0, 1);
        }
        let jac = gradient_jacobian(q, v);
        let kind = kind_of(mu, &jac, tol);
        let stability = stability_of(label, &jd.class, mu, kind, tol);
        out.push(EquilibriumReport { label, location: v, mu, kind, stability });
    }
    Ok(out)
}

fn stability_of(
    label: EquilibriumLabel,
    class: &SpectralClass,
    mu: [Complex64; 2],
    kind: EquilibriumKind,
    tol: f64,
) -> Stability {
    if kind == EquilibriumKind::Center {
        return Stability::NonAsymptoticallyStable;
    }
    if mu.iter().any(|m| m.re > tol) {
        return Stability::Unstable;
    }
    if mu.iter().all(|m| m.re < -tol) {
        return Stability::AsymptoticallyStable;
    }
    // a zero real part: rows where a Chetaev function settles the question
    let [(l1, _), (l2, _)] = class.eigenvalues();
    let covered = match label {
        EquilibriumLabel::B1 => l1.abs() <= tol,
        EquilibriumLabel::B2 => (l1 - l2).abs() <= tol,
        EquilibriumLabel::B3 => (l1 - l2).abs() <= tol || l1.abs() <= tol,
        EquilibriumLabel::B4 => l1 >= -tol,
    };
    if covered {
        Stability::Unstable
    } else {
        Stability::UndeterminedByLinearization
    }
}
