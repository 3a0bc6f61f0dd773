//! 2×2 real linear algebra: spectrum classification and a deterministic
//! real Jordan normal form `A·Q·A⁻¹ = J`.
//!
//! Rows of the transition matrix `A` are left (generalized) eigenvectors of
//! `Q`, so that `w = A·v` diagonalizes (or block-reduces) the derivative
//! system. The normalization is fixed so outputs are reproducible:
//!
//! * real distinct / scalar: each row is scaled so that its largest-magnitude
//!   entry equals `+1`, rows ordered by `λ₁ > λ₂`;
//! * Jordan cell: the eigenvector row is normalized as above, the generalized
//!   row is taken orthogonal to it, and both rows are then scaled together so
//!   the generalized row's largest entry is `+1` (independent row scaling
//!   would change the off-diagonal `1` of `J`);
//! * complex pair: the first row is the unit vector `e₁` or `e₂` (whichever
//!   gives the better conditioned `A`) and the second row follows from it.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default degeneracy tolerance for [`classify_spectrum`] and [`jordanize`].
pub const DEFAULT_EPS: f64 = 1e-10;

/// Eigenvalues (and real parts) with `|λ| ≤ ZERO_SNAP·max(1, ‖Q‖_max)` are
/// treated as exactly zero.
pub const ZERO_SNAP: f64 = 1e-10;

/// Real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Matrix2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };
    pub const ZERO: Matrix2 = Matrix2 { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Matrix2 { a, b, c, d }
    }

    /// Builds a matrix after checking that every entry is finite.
    pub fn checked(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = Matrix2 { a, b, c, d };
        m.validate()?;
        Ok(m)
    }

    pub fn from_rows(r1: [f64; 2], r2: [f64; 2]) -> Self {
        Matrix2 { a: r1[0], b: r1[1], c: r2[0], d: r2[1] }
    }

    pub fn diag(x: f64, y: f64) -> Self {
        Matrix2 { a: x, b: 0.0, c: 0.0, d: y }
    }

    pub fn scalar(x: f64) -> Self {
        Matrix2::diag(x, x)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries().iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid(format!("matrix has non-finite entries: {self:?}")))
        }
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn row1(&self) -> [f64; 2] {
        [self.a, self.b]
    }

    pub fn row2(&self) -> [f64; 2] {
        [self.c, self.d]
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `(a+d)² − 4(ad−bc)`, evaluated as `(a−d)² + 4bc`.
    pub fn discriminant(&self) -> f64 {
        let diff = self.a - self.d;
        diff * diff + 4.0 * self.b * self.c
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn transpose(&self) -> Self {
        Matrix2 { a: self.a, b: self.c, c: self.b, d: self.d }
    }

    pub fn scale(&self, s: f64) -> Self {
        Matrix2 { a: s * self.a, b: s * self.b, c: s * self.c, d: s * self.d }
    }

    pub fn add(&self, o: &Matrix2) -> Self {
        Matrix2 { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d }
    }

    pub fn sub(&self, o: &Matrix2) -> Self {
        Matrix2 { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }

    pub fn mul(&self, o: &Matrix2) -> Self {
        Matrix2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Row vector times matrix, `y·M`.
    pub fn left_apply(&self, y: [f64; 2]) -> [f64; 2] {
        [y[0] * self.a + y[1] * self.c, y[0] * self.b + y[1] * self.d]
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Matrix2 { a: self.d / det, b: -self.b / det, c: -self.c / det, d: self.a / det })
    }

    /// Max-norm distance between two matrices.
    pub fn dist(&self, o: &Matrix2) -> f64 {
        self.sub(o).max_abs()
    }
}

/// Spectral type of a real 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum SpectralClass {
    /// Two real eigenvalues with `lambda1 > lambda2`.
    RealDistinct { lambda1: f64, lambda2: f64 },
    /// Scalar matrix `λI`.
    #[serde(rename = "diagonalizable-repeated")]
    RealRepeatedDiagonalizable { lambda: f64 },
    /// Repeated eigenvalue with a single eigenvector (one Jordan cell).
    #[serde(rename = "defective")]
    RealRepeatedDefective { lambda: f64 },
    /// Eigenvalues `alpha ± i·beta`, `beta > 0`.
    #[serde(rename = "complex")]
    ComplexPair { alpha: f64, beta: f64 },
}

impl SpectralClass {
    /// Stable short name used in JSON output.
    pub fn name(&self) -> &'static str {
        match self {
            SpectralClass::RealDistinct { .. } => "real-distinct",
            SpectralClass::RealRepeatedDiagonalizable { .. } => "diagonalizable-repeated",
            SpectralClass::RealRepeatedDefective { .. } => "defective",
            SpectralClass::ComplexPair { .. } => "complex",
        }
    }

    /// Eigenvalues as `(re, im)` pairs, larger real part (or `+iβ`) first.
    pub fn eigenvalues(&self) -> [(f64, f64); 2] {
        match *self {
            SpectralClass::RealDistinct { lambda1, lambda2 } => [(lambda1, 0.0), (lambda2, 0.0)],
            SpectralClass::RealRepeatedDiagonalizable { lambda }
            | SpectralClass::RealRepeatedDefective { lambda } => [(lambda, 0.0), (lambda, 0.0)],
            SpectralClass::ComplexPair { alpha, beta } => [(alpha, beta), (alpha, -beta)],
        }
    }

    /// Canonical real Jordan form for this class.
    pub fn jordan_form(&self) -> Matrix2 {
        match *self {
            SpectralClass::RealDistinct { lambda1, lambda2 } => Matrix2::diag(lambda1, lambda2),
            SpectralClass::RealRepeatedDiagonalizable { lambda } => Matrix2::scalar(lambda),
            SpectralClass::RealRepeatedDefective { lambda } => Matrix2::new(lambda, 1.0, 0.0, lambda),
            SpectralClass::ComplexPair { alpha, beta } => Matrix2::new(alpha, beta, -beta, alpha),
        }
    }
}

fn snap(x: f64, threshold: f64) -> f64 {
    if x.abs() <= threshold {
        0.0
    } else {
        x
    }
}

/// Classifies the spectrum of `q`.
///
/// With `s = max(1, ‖Q‖²_max)` and discriminant `D`, the result is complex
/// when `D < −eps·s`, real distinct when `D > eps·s`, and otherwise a
/// repeated root that is defective iff `‖Q − λI‖_max > eps·s`.
pub fn classify_spectrum(q: &Matrix2, eps: f64) -> Result<SpectralClass> {
    q.validate()?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("degeneracy tolerance must be positive, got {eps}")));
    }
    let norm = q.max_abs();
    let s = norm.powi(2).max(1.0);
    let zero = ZERO_SNAP * norm.max(1.0);
    let disc = q.discriminant();
    let tr = q.trace();

    if disc < -eps * s {
        let alpha = snap(0.5 * tr, zero);
        let beta = 0.5 * (-disc).sqrt();
        return Ok(SpectralClass::ComplexPair { alpha, beta });
    }
    if disc > eps * s {
        let root = disc.sqrt();
        let det = q.det();
        // avoid cancellation in the smaller-magnitude root
        let (l1, l2) = if tr >= 0.0 {
            let l1 = 0.5 * (tr + root);
            (l1, det / l1)
        } else {
            let l2 = 0.5 * (tr - root);
            (det / l2, l2)
        };
        let (l1, l2) = (snap(l1, zero), snap(l2, zero));
        return Ok(SpectralClass::RealDistinct { lambda1: l1.max(l2), lambda2: l1.min(l2) });
    }
    let lambda = snap(0.5 * tr, zero);
    let nil = q.sub(&Matrix2::scalar(0.5 * tr));
    if nil.max_abs() > eps * s {
        Ok(SpectralClass::RealRepeatedDefective { lambda })
    } else {
        Ok(SpectralClass::RealRepeatedDiagonalizable { lambda })
    }
}

/// Similarity data `A·Q·A⁻¹ = J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JordanData {
    pub class: SpectralClass,
    pub j: Matrix2,
    pub a: Matrix2,
    pub a_inv: Matrix2,
    pub det_a: f64,
}

impl JordanData {
    /// Builds the record from a transition matrix, computing `A⁻¹` and `det A`.
    pub fn from_transition(class: SpectralClass, a: Matrix2) -> Result<Self> {
        let a_inv = a
            .inverse()
            .ok_or_else(|| Error::NumericalFailure(format!("singular transition matrix {a:?}")))?;
        Ok(JordanData { class, j: class.jordan_form(), a, a_inv, det_a: a.det() })
    }

    /// `‖A·Q·A⁻¹ − J‖_max`.
    pub fn residual(&self, q: &Matrix2) -> f64 {
        self.a.mul(q).mul(&self.a_inv).dist(&self.j)
    }

    /// Replaces `A` by `diag(s, r)·A`. Only admissible for diagonal `J`
    /// unless `s == r`.
    pub fn rescale_rows(&self, s: f64, r: f64) -> Result<Self> {
        let a = Matrix2::new(s * self.a.a, s * self.a.b, r * self.a.c, r * self.a.d);
        JordanData::from_transition(self.class, a)
    }
}

/// Normalizes a row so its largest-magnitude entry is `+1`.
fn normalize_row(y: [f64; 2]) -> [f64; 2] {
    let pivot = if y[0].abs() >= y[1].abs() { y[0] } else { y[1] };
    [y[0] / pivot, y[1] / pivot]
}

/// Left null vector of a (numerically) singular matrix, not normalized.
fn left_null(n: &Matrix2) -> [f64; 2] {
    let u = [n.c, -n.a];
    let w = [n.d, -n.b];
    if u[0].hypot(u[1]) >= w[0].hypot(w[1]) {
        u
    } else {
        w
    }
}

fn left_eigvec(q: &Matrix2, lambda: f64) -> Result<[f64; 2]> {
    let y = left_null(&q.sub(&Matrix2::scalar(lambda)));
    if y[0] == 0.0 && y[1] == 0.0 {
        return Err(Error::NumericalFailure(format!("no eigenvector for λ = {lambda}")));
    }
    Ok(normalize_row(y))
}

/// Computes the real Jordan form of `q` with the normalization described in
/// the module docs.
pub fn jordanize(q: &Matrix2, eps: f64) -> Result<JordanData> {
    let class = classify_spectrum(q, eps)?;
    let a = match class {
        SpectralClass::RealDistinct { lambda1, lambda2 } => {
            Matrix2::from_rows(left_eigvec(q, lambda1)?, left_eigvec(q, lambda2)?)
        }
        SpectralClass::RealRepeatedDiagonalizable { .. } => Matrix2::IDENTITY,
        SpectralClass::RealRepeatedDefective { lambda } => {
            let nil = q.sub(&Matrix2::scalar(lambda));
            let eig = left_eigvec(q, lambda)?;
            // minimal-norm solution of g·N = eig via N⁺ = Nᵀ/‖N‖²_F (rank one)
            let fro2: f64 = nil.entries().iter().map(|x| x * x).sum();
            let g = nil.transpose().left_apply(eig);
            let g = [g[0] / fro2, g[1] / fro2];
            let pivot = if g[0].abs() >= g[1].abs() { g[0] } else { g[1] };
            Matrix2::from_rows(g, eig).scale(1.0 / pivot)
        }
        SpectralClass::ComplexPair { alpha, beta } => {
            if q.b.abs() >= q.c.abs() {
                Matrix2::from_rows([1.0, 0.0], [(q.a - alpha) / beta, q.b / beta])
            } else {
                Matrix2::from_rows([0.0, 1.0], [q.c / beta, (q.d - alpha) / beta])
            }
        }
    };
    JordanData::from_transition(class, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cls(a: f64, b: f64, c: f64, d: f64) -> SpectralClass {
        classify_spectrum(&Matrix2::new(a, b, c, d), DEFAULT_EPS).unwrap()
    }

    #[test]
    fn classifies_model_matrices() {
        assert_eq!(cls(0.0, 1.0, 1.0, 0.0), SpectralClass::RealDistinct { lambda1: 1.0, lambda2: -1.0 });
        assert_eq!(cls(0.0, -1.0, 1.0, 0.0), SpectralClass::ComplexPair { alpha: 0.0, beta: 1.0 });
        assert_eq!(cls(0.0, 1.0, 0.0, 0.0), SpectralClass::RealRepeatedDefective { lambda: 0.0 });
        assert_eq!(cls(2.0, 0.0, 0.0, 2.0), SpectralClass::RealRepeatedDiagonalizable { lambda: 2.0 });
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            classify_spectrum(&Matrix2::new(f64::NAN, 0.0, 0.0, 0.0), 1e-10),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            classify_spectrum(&Matrix2::new(0.0, f64::INFINITY, 0.0, 0.0), 1e-10),
            Err(Error::InvalidInput(_))
        ));
        assert!(classify_spectrum(&Matrix2::IDENTITY, 0.0).is_err());
        assert!(Matrix2::checked(1.0, 2.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn small_eigenvalues_snap_to_zero() {
        // eigenvalues 1 and ~1e-14
        let q = Matrix2::new(1.0, 1.0, 1e-14, 1e-14);
        match classify_spectrum(&q, DEFAULT_EPS).unwrap() {
            SpectralClass::RealDistinct { lambda1, lambda2 } => {
                assert!((lambda1 - 1.0).abs() < 1e-12);
                assert_eq!(lambda2, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symmetric_swap_transition() {
        let q = Matrix2::new(0.0, 1.0, 1.0, 0.0);
        let jd = jordanize(&q, DEFAULT_EPS).unwrap();
        assert_eq!(jd.a, Matrix2::new(1.0, 1.0, 1.0, -1.0));
        assert_eq!(jd.det_a, -2.0);
        assert!(jd.residual(&q) < 1e-15);
    }

    #[test]
    fn diagonal_is_its_own_form() {
        let q = Matrix2::diag(3.0, -1.0);
        let jd = jordanize(&q, DEFAULT_EPS).unwrap();
        assert_eq!(jd.j, q);
        assert_eq!(jd.a, Matrix2::IDENTITY);
    }

    #[test]
    fn cell_transitions_match_model_cases() {
        let jd = jordanize(&Matrix2::new(0.0, 1.0, 0.0, 0.0), DEFAULT_EPS).unwrap();
        assert_eq!(jd.a, Matrix2::IDENTITY);
        let jd = jordanize(&Matrix2::new(0.0, -1.0, 0.0, 0.0), DEFAULT_EPS).unwrap();
        assert_eq!(jd.a, Matrix2::diag(1.0, -1.0));
        assert_eq!(jd.j, Matrix2::new(0.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn rotation_transition() {
        let q = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        let jd = jordanize(&q, DEFAULT_EPS).unwrap();
        assert_eq!(jd.a, Matrix2::diag(1.0, -1.0));
        assert_eq!(jd.j, Matrix2::new(0.0, 1.0, -1.0, 0.0));
    }

    #[test]
    fn random_similarity_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20_000 {
            let q = Matrix2::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            );
            let jd = jordanize(&q, DEFAULT_EPS).unwrap();
            let tol = 1e-10 * q.max_abs().max(1.0);
            assert!(jd.residual(&q) < tol, "residual {} for {q:?}", jd.residual(&q));
            let prod = jd.a.mul(&jd.a_inv);
            assert!(prod.dist(&Matrix2::IDENTITY) < 1e-12);
            if let SpectralClass::ComplexPair { beta, .. } = jd.class {
                assert!(beta > 0.0);
            }
            if let SpectralClass::RealDistinct { lambda1, lambda2 } = jd.class {
                assert!(lambda1 > lambda2);
            }
        }
    }

    #[test]
    fn constructed_degenerate_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let lambda: f64 = rng.random_range(-2.0..2.0);
            let (p, r): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let s: f64 = rng.random_range(0.5..1.5);
            let q = Matrix2::new(lambda - s * p * r, s * p * p, -s * r * r, lambda + s * p * r);
            if q.sub(&Matrix2::scalar(lambda)).max_abs() < 1e-3 {
                continue;
            }
            let jd = jordanize(&q, DEFAULT_EPS).unwrap();
            assert!(matches!(jd.class, SpectralClass::RealRepeatedDefective { .. }), "{q:?}");
            assert!(jd.residual(&q) < 1e-10 * q.max_abs().max(1.0));
        }
    }
}
