//! Euler-Poisson specializations `Q = [[−γ, k], [N, 0]]`, density ingestion
//! and sampling of the smooth region on the `(v₁(0), v₂(0))` plane.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{blows_up, criterion_a_distinct, criterion_b};
use crate::decisive::GradientPair;
use crate::error::{Error, Result};
use crate::linalg2::Matrix2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EPModel {
    pub k: i32,
    #[serde(rename = "N")]
    pub n: i32,
    pub gamma: f64,
}

impl EPModel {
    pub fn new(k: i32, n: i32, gamma: f64) -> Result<Self> {
        if k != 1 && k != -1 {
            return Err(Error::invalid(format!("k must be ±1, got {k}")));
        }
        if n != 0 && n != 1 {
            return Err(Error::invalid(format!("N must be 0 or 1, got {n}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be finite and non-negative, got {gamma}")));
        }
        Ok(EPModel { k, n, gamma })
    }

    /// Undamped case number: 1 `(k=1,N=0)`, 2 `(k=−1,N=0)`, 3 `(k=1,N=1)`,
    /// 4 `(k=−1,N=1)`.
    pub fn case(&self) -> u8 {
        match (self.k, self.n) {
            (1, 0) => 1,
            (-1, 0) => 2,
            (1, 1) => 3,
            _ => 4,
        }
    }

    fn require_undamped(&self) -> Result<()> {
        if self.gamma != 0.0 {
            return Err(Error::Unsupported(format!(
                "region formulas exist only for gamma = 0 (got {}); use the general dispatcher",
                self.gamma
            )));
        }
        Ok(())
    }
}

pub fn model_matrix(m: &EPModel) -> Matrix2 {
    Matrix2::new(-m.gamma, m.k as f64, m.n as f64, 0.0)
}

/// `E₀` on a uniform grid from `(E₀)ₓ = N − n₀` by the cumulative trapezoidal
/// rule, with `E₀(x[0]) = anchor`.
pub fn field_from_density(x: &[f64], n0: &[f64], n: i32, anchor: f64) -> Result<Vec<f64>> {
    if n != 0 && n != 1 {
        return Err(Error::invalid(format!("N must be 0 or 1, got {n}")));
    }
    if x.len() < 2 || x.len() != n0.len() {
        return Err(Error::invalid("need at least two grid points and one density value per point"));
    }
    if x.iter().chain(n0).any(|v| !v.is_finite()) || !anchor.is_finite() {
        return Err(Error::invalid("non-finite grid or density value"));
    }
    let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::invalid("grid must be increasing"));
    }
    if x.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::invalid("grid is not uniform"));
    }
    let nf = n as f64;
    let mut e = Vec::with_capacity(x.len());
    e.push(anchor);
    let mut acc = anchor;
    for i in 1..x.len() {
        acc += 0.5 * h * ((nf - n0[i - 1]) + (nf - n0[i]));
        e.push(acc);
    }
    Ok(e)
}

/// Whether the solution with initial gradients `v0` stays smooth (negated
/// dispatcher verdict). Requires `γ = 0`.
pub fn smooth_region_predicate(m: &EPModel, v0: GradientPair) -> Result<bool> {
    m.require_undamped()?;
    Ok(!blows_up(&model_matrix(m), v0, false)?.blows_up)
}

/// Blow-up predicate from the explicit per-case formulas, independent of the
/// Jordan normalization chosen by the dispatcher. Requires `γ = 0`.
pub fn printed_blowup_predicate(m: &EPModel, v0: GradientPair) -> Result<bool> {
    m.require_undamped()?;
    let GradientPair { v1, v2 } = GradientPair::checked(v0.v1, v0.v2)?;
    Ok(match m.case() {
        1 => criterion_b(0.0, v1, v2)?.blows_up,
        2 => criterion_b(0.0, v1, -v2)?.blows_up,
        3 => criterion_a_distinct(1.0, -1.0, 0.5 * (v1 + v2), 0.5 * (v1 - v2))?.blows_up,
        _ => 1.0 - 2.0 * v2 <= v1 * v1,
    })
}

/// Axis-aligned node grid on the `(v₁(0), v₂(0))` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::invalid(format!("grid needs nx, ny >= 2, got {}x{}", self.nx, self.ny)));
        }
        for r in [self.x_range, self.y_range] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::invalid(format!("bad range [{}, {}]", r[0], r[1])));
            }
        }
        Ok(())
    }

    fn coord(range: [f64; 2], n: usize, i: usize) -> f64 {
        if i + 1 == n {
            range[1]
        } else {
            range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64
        }
    }

    /// Node `(i, j)`, `i` along `v₁`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (Self::coord(self.x_range, self.nx, i), Self::coord(self.y_range, self.ny, j))
    }
}

/// Verdicts on a grid, row-major with `v₂` outer: index `j·nx + i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionGrid {
    pub q: Matrix2,
    #[serde(flatten)]
    pub spec: GridSpec,
    pub verdicts: Vec<bool>,
    pub t_stars: Vec<Option<f64>>,
}

impl RegionGrid {
    pub fn verdict(&self, i: usize, j: usize) -> bool {
        self.verdicts[j * self.spec.nx + i]
    }

    /// CSV with header `v1,v2,blows_up,t_star`; empty `t_star` when absent.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "v1,v2,blows_up,t_star")?;
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                let (x, y) = self.spec.node(i, j);
                let idx = j * self.spec.nx + i;
                write!(w, "{x:.16e},{y:.16e},{}", self.verdicts[idx] as u8)?;
                match self.t_stars[idx] {
                    Some(t) => writeln!(w, ",{t:.16e}")?,
                    None => writeln!(w, ",")?,
                }
            }
        }
        w.flush()
    }
}

/// Evaluates the dispatcher at every node in parallel.
pub fn sample_region(q: &Matrix2, spec: GridSpec, want_times: bool) -> Result<RegionGrid> {
    q.validate()?;
    spec.validate()?;
    let cells: Vec<(bool, Option<f64>)> = (0..spec.nx * spec.ny)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = spec.node(idx % spec.nx, idx / spec.nx);
            let v = blows_up(q, GradientPair::new(x, y), want_times)?;
            Ok((v.blows_up, v.t_star))
        })
        .collect::<Result<_>>()?;
    let (verdicts, t_stars) = cells.into_iter().unzip();
    Ok(RegionGrid { q: *q, spec, verdicts, t_stars })
}

/// Long-time behaviour of a smooth undamped solution, by model case.
///
/// `big_v0` is the state `(V, E)` at the foot of the characteristic; it only
/// has to be finite.
pub fn asymptotic_report(m: &EPModel, v0: GradientPair, big_v0: (f64, f64)) -> Result<&'static str> {
    m.require_undamped()?;
    if !(big_v0.0.is_finite() && big_v0.1.is_finite()) {
        return Err(Error::invalid("non-finite (V, E)"));
    }
    let verdict = blows_up(&model_matrix(m), v0, false)?;
    if verdict.blows_up {
        return Err(Error::NotApplicable(format!("gradients blow up ({})", verdict.clause)));
    }
    Ok(match m.case() {
        1 | 2 => "stabilizes-to-zero",
        3 => "stabilizes-to-affine",
        _ => "periodic",
    })
}
