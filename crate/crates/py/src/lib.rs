//! Python bindings. Matrices are passed as `(a, b, c, d)` in row-major order
//! and gradient pairs as `(v1, v2)`.

use ::gradcat as core;
use core::criteria;
use core::decisive::{self, GradientPair};
use core::dynamics::{self, OracleOptions};
use core::epmodels::{self, EPModel, GridSpec};
use core::error::Error;
use core::linalg2::{jordanize, Matrix2, SpectralClass, DEFAULT_EPS};
use core::simplewave;
use pyo3::exceptions::{PyArithmeticError, PyNotImplementedError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

type Quad = (f64, f64, f64, f64);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::SingularLocus(_) | Error::OutsideBranch | Error::NotApplicable(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Unsupported(_) => PyNotImplementedError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn matrix(q: Quad) -> PyResult<Matrix2> {
    Matrix2::checked(q.0, q.1, q.2, q.3).map_err(to_py)
}

fn pair(v: (f64, f64)) -> PyResult<GradientPair> {
    GradientPair::checked(v.0, v.1).map_err(to_py)
}

fn rows(m: &Matrix2) -> [[f64; 2]; 2] {
    [m.row1(), m.row2()]
}

fn class_dict<'py>(py: Python<'py>, class: &SpectralClass) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("class", class.name())?;
    match *class {
        SpectralClass::RealDistinct { lambda1, lambda2 } => {
            d.set_item("lambda1", lambda1)?;
            d.set_item("lambda2", lambda2)?;
        }
        SpectralClass::RealRepeatedDiagonalizable { lambda } | SpectralClass::RealRepeatedDefective { lambda } => {
            d.set_item("lambda", lambda)?;
        }
        SpectralClass::ComplexPair { alpha, beta } => {
            d.set_item("alpha", alpha)?;
            d.set_item("beta", beta)?;
        }
    }
    Ok(d)
}

/// Spectral class, Jordan form `J`, transition matrix `A` and `det A`.
#[pyfunction]
fn classify(py: Python<'_>, q: Quad) -> PyResult<Bound<'_, PyDict>> {
    let jd = jordanize(&matrix(q)?, DEFAULT_EPS).map_err(to_py)?;
    let d = class_dict(py, &jd.class)?;
    let eig: Vec<(f64, f64)> = jd.class.eigenvalues().to_vec();
    d.set_item("eigenvalues", eig)?;
    d.set_item("J", rows(&jd.j))?;
    d.set_item("A", rows(&jd.a))?;
    d.set_item("detA", jd.det_a)?;
    Ok(d)
}

/// Blow-up verdict `{blows_up, clause, t_star}`.
#[pyfunction]
#[pyo3(signature = (q, v0, want_time = false))]
fn blows_up(py: Python<'_>, q: Quad, v0: (f64, f64), want_time: bool) -> PyResult<Bound<'_, PyDict>> {
    let v = criteria::blows_up(&matrix(q)?, pair(v0)?, want_time).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("blows_up", v.blows_up)?;
    d.set_item("clause", v.clause)?;
    d.set_item("t_star", v.t_star)?;
    Ok(d)
}

/// Closed-form decisive function `q(t)` for a matrix and initial gradients.
#[pyclass(name = "DecisiveFunction", frozen)]
struct PyDecisive {
    inner: decisive::DecisiveFunction,
}

#[pymethods]
impl PyDecisive {
    #[new]
    fn new(q: Quad, v0: (f64, f64)) -> PyResult<Self> {
        let jd = jordanize(&matrix(q)?, DEFAULT_EPS).map_err(to_py)?;
        Ok(PyDecisive { inner: decisive::build_q(&decisive::coefficients(&jd, pair(v0)?)) })
    }

    fn __call__(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    fn derivative(&self, t: f64) -> f64 {
        self.inner.derivative(t)
    }

    /// `(C1, C2)`.
    fn constants(&self) -> (f64, f64) {
        self.inner.constants()
    }

    fn infimum(&self) -> f64 {
        self.inner.infimum()
    }

    #[pyo3(signature = (t_max = f64::INFINITY, tol = decisive::TIE_TOL))]
    fn first_positive_root(&self, t_max: f64, tol: f64) -> PyResult<Option<f64>> {
        self.inner.first_positive_root(t_max, tol).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("DecisiveFunction({:?})", self.inner)
    }
}

/// Direct integration of the gradient system.
#[pyfunction]
#[pyo3(signature = (q, v0, t_max = 50.0, blow_threshold = 1e8))]
fn oracle(py: Python<'_>, q: Quad, v0: (f64, f64), t_max: f64, blow_threshold: f64) -> PyResult<Bound<'_, PyDict>> {
    let opts = OracleOptions { t_max, blow_threshold, ..Default::default() };
    let v = dynamics::integrate_extended_oracle_with(&matrix(q)?, pair(v0)?, &opts).map_err(to_py)?;
    let d = PyDict::new(py);
    let outcome = match v.outcome {
        dynamics::OracleOutcome::BlewUp => "blew-up",
        dynamics::OracleOutcome::Smooth => "smooth",
        dynamics::OracleOutcome::Undecided => "undecided",
    };
    d.set_item("outcome", outcome)?;
    d.set_item("t_blow", v.t_blow)?;
    d.set_item("max_norm", v.max_norm)?;
    Ok(d)
}

/// Gradients at time `t` from the closed form; raises if `q` vanishes first.
#[pyfunction]
fn radon_derivatives(q: Quad, v0: (f64, f64), t: f64) -> PyResult<(f64, f64)> {
    let s = dynamics::radon_derivatives(&matrix(q)?, pair(v0)?, t).map_err(to_py)?;
    Ok((s.v1, s.v2))
}

/// `(x, V1, V2)` at time `t` on the characteristic from `x0`.
#[pyfunction]
fn solve_characteristic(q: Quad, big_v0: (f64, f64), x0: f64, t: f64) -> PyResult<(f64, f64, f64)> {
    let s = dynamics::solve_characteristic(&matrix(q)?, [big_v0.0, big_v0.1], x0, t).map_err(to_py)?;
    Ok((s.x, s.v1, s.v2))
}

/// Equilibria of the gradient system as a list of dicts.
#[pyfunction]
fn equilibria(py: Python<'_>, q: Quad) -> PyResult<Vec<Bound<'_, PyDict>>> {
    dynamics::equilibria(&matrix(q)?)
        .map_err(to_py)?
        .into_iter()
        .map(|e| {
            let d = PyDict::new(py);
            d.set_item("label", format!("{:?}", e.label))?;
            d.set_item("location", (e.location[0], e.location[1]))?;
            d.set_item("mu", e.mu.iter().map(|z| (z.re, z.im)).collect::<Vec<_>>())?;
            d.set_item("kind", format!("{:?}", e.kind))?;
            d.set_item("stability", format!("{:?}", e.stability))?;
            Ok(d)
        })
        .collect()
}

/// First integral of `dV2/dV1 = (cV1 + dV2)/(aV1 + bV2)` at `(V1, V2)`.
#[pyfunction]
fn first_integral(q: Quad, v1: f64, v2: f64) -> PyResult<f64> {
    let jd = jordanize(&matrix(q)?, DEFAULT_EPS).map_err(to_py)?;
    Ok(simplewave::first_integral(&jd, v1, v2).map_err(to_py)?.value)
}

#[pyfunction]
fn bounded_integral_curves(q: Quad) -> PyResult<bool> {
    Ok(simplewave::bounded_integral_curves(&matrix(q)?))
}

#[pyfunction]
fn ep_simple_wave_gradient(k: i32, n: i32, v: f64, c: f64, ctilde: f64, sign: i32) -> PyResult<f64> {
    simplewave::ep_simple_wave_gradient(k, n, v, c, ctilde, sign).map_err(to_py)
}

/// `Q = [[-gamma, k], [N, 0]]` as `(a, b, c, d)`.
#[pyfunction]
#[pyo3(signature = (k, n, gamma = 0.0))]
fn model_matrix(k: i32, n: i32, gamma: f64) -> PyResult<Quad> {
    let m = epmodels::model_matrix(&EPModel::new(k, n, gamma).map_err(to_py)?);
    Ok((m.a, m.b, m.c, m.d))
}

#[pyfunction]
fn field_from_density(x: Vec<f64>, n0: Vec<f64>, n: i32, anchor: f64) -> PyResult<Vec<f64>> {
    epmodels::field_from_density(&x, &n0, n, anchor).map_err(to_py)
}

#[pyfunction]
fn smooth_region_predicate(k: i32, n: i32, v0: (f64, f64)) -> PyResult<bool> {
    epmodels::smooth_region_predicate(&EPModel::new(k, n, 0.0).map_err(to_py)?, pair(v0)?).map_err(to_py)
}

/// Verdicts on a grid; lists are row-major with `v2` outer.
#[pyfunction]
#[pyo3(signature = (q, xr, yr, nx, ny, want_times = false))]
fn sample_region(
    py: Python<'_>,
    q: Quad,
    xr: (f64, f64),
    yr: (f64, f64),
    nx: usize,
    ny: usize,
    want_times: bool,
) -> PyResult<Bound<'_, PyDict>> {
    let spec = GridSpec { x_range: [xr.0, xr.1], y_range: [yr.0, yr.1], nx, ny };
    let q = matrix(q)?;
    let grid = py.detach(|| epmodels::sample_region(&q, spec, want_times)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("nx", nx)?;
    d.set_item("ny", ny)?;
    d.set_item("v1", (0..nx).map(|i| spec.node(i, 0).0).collect::<Vec<_>>())?;
    d.set_item("v2", (0..ny).map(|j| spec.node(0, j).1).collect::<Vec<_>>())?;
    d.set_item("blows_up", grid.verdicts)?;
    d.set_item("t_star", grid.t_stars)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "gradcat")]
fn gradcat_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDecisive>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(blows_up, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(radon_derivatives, m)?)?;
    m.add_function(wrap_pyfunction!(solve_characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(equilibria, m)?)?;
    m.add_function(wrap_pyfunction!(first_integral, m)?)?;
    m.add_function(wrap_pyfunction!(bounded_integral_curves, m)?)?;
    m.add_function(wrap_pyfunction!(ep_simple_wave_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(model_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(field_from_density, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_region_predicate, m)?)?;
    m.add_function(wrap_pyfunction!(sample_region, m)?)?;
    Ok(())
}
