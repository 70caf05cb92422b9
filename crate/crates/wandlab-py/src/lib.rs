//! Python module `wandlab`. Structured results cross the boundary as JSON
//! and come back as plain dicts and lists.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict, PyInt};
use serde::Serialize;
use wandlab_core::compose::{self, WordPattern};
use wandlab_core::graph::geometry::check_bounded_geometry;
use wandlab_core::graph::thin::{antitone_sweep, comparison_centers, DEFAULT_R0};
use wandlab_core::graph::build_graph;
use wandlab_core::model::{self, ModelMap};
use wandlab_core::orbit;
use wandlab_core::params::{self, Degree};
use wandlab_core::render::{self, RasterJob, UChain};
use wandlab_core::tower;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(err)?;
    py.import("json")?.call_method1("loads", (s,))
}

#[pyclass(name = "ParameterSet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams(params::ParameterSet);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (lambda_over_pi, alpha = 1.0))]
    fn new(lambda_over_pi: u64, alpha: f64) -> PyResult<Self> {
        let p = params::ParameterSet::new(lambda_over_pi).with_alpha(alpha);
        p.validate().map_err(err)?;
        Ok(PyParams(p))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        params::ParameterSet::from_json(text).map(PyParams).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn lambda_over_pi(&self) -> u64 {
        self.0.lambda_over_pi
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta()
    }

    /// lambda as a certified (lo, hi) pair.
    fn lambda_interval(&self) -> (f64, f64) {
        let l = self.0.lambda();
        (l.lo, l.hi)
    }

    /// Local degree d_n: an int when exact, a TowerReal bound otherwise.
    fn degree<'py>(&self, py: Python<'py>, n: u64) -> PyResult<Bound<'py, PyAny>> {
        match self.0.d(n) {
            Degree::Exact(d) => py.get_type::<PyInt>().call1((d.to_string(),)),
            Degree::Tower(t) => Ok(Bound::new(py, PyTower(t))?.into_any()),
        }
    }

    fn w(&self, n: u64) -> Complex64 {
        self.0.w(n)
    }

    fn __repr__(&self) -> String {
        format!("ParameterSet(lambda_over_pi={}, alpha={})", self.0.lambda_over_pi, self.0.alpha)
    }
}

#[pyclass(name = "TowerReal", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTower(tower::TowerReal);

#[pymethods]
impl PyTower {
    #[new]
    fn new(x: f64) -> PyResult<Self> {
        tower::TowerReal::from_real(x).map(PyTower).map_err(err)
    }

    #[getter]
    fn sign(&self) -> i8 {
        self.0.sign()
    }

    #[getter]
    fn level(&self) -> u32 {
        self.0.level()
    }

    #[getter]
    fn index(&self) -> (f64, f64) {
        let i = self.0.index();
        (i.lo, i.hi)
    }

    /// Enclosing (lo, hi) of the value, or None past f64 range.
    fn to_interval(&self) -> Option<(f64, f64)> {
        self.0.to_interval().map(|i| (i.lo, i.hi))
    }

    fn exp(&self) -> PyResult<Self> {
        self.0.exp().map(PyTower).map_err(err)
    }

    fn ln(&self) -> PyResult<Self> {
        self.0.ln().map(PyTower).map_err(err)
    }

    fn __add__(&self, o: &PyTower) -> PyResult<Self> {
        self.0.add(&o.0).map(PyTower).map_err(err)
    }

    fn __mul__(&self, o: &PyTower) -> PyResult<Self> {
        self.0.mul(&o.0).map(PyTower).map_err(err)
    }

    fn __neg__(&self) -> Self {
        PyTower(self.0.neg())
    }

    /// "less", "equal", "greater" or "unknown".
    fn compare(&self, o: &PyTower) -> String {
        format!("{:?}", self.0.compare(&o.0)).to_lowercase()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("TowerReal({})", self.0)
    }
}

#[pyfunction]
fn compute_a(n: u64, lambda_over_pi: u64) -> PyResult<f64> {
    model::compute_a(n, lambda_over_pi).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (params, z, n_disks = 16))]
fn model_eval(params: &PyParams, z: Complex64, n_disks: u64) -> PyResult<Complex64> {
    let m = ModelMap::new(params.0.clone(), n_disks).map_err(err)?;
    m.eval(z).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (params, x_max = 400.0))]
fn escape_condition<'py>(py: Python<'py>, params: &PyParams, x_max: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &orbit::check_escape_condition(&params.0, x_max).map_err(err)?)
}

#[pyfunction]
fn iterate_orbit<'py>(py: Python<'py>, params: &PyParams, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &orbit::iterate_orbit(&params.0, n).map_err(err)?)
}

#[pyfunction]
fn adjust_parameters<'py>(py: Python<'py>, params: &PyParams, n_max: usize) -> PyResult<Bound<'py, PyAny>> {
    let a = py.detach(|| orbit::adjust_parameters(&params.0, n_max)).map_err(err)?;
    to_py(py, &a.to_json_value())
}

#[pyfunction]
fn graph<'py>(py: Python<'py>, params: &PyParams, n_disks: u64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &build_graph(&params.0, n_disks).map_err(err)?)
}

#[pyfunction]
fn bounded_geometry<'py>(py: Python<'py>, params: &PyParams, n_disks: u64) -> PyResult<Bound<'py, PyAny>> {
    let g = build_graph(&params.0, n_disks).map_err(err)?;
    to_py(py, &check_bounded_geometry(&g))
}

/// Thin-area comparison: alpha doubled, lambda doubled, and the
/// strong-parameter bound, on the built-in sample centers.
#[pyfunction]
#[pyo3(signature = (params, n_disks = 11, r0 = DEFAULT_R0, strong_lambda_over_pi = 10))]
fn thin_sweep<'py>(
    py: Python<'py>,
    params: &PyParams,
    n_disks: u64,
    r0: f64,
    strong_lambda_over_pi: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = &params.0;
    let centers = comparison_centers(p.lambda_over_pi).map_err(err)?;
    let steeper = p.clone().with_alpha(2.0 * p.alpha);
    let mut wider = p.clone();
    wider.lambda_over_pi *= 2;
    let strong = params::ParameterSet::new(strong_lambda_over_pi).with_alpha(2.0 * p.alpha);
    let s = py.detach(|| antitone_sweep(p, &steeper, &wider, &strong, &centers, n_disks, r0)).map_err(err)?;
    to_py(py, &s)
}

fn tables() -> PyResult<compose::Tables> {
    compose::derive_tables(&compose::schedule_statements()).map_err(err)
}

#[pyfunction]
fn schedule_tables<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let t = tables()?;
    let d = PyDict::new(py);
    d.set_item("f", to_py(py, &t.f)?)?;
    d.set_item("g", to_py(py, &t.g)?)?;
    Ok(d.into_any())
}

/// Chase a word ("f∘g", "g∘f", "f", "g") from U_start.
#[pyfunction]
fn chase<'py>(py: Python<'py>, word: &str, start: u64, repetitions: u64) -> PyResult<Bound<'py, PyAny>> {
    let pattern: WordPattern = word.parse().map_err(err)?;
    to_py(py, &compose::chase(&tables()?, pattern, start, repetitions).map_err(err)?)
}

#[pyfunction]
fn verify_schedule<'py>(py: Python<'py>, n_max: u64) -> PyResult<Bound<'py, PyAny>> {
    let t = tables()?;
    let r = py.detach(|| compose::verify_schedule(&t, n_max)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("passed", r.passed())?;
    d.set_item("report", to_py(py, &r)?)?;
    Ok(d.into_any())
}

#[pyfunction]
#[pyo3(signature = (params, z, max_steps = 64, escape_level = render::DEFAULT_ESCAPE_LEVEL))]
fn classify_point<'py>(
    py: Python<'py>,
    params: &PyParams,
    z: Complex64,
    max_steps: u32,
    escape_level: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let m = ModelMap::new(params.0.clone(), 16).map_err(err)?;
    let chain = UChain::from_params(&params.0);
    to_py(py, &render::classify_point(z, &m, &chain, max_steps, escape_level))
}

/// Classification raster over window (re_min, re_max, im_min, im_max).
/// Returns {"ppm": bytes, "csv": str, "legend": dict, "codes": list[int]}.
#[pyfunction]
#[pyo3(signature = (params, window, width, height, max_steps = 64))]
fn render_raster<'py>(
    py: Python<'py>,
    params: &PyParams,
    window: (f64, f64, f64, f64),
    width: u32,
    height: u32,
    max_steps: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let mut job = RasterJob::new((window.0, window.1), (window.2, window.3), width, height);
    job.max_steps = max_steps;
    let out = py.detach(|| render::render(&job, &params.0, None)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("ppm", PyBytes::new(py, &out.ppm))?;
    d.set_item("csv", &out.csv)?;
    d.set_item("legend", to_py(py, &out.legend)?)?;
    d.set_item("codes", out.classes.iter().map(|c| c.code()).collect::<Vec<_>>())?;
    Ok(d.into_any())
}

#[pymodule]
fn wandlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", wandlab_core::VERSION)?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyTower>()?;
    m.add_function(wrap_pyfunction!(compute_a, m)?)?;
    m.add_function(wrap_pyfunction!(model_eval, m)?)?;
    m.add_function(wrap_pyfunction!(escape_condition, m)?)?;
    m.add_function(wrap_pyfunction!(iterate_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(adjust_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(graph, m)?)?;
    m.add_function(wrap_pyfunction!(bounded_geometry, m)?)?;
    m.add_function(wrap_pyfunction!(thin_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(schedule_tables, m)?)?;
    m.add_function(wrap_pyfunction!(chase, m)?)?;
    m.add_function(wrap_pyfunction!(verify_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(classify_point, m)?)?;
    m.add_function(wrap_pyfunction!(render_raster, m)?)?;
    Ok(())
}
