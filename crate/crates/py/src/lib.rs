//! Python bindings. Reports come back as plain dicts and lists.

use std::sync::Mutex;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use ::phomog::cell::{CellSolver, PeriodicGrid};
use ::phomog::coeffs::{Coefficient as CoreCoefficient, DefectCoefficient, DefectSpec, PeriodicCoefficient, PeriodicSpec};
use ::phomog::defect::{Boundary, DefectSolver, TruncatedDomain};
use ::phomog::oned::{CorrectorKind, Problem1D as CoreProblem, QuadratureSpec, Rhs, RhsSpec};
use ::phomog::Error;

create_exception!(phomog, PhomogError, PyException);
create_exception!(phomog, AssumptionViolated, PhomogError);
create_exception!(phomog, NoConvergence, PhomogError);

fn to_py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.root() {
        Error::AssumptionViolated(_) => AssumptionViolated::new_err(msg),
        Error::NoConvergence { .. } => NoConvergence::new_err(msg),
        Error::InvalidInput(_) | Error::Config(_) | Error::DegenerateInput(_) => PyValueError::new_err(msg),
        _ => PhomogError::new_err(msg),
    }
}

fn to_py<T: Serialize + ?Sized>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PhomogError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

fn from_py<T: serde::de::DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let s: String = py.import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&s).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Coefficient `a = a_per + a_defect` with exponent `p`.
#[pyclass(module = "phomog", frozen)]
struct Coefficient {
    inner: CoreCoefficient,
}

#[pymethods]
impl Coefficient {
    /// `periodic` and `defect` are catalog dicts, e.g. `{"kind": "cosine", "base": 2.0, "amplitude": 1.0}`.
    #[new]
    #[pyo3(signature = (periodic, p, dim = 1, lam = 10.0, defect = None))]
    fn new(
        py: Python<'_>,
        periodic: &Bound<'_, PyAny>,
        p: f64,
        dim: usize,
        lam: f64,
        defect: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Self> {
        let spec: PeriodicSpec = from_py(py, periodic)?;
        let per = PeriodicCoefficient::catalog(spec, lam, dim).map_err(to_py_err)?;
        let def = match defect {
            Some(d) => Some(DefectCoefficient::catalog(from_py::<DefectSpec>(py, d)?)),
            None => None,
        };
        Ok(Self { inner: CoreCoefficient::new(per, def, p).map_err(to_py_err)? })
    }

    /// `2 + cos(2 pi y) + 10 exp(-|y|)` in 1D.
    #[staticmethod]
    #[pyo3(signature = (p = 3.0))]
    fn benchmark_1d(p: f64) -> PyResult<Self> {
        Ok(Self { inner: CoreCoefficient::benchmark_1d(p).map_err(to_py_err)? })
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn has_defect(&self) -> bool {
        self.inner.has_defect()
    }

    fn __call__(&self, y: Vec<f64>) -> PyResult<f64> {
        if y.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.inner.dim())));
        }
        Ok(self.inner.evaluate(&y))
    }

    fn periodic_only(&self) -> Self {
        Self { inner: self.inner.periodic_only() }
    }

    /// Checks the structural assumptions; raises `AssumptionViolated` on failure.
    #[pyo3(signature = (resolution = 1024))]
    fn validate(&self, py: Python<'_>, resolution: usize) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| self.inner.validate(resolution)).map_err(to_py_err)?;
        to_py(py, &r)
    }

    /// `a*` in 1D.
    fn a_star(&self) -> PyResult<f64> {
        if self.inner.dim() != 1 {
            return Err(PyValueError::new_err("a_star() is the scalar 1D value; use cell_solve in 2D"));
        }
        Ok(::phomog::oned::a_star_1d(&self.inner.periodic, self.inner.p))
    }

    fn __repr__(&self) -> String {
        format!("Coefficient(dim={}, p={}, defect={})", self.inner.dim(), self.inner.p, self.inner.has_defect())
    }
}

/// 1D problem `-(a(x/eps) u'|u'|^{p-2})' = f` on `(-1/2, 1/2)`, `u(+-1/2) = 0`.
#[pyclass(module = "phomog", frozen)]
struct Problem1D {
    inner: CoreProblem,
}

#[pymethods]
impl Problem1D {
    /// `rhs` is a catalog dict; the default is `f(x) = 2x`.
    #[new]
    #[pyo3(signature = (coefficient, epsilon, rhs = None))]
    fn new(py: Python<'_>, coefficient: &Coefficient, epsilon: f64, rhs: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let rhs = match rhs {
            Some(r) => Rhs::Catalog(from_py::<RhsSpec>(py, r)?),
            None => Rhs::linear_2x(),
        };
        let inner = CoreProblem::new(coefficient.inner.clone(), rhs, epsilon, QuadratureSpec::default()).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// `p = 3`, `f = 2x` and the default coefficient.
    #[staticmethod]
    fn benchmark(epsilon: f64) -> PyResult<Self> {
        Ok(Self { inner: CoreProblem::benchmark(epsilon).map_err(to_py_err)? })
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    /// Flux constant `C_eps`.
    fn flux_constant(&self, py: Python<'_>) -> PyResult<f64> {
        Ok(py.detach(|| ::phomog::oned::solve_flux_constant(&self.inner)).map_err(to_py_err)?.c)
    }

    /// Remainder norms for both corrector kinds.
    fn remainder_report(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| ::phomog::oned::remainder_report(&self.inner)).map_err(to_py_err)?;
        to_py(py, &r)
    }

    /// One remainder row per `eps`.
    fn table_sweep(&self, py: Python<'_>, eps: Vec<f64>) -> PyResult<Py<PyAny>> {
        let r = py.detach(|| ::phomog::oned::table_sweep(&self.inner, &eps)).map_err(to_py_err)?;
        to_py(py, &r)
    }

    /// Weak and strong convergence diagnostics; `kind` is `"periodic"` or `"full"`.
    #[pyo3(signature = (eps, kind = "full", nu = 1.0))]
    fn convergence_study(&self, py: Python<'_>, eps: Vec<f64>, kind: &str, nu: f64) -> PyResult<Py<PyAny>> {
        let kind: CorrectorKind = kind.parse().map_err(to_py_err)?;
        let r = py.detach(|| ::phomog::homog::convergence_study(&self.inner, &eps, kind, nu)).map_err(to_py_err)?;
        to_py(py, &r)
    }
}

/// Periodic cell problem for direction `xi` on an `n`-per-axis grid.
#[pyfunction]
#[pyo3(signature = (coefficient, xi, n = None, tol = 1e-9, max_iter = 20000))]
fn cell_solve(
    py: Python<'_>,
    coefficient: &Coefficient,
    xi: Vec<f64>,
    n: Option<usize>,
    tol: f64,
    max_iter: usize,
) -> PyResult<Py<PyAny>> {
    let c = &coefficient.inner;
    if xi.len() != c.dim() {
        return Err(PyValueError::new_err(format!("xi needs {} components", c.dim())));
    }
    let s = py
        .detach(|| {
            let grid = match n {
                Some(n) => PeriodicGrid::new(c.dim(), n)?,
                None => PeriodicGrid::default_for(c.dim())?,
            };
            CellSolver::new(&c.periodic, c.p, grid)?.with_tolerance(tol, max_iter).solve(&xi)
        })
        .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("xi", &s.xi)?;
    d.set_item("a_star", s.a_star())?;
    d.set_item("c_est", s.min_gradient_ratio())?;
    d.set_item("energy", s.energy)?;
    d.set_item("residual", s.residual)?;
    d.set_item("iterations", s.iterations)?;
    d.set_item("corrector_grad", s.corrector_grad())?;
    d.set_item("nodal_values", &s.field.values)?;
    Ok(d.into_any().unbind())
}

/// Defect corrector on `[-radius, radius]^d`; the radius defaults to the decay radius plus margin.
#[pyfunction]
#[pyo3(signature = (coefficient, xi, radius = None, cells_per_unit = 32, tol = 1e-9, max_iter = 50000))]
fn defect_solve(
    py: Python<'_>,
    coefficient: &Coefficient,
    xi: Vec<f64>,
    radius: Option<f64>,
    cells_per_unit: usize,
    tol: f64,
    max_iter: usize,
) -> PyResult<Py<PyAny>> {
    let c = &coefficient.inner;
    let s = py
        .detach(|| {
            let dom = match radius {
                Some(r) => TruncatedDomain::new(c.dim(), r, cells_per_unit, Boundary::Natural)?,
                None => TruncatedDomain::default_for(c, cells_per_unit)?,
            };
            DefectSolver::new(c, dom)?.with_tolerance(tol, max_iter)?.solve(&xi)
        })
        .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("xi", &s.xi)?;
    d.set_item("energy", s.energy)?;
    d.set_item("residual", s.residual)?;
    d.set_item("iterations", s.iterations)?;
    d.set_item("norms", to_py(py, &s.norms)?)?;
    d.set_item("tail", to_py(py, &s.tail)?)?;
    d.set_item("truncation_share", s.truncation_share)?;
    d.set_item("warnings", &s.warnings)?;
    let dim = s.dim();
    let centroids: Vec<Vec<f64>> = s.centroids.iter().map(|c| c[..dim].to_vec()).collect();
    d.set_item("centroids", centroids)?;
    d.set_item("grads", &s.grads)?;
    Ok(d.into_any().unbind())
}

/// `M_delta phi` on the box `omega = [(a1, b1), ...]`; `phi` maps a coordinate list to a float
/// or a list of floats.
#[pyfunction]
fn discretize(py: Python<'_>, phi: Py<PyAny>, omega: Vec<(f64, f64)>, delta: f64) -> PyResult<Py<PyAny>> {
    let failure: Mutex<Option<PyErr>> = Mutex::new(None);
    let eval = |x: &[f64]| -> Vec<f64> {
        Python::attach(|py| {
            let r = phi.bind(py).call1((x.to_vec(),)).and_then(|v| {
                v.extract::<Vec<f64>>().or_else(|_| v.extract::<f64>().map(|s| vec![s]))
            });
            match r {
                Ok(v) => v,
                Err(e) => {
                    failure.lock().expect("lock").get_or_insert(e);
                    vec![f64::NAN]
                }
            }
        })
    };
    let sf = py.detach(|| ::phomog::homog::discretize(&eval, &omega, delta)).map_err(to_py_err)?;
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    let d = PyDict::new(py);
    let cells: Vec<Vec<i64>> = sf.cells().map(|(k, _)| k).collect();
    d.set_item("cells", cells)?;
    d.set_item("values", &sf.values)?;
    d.set_item("delta", sf.delta)?;
    d.set_item("covered_measure", sf.covered_measure)?;
    Ok(d.into_any().unbind())
}

/// Randomized inequality battery.
#[pyfunction]
#[pyo3(signature = (samples = 100000, seed = 0))]
fn inequality_battery(py: Python<'_>, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| ::phomog::ineq::run_battery(samples, seed));
    let d = to_py(py, &r)?;
    d.bind(py).set_item("passed", r.passed())?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "phomog")]
fn phomog_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("PhomogError", m.py().get_type::<PhomogError>())?;
    m.add("AssumptionViolated", m.py().get_type::<AssumptionViolated>())?;
    m.add("NoConvergence", m.py().get_type::<NoConvergence>())?;
    m.add_class::<Coefficient>()?;
    m.add_class::<Problem1D>()?;
    m.add_function(wrap_pyfunction!(cell_solve, m)?)?;
    m.add_function(wrap_pyfunction!(defect_solve, m)?)?;
    m.add_function(wrap_pyfunction!(discretize, m)?)?;
    m.add_function(wrap_pyfunction!(inequality_battery, m)?)?;
    Ok(())
}
