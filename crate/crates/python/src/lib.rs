//! Python bindings. Curves come back as `(t, values)` pairs of lists; failures
//! raise `ValueError` for bad input and `ArithmeticError` for numerical
//! breakdowns.

use boundedrenew::bounded::{self, ScheduleSource};
use boundedrenew::montecarlo;
use boundedrenew::numerics::{Curve, Grid};
use boundedrenew::renewal::{self, GRenewalMethod};
use boundedrenew::scenario::{self, Estimator, Scenario, ScenarioError};
use boundedrenew::{Error, LifetimeModel, ProcessKind, ProcessSpec};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_)
        | Error::Domain(_)
        | Error::ImpossibleCondition { .. }
        | Error::InvalidSpec(_) => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn scenario_err(e: ScenarioError) -> PyErr {
    match e {
        ScenarioError::Input(_) => PyValueError::new_err(e.to_string()),
        ScenarioError::Numeric { .. } => PyArithmeticError::new_err(e.to_string()),
    }
}

fn grid(spec: Option<&ProcessSpec>, t_max: f64, n_steps: Option<usize>) -> PyResult<Grid> {
    match (n_steps, spec) {
        (Some(n), _) => Grid::new(t_max, n).map_err(py_err),
        (None, Some(s)) => bounded::default_grid(s, t_max).map_err(py_err),
        (None, None) => Grid::new(t_max, 1000).map_err(py_err),
    }
}

fn pair(c: Curve) -> (Vec<f64>, Vec<f64>) {
    (c.grid.points(), c.values)
}

/// A lifetime distribution.
#[pyclass(name = "Lifetime", module = "pyboundedrenew", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyLifetime {
    inner: LifetimeModel,
}

impl PyLifetime {
    fn checked(inner: LifetimeModel) -> PyResult<Self> {
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }
}

#[pymethods]
impl PyLifetime {
    #[staticmethod]
    fn gamma(shape: f64, scale: f64) -> PyResult<Self> {
        Self::checked(LifetimeModel::Gamma { shape, scale })
    }

    /// Survival `exp(-(lam * t)^2)`.
    #[staticmethod]
    fn rayleigh(lam: f64) -> PyResult<Self> {
        Self::checked(LifetimeModel::Rayleigh { lambda: lam })
    }

    #[staticmethod]
    fn weibull(scale: f64, shape: f64) -> PyResult<Self> {
        Self::checked(LifetimeModel::Weibull { scale, shape })
    }

    #[staticmethod]
    fn exponential(rate: f64) -> PyResult<Self> {
        Self::checked(LifetimeModel::Exponential { rate })
    }

    /// First time a gamma degradation process with shape rate `kappa` and
    /// scale `theta` reaches `level`.
    #[staticmethod]
    fn gamma_process_passage(kappa: f64, theta: f64, level: f64) -> PyResult<Self> {
        Self::checked(LifetimeModel::GammaProcessPassage { kappa, theta, level })
    }

    #[staticmethod]
    fn never_fails() -> Self {
        Self {
            inner: LifetimeModel::NeverFails,
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: LifetimeModel = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Self::checked(inner)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("lifetime models serialize")
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_name()
    }

    fn survival(&self, t: f64) -> f64 {
        self.inner.survival(t)
    }

    fn cdf(&self, t: f64) -> f64 {
        self.inner.cdf(t)
    }

    fn pdf(&self, t: f64) -> f64 {
        self.inner.pdf(t)
    }

    fn hazard(&self, t: f64) -> f64 {
        self.inner.hazard(t)
    }

    fn cumulative_hazard(&self, t: f64) -> f64 {
        self.inner.cumulative_hazard(t)
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    /// Survival of the residual life after surviving to `age`.
    fn residual_survival(&self, age: f64, x: f64) -> PyResult<f64> {
        Ok(self.inner.at_age(age).map_err(py_err)?.survival(x))
    }

    fn __repr__(&self) -> String {
        format!("Lifetime({:?})", self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// A critical / non-critical component pair under one of the processes
/// `A`, `A_MR`, `B`, `B_MR`.
#[pyclass(name = "Process", module = "pyboundedrenew", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyProcess {
    inner: ProcessSpec,
}

#[pymethods]
impl PyProcess {
    #[new]
    #[pyo3(signature = (kind, nc, cr, reevaluate_cr = false))]
    fn new(kind: &str, nc: &PyLifetime, cr: &PyLifetime, reevaluate_cr: bool) -> PyResult<Self> {
        let kind: ProcessKind = kind.parse().map_err(py_err)?;
        let inner = ProcessSpec {
            reevaluate_cr,
            ..ProcessSpec::new(kind, nc.inner, cr.inner)
        };
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }

    #[getter]
    fn nc(&self) -> PyLifetime {
        PyLifetime { inner: self.inner.nc }
    }

    #[getter]
    fn cr(&self) -> PyLifetime {
        PyLifetime { inner: self.inner.cr }
    }

    /// Probability that the NC fails before the CR.
    fn p_b(&self) -> PyResult<f64> {
        bounded::p_b(&self.inner).map_err(py_err)
    }

    /// Same probability when the CR has already survived to `age`.
    fn p_bmr(&self, age: f64) -> PyResult<f64> {
        bounded::p_bmr(&self.inner, age).map_err(py_err)
    }

    /// Evaluates an analytic estimator (`exact`, `approx`, `approx-b0`,
    /// `approx-b1`, `approx-b2`, `approx-bmr1`, `approx-bmr2`,
    /// `approx-bmr2-mg`, `standalone`) up to `t_max`.
    #[pyo3(signature = (estimator, t_max, n_steps = None))]
    fn curve(
        &self,
        py: Python<'_>,
        estimator: &str,
        t_max: f64,
        n_steps: Option<usize>,
    ) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let e = Estimator::analytic_from_name(estimator)
            .ok_or_else(|| PyValueError::new_err(format!("unknown estimator {estimator:?}")))?;
        let g = grid(Some(&self.inner), t_max, n_steps)?;
        let spec = self.inner;
        let out = py.detach(|| scenario::evaluate(&spec, &g, e)).map_err(py_err)?;
        Ok(pair(out.curve))
    }

    /// Monte Carlo estimate of the expected NC failure count.
    #[pyo3(signature = (t_max, n_steps, runs = montecarlo::DEFAULT_RUNS, seed = 0))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        t_max: f64,
        n_steps: usize,
        runs: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let g = grid(None, t_max, Some(n_steps))?;
        let spec = self.inner;
        let est = py.detach(|| montecarlo::simulate(&spec, &g, runs, seed)).map_err(py_err)?;
        let d = PyDict::new(py);
        let n = g.len();
        d.set_item("t", g.points())?;
        d.set_item("mean", &est.curve.values)?;
        d.set_item("std_error", &est.std_error)?;
        d.set_item("ci_low", (0..n).map(|k| est.ci_low(k)).collect::<Vec<_>>())?;
        d.set_item("ci_high", (0..n).map(|k| est.ci_high(k)).collect::<Vec<_>>())?;
        Ok(d)
    }

    /// Replacement schedule for `B_MR`: `source` is `"tau"` or `"mg-inverse"`.
    #[pyo3(signature = (n_max, source = "tau"))]
    fn bmr_schedule<'py>(&self, py: Python<'py>, n_max: usize, source: &str) -> PyResult<Bound<'py, PyDict>> {
        let source = match source {
            "tau" => ScheduleSource::TauRecursion,
            "mg-inverse" => ScheduleSource::MgInverse,
            other => return Err(PyValueError::new_err(format!("unknown schedule source {other:?}"))),
        };
        let s = bounded::bmr_schedule(&self.inner, n_max, source).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("tau", s.tau)?;
        d.set_item("p", s.p)?;
        d.set_item("rho", s.rho)?;
        d.set_item("truncated", s.truncated)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Process({}, nc={:?}, cr={:?})", self.inner.kind.name(), self.inner.nc, self.inner.cr)
    }
}

/// Unbounded renewal functions of a single component: `classical`,
/// `bartholomew`, `g-renewal`, `g-renewal-exact` or `g-renewal-approx`.
#[pyfunction]
#[pyo3(signature = (nc, method, t_max, n_steps = 1000))]
fn renewal_function(
    py: Python<'_>,
    nc: &PyLifetime,
    method: &str,
    t_max: f64,
    n_steps: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let g = grid(None, t_max, Some(n_steps))?;
    let m = nc.inner;
    let res = py.detach(|| match method {
        "classical" => Some(renewal::classical_renewal(&m, &g)),
        "bartholomew" => Some(renewal::bartholomew_approx(&m, &g)),
        "g-renewal" => Some(renewal::g_renewal(&m, &g, GRenewalMethod::CumHaz)),
        "g-renewal-exact" => Some(renewal::g_renewal(&m, &g, GRenewalMethod::Exact)),
        "g-renewal-approx" => Some(renewal::g_renewal_approx(&m, &g)),
        _ => None,
    });
    let res = res.ok_or_else(|| PyValueError::new_err(format!("unknown renewal method {method:?}")))?;
    Ok(pair(res.map_err(py_err)?.curve))
}

/// Runs a scenario given as JSON and returns the CSV table.
#[pyfunction]
fn run_scenario(py: Python<'_>, json: &str) -> PyResult<String> {
    let s = Scenario::from_json(json).map_err(scenario_err)?;
    let out = py.detach(|| scenario::run(&s)).map_err(scenario_err)?;
    Ok(scenario::to_csv(&out))
}

/// JSON of a built-in scenario.
#[pyfunction]
fn preset(name: &str) -> PyResult<String> {
    Ok(scenario::preset(name).map_err(scenario_err)?.to_json())
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    scenario::PRESET_NAMES.to_vec()
}

#[pymodule]
pub fn pyboundedrenew(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLifetime>()?;
    m.add_class::<PyProcess>()?;
    m.add_function(wrap_pyfunction!(renewal_function, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    Ok(())
}
