//! Python bindings for the `twovar` solver.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twovar::engine::frozen_from;
use twovar::equilibrium::{EQUIVALENCE_TOLERANCE, FOC_TOLERANCE};
use twovar::oracle::PlayerAudit;
use twovar::{BestResponseOptions, CaseLabel, ClosedFormCase, Error, Market, MinimaxTolerances};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::SingularSystem { .. } | Error::NoConvergence { .. } | Error::ShapeViolation(_) | Error::FocResidual(_) => {
            PyRuntimeError::new_err(err.to_string())
        }
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn market(params: &MarketParams) -> PyResult<Market> {
    Market::new(params.inner.clone()).map_err(to_py)
}

fn label(name: &str) -> PyResult<CaseLabel> {
    CaseLabel::ALL
        .into_iter()
        .find(|l| l.to_string() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown case {name:?}")))
}

#[pyclass(module = "twovar_py", frozen, from_py_object)]
#[derive(Clone)]
struct MarketParams {
    inner: twovar::MarketParams,
}

#[pymethods]
impl MarketParams {
    #[new]
    fn new(n: usize, a: f64, b: f64, costs: Vec<f64>) -> PyResult<Self> {
        Ok(MarketParams { inner: twovar::MarketParams::new(n, a, b, costs).map_err(to_py)? })
    }

    /// `n - 1` players with cost `common`, the last with cost `alien`.
    #[staticmethod]
    fn one_alien(n: usize, a: f64, b: f64, common: f64, alien: f64) -> PyResult<Self> {
        Ok(MarketParams { inner: twovar::MarketParams::one_alien(n, a, b, common, alien).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(MarketParams { inner: twovar::MarketParams::from_json(text).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn costs(&self) -> Vec<f64> {
        self.inner.costs.clone()
    }

    fn __repr__(&self) -> String {
        format!("MarketParams(n={}, a={}, b={}, costs={:?})", self.inner.n, self.inner.a, self.inner.b, self.inner.costs)
    }
}

#[pyclass(module = "twovar_py", frozen, get_all)]
struct Equilibrium {
    pattern: String,
    method: String,
    strategy: Vec<f64>,
    quantities: Vec<f64>,
    prices: Vec<f64>,
    absolute_profits: Vec<f64>,
    relative_profits: Vec<f64>,
    iterations: usize,
    residual: f64,
    boundary: Vec<usize>,
}

#[pymethods]
impl Equilibrium {
    fn __repr__(&self) -> String {
        format!("Equilibrium(pattern={}, quantities={:?}, prices={:?})", self.pattern, self.quantities, self.prices)
    }
}

impl From<twovar::EquilibriumReport> for Equilibrium {
    fn from(r: twovar::EquilibriumReport) -> Self {
        Equilibrium {
            pattern: r.pattern.to_string(),
            method: r.method.to_string(),
            strategy: r.strategy,
            quantities: r.outcome.quantities,
            prices: r.outcome.prices,
            absolute_profits: r.payoffs.absolute,
            relative_profits: r.payoffs.relative,
            iterations: r.iterations,
            residual: r.residual,
            boundary: r.boundary,
        }
    }
}

/// Equilibrium of `pattern` by direct FOC solve (`"foc"`) or damped best
/// responses (`"br"`).
#[pyfunction]
#[pyo3(signature = (params, pattern, method = "foc", damping = 0.5))]
fn solve(params: &MarketParams, pattern: &str, method: &str, damping: f64) -> PyResult<Equilibrium> {
    let m = market(params)?;
    let pattern = m.pattern(pattern).map_err(to_py)?;
    let report = match method {
        "foc" => twovar::solve_foc(&m.params, &m.system, &pattern),
        "br" => {
            let opts = BestResponseOptions { damping, ..Default::default() };
            twovar::solve_best_response(&m.params, &m.system, &pattern, &opts)
        }
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}, expected 'foc' or 'br'"))),
    };
    Ok(report.map_err(to_py)?.into())
}

/// Quantities, prices and payoffs when players commit to `strategy`.
#[pyfunction]
fn resolve<'py>(py: Python<'py>, params: &MarketParams, pattern: &str, strategy: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let m = market(params)?;
    let out = m.resolve(&m.pattern(pattern).map_err(to_py)?, &strategy).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("quantities", out.quantities)?;
    d.set_item("prices", out.prices)?;
    d.set_item("absolute_profits", out.absolute_profits)?;
    d.set_item("relative_profits", out.relative_profits)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (params, first, second, tol = EQUIVALENCE_TOLERANCE))]
fn compare<'py>(py: Python<'py>, params: &MarketParams, first: &str, second: &str, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let m = market(params)?;
    let verdict = m
        .compare(&m.pattern(first).map_err(to_py)?, &m.pattern(second).map_err(to_py)?, tol)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("equivalent", verdict.is_equivalent())?;
    d.set_item("max_deviation", verdict.max_deviation())?;
    if let twovar::EquivalenceVerdict::NotEquivalent { component, .. } = verdict {
        d.set_item("component", component.to_string())?;
    }
    Ok(d)
}

/// Four nested minimax values between `player` and the alien. `frozen`
/// lists the quantities of the remaining players; the all-quantity
/// equilibrium values are used when omitted.
#[pyfunction]
#[pyo3(signature = (params, player, frozen = None, tol = 1e-5))]
fn minimax_check<'py>(
    py: Python<'py>,
    params: &MarketParams,
    player: usize,
    frozen: Option<Vec<f64>>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = market(params)?;
    let tolerances = MinimaxTolerances { agreement: tol, ..Default::default() };
    let frozen = match frozen {
        Some(f) => f,
        None => {
            let eq = m.solve(&m.pattern(&"Q".repeat(m.params.n)).map_err(to_py)?, twovar::Method::FocSolve).map_err(to_py)?;
            frozen_from(&eq.outcome.quantities, player, m.params.alien())
        }
    };
    let r = twovar::lemma2_check(&m.params, &m.system, player, &frozen, &tolerances).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("values", r.values().to_vec())?;
    d.set_item("max_spread", r.max_spread)?;
    d.set_item("holds", r.holds())?;
    d.set_item("weak_duality_ok", r.weak_duality_ok())?;
    d.set_item("shape_violations", r.shape_violations.clone())?;
    d.set_item("domain_issues", r.domain_issues.clone())?;
    Ok(d)
}

#[pyfunction]
fn case_labels() -> Vec<String> {
    CaseLabel::ALL.iter().map(ToString::to_string).collect()
}

/// Published outputs of firms A..D for the named case.
#[pyfunction]
fn closed_form(params: &MarketParams, case: &str) -> PyResult<Vec<f64>> {
    twovar::evaluate_case(&ClosedFormCase::get(label(case)?), &params.inner).map_err(to_py)
}

/// Player-by-player comparison of published outputs with the solver.
#[pyfunction]
#[pyo3(signature = (params, case, tol = 1e-8))]
fn audit<'py>(py: Python<'py>, params: &MarketParams, case: &str, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let m = market(params)?;
    let case = ClosedFormCase::get(label(case)?);
    let report = twovar::solve_foc(&m.params, &m.system, &case.label.pattern()).map_err(to_py)?;
    let verdict = twovar::audit_case(&case, &m.params, &report, tol).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("printed", verdict.players.iter().map(PlayerAudit::printed).collect::<Vec<_>>())?;
    d.set_item("solved", verdict.players.iter().map(PlayerAudit::solved).collect::<Vec<_>>())?;
    d.set_item("mismatches", verdict.mismatches())?;
    d.set_item("erratum_flags", case.erratum_flags.clone())?;
    d.set_item("consistent", verdict.consistent())?;
    Ok(d)
}

#[pymodule]
fn twovar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MarketParams>()?;
    m.add_class::<Equilibrium>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(resolve, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(minimax_check, m)?)?;
    m.add_function(wrap_pyfunction!(case_labels, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add("FOC_TOLERANCE", FOC_TOLERANCE)?;
    m.add("EQUIVALENCE_TOLERANCE", EQUIVALENCE_TOLERANCE)?;
    Ok(())
}
