//! Python module `vclab`. Structured arguments and results cross the boundary
//! as plain dicts and lists using the same JSON schema as the command-line tool.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;

use vclab_core::bounds::{self, FormulaId, ProblemDims, Rounding};
use vclab_core::integrals::{self, ExpTrigMonomial, Trig};
use vclab_core::learn::LearnConfig;
use vclab_core::response::{self, ControlMatrix};
use vclab_core::schema::{self, SystemDoc, SystemSpec};
use vclab_core::selftest::{run_selftest, SelfTestOptions};
use vclab_core::verify::VerifyConfig;
use vclab_core::{BoundsError, IntegralError, LearnError, ResponseError, SchemaError, ShatterError};

struct Error(PyErr);

impl From<Error> for PyErr {
    fn from(e: Error) -> Self {
        e.0
    }
}

impl From<PyErr> for Error {
    fn from(e: PyErr) -> Self {
        Error(e)
    }
}

fn invalid(e: impl std::fmt::Display) -> Error {
    Error(PyValueError::new_err(e.to_string()))
}

fn failure(e: impl std::fmt::Display) -> Error {
    Error(PyRuntimeError::new_err(e.to_string()))
}

impl From<SchemaError> for Error {
    fn from(e: SchemaError) -> Self {
        invalid(e)
    }
}

impl From<BoundsError> for Error {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Overflow(_) => failure(e),
            _ => invalid(e),
        }
    }
}

impl From<IntegralError> for Error {
    fn from(e: IntegralError) -> Self {
        failure(e)
    }
}

impl From<ResponseError> for Error {
    fn from(e: ResponseError) -> Self {
        match e {
            ResponseError::Dimension(_) | ResponseError::Basis(_) | ResponseError::Params(_) => invalid(e),
            _ => failure(e),
        }
    }
}

impl From<ShatterError> for Error {
    fn from(e: ShatterError) -> Self {
        match e {
            ShatterError::Invalid(_) | ShatterError::PrecisionLimit { .. } => invalid(e),
            ShatterError::Response(r) => r.into(),
            _ => failure(e),
        }
    }
}

impl From<LearnError> for Error {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::Config(_) => invalid(e),
            LearnError::Response(r) => r.into(),
            LearnError::Bounds(b) => b.into(),
        }
    }
}

type Res<T> = Result<T, Error>;

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> Res<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(failure)?;
    Ok(json_to_py(py, &text)?)
}

/// Accepts a JSON string or any JSON-serializable Python object.
fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> Res<T> {
    let text: String = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?,
    };
    Ok(schema::from_str_with_path(&text)?)
}

fn parse_trig(phase: &str) -> Res<Trig> {
    match phase {
        "sin" => Ok(Trig::Sin),
        "cos" => Ok(Trig::Cos),
        other => Err(invalid(format!("phase must be \"sin\" or \"cos\", got {other:?}"))),
    }
}

/// `∫_0^tau t^power e^(rate t) sin|cos(freq t) dt` as `(value, branch)`.
#[pyfunction]
#[pyo3(signature = (power, rate, freq, phase, tau))]
fn integrate_monomial(power: u32, rate: f64, freq: f64, phase: &str, tau: f64) -> Res<(f64, String)> {
    let m = ExpTrigMonomial::new(power, rate, freq, parse_trig(phase)?);
    let r = integrals::integrate_monomial(&m, tau)?;
    let branch = match r.branch {
        integrals::Branch::Regular => "regular",
        integrals::Branch::DegenerateDenominator => "degenerate_denominator",
    };
    Ok((r.value, branch.to_string()))
}

#[pyfunction]
fn sign_observe(y: Vec<f64>) -> Vec<u32> {
    response::sign_observe(&y).into_iter().map(u32::from).collect()
}

#[pyfunction]
fn loss_eval(z1: f64, z2: f64) -> f64 {
    response::loss_eval(z1, z2)
}

/// A validated system document (full or compact form).
#[pyclass(frozen)]
struct System {
    spec: SystemSpec,
}

impl System {
    fn tau(&self, tau: Option<f64>) -> Res<f64> {
        let tau = tau.or(self.spec.tau).unwrap_or(1.0);
        if tau.is_finite() && tau > 0.0 {
            Ok(tau)
        } else {
            Err(invalid(format!("tau must be positive, got {tau}")))
        }
    }
}

#[pymethods]
impl System {
    #[new]
    fn new(doc: &Bound<'_, PyAny>) -> Res<Self> {
        let doc: SystemDoc = from_py(doc)?;
        Ok(Self { spec: doc.validate()? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.spec.params.to_full().n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.spec.params.to_full().p()
    }

    #[getter]
    fn k(&self) -> usize {
        self.spec.family.len()
    }

    /// Output vector for controls `g` (defaults to the document's `G`).
    #[pyo3(signature = (g=None, tau=None))]
    fn response(&self, g: Option<Vec<Vec<f64>>>, tau: Option<f64>) -> Res<Vec<f64>> {
        let g = match g {
            Some(rows) => ControlMatrix::from_rows(&rows)?,
            None => self
                .spec
                .g
                .clone()
                .ok_or_else(|| invalid("no controls given and the document has no \"G\""))?,
        };
        let tau = self.tau(tau)?;
        Ok(response::response_full(
            &self.spec.params.to_full(),
            &g,
            &self.spec.family,
            tau,
        )?)
    }

    /// `(λ_1, …, λ_k)` of a single-input, single-output system.
    #[pyo3(signature = (tau=None))]
    fn lambdas(&self, tau: Option<f64>) -> Res<Vec<f64>> {
        let tau = self.tau(tau)?;
        Ok(response::precompute_lambda_j(
            &self.spec.params,
            &self.spec.family,
            tau,
        )?)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> Res<Bound<'py, PyAny>> {
        let mut doc = SystemDoc::from_params(&self.spec.params, &self.spec.family);
        doc.g = self.spec.g.as_ref().map(ControlMatrix::to_rows);
        doc.tau = self.spec.tau;
        to_py(py, &doc)
    }
}

/// Evaluates one bound formula; keyword arguments are the problem dimensions.
#[pyfunction]
#[pyo3(signature = (formula, **dims))]
fn bound<'py>(py: Python<'py>, formula: &str, dims: Option<&Bound<'py, PyDict>>) -> Res<Bound<'py, PyAny>> {
    let id: FormulaId = serde_json::from_value(serde_json::Value::from(formula)).map_err(invalid)?;
    let dims: ProblemDims = match dims {
        Some(d) => from_py(d.as_any())?,
        None => ProblemDims::default(),
    };
    to_py(py, &bounds::evaluate(id, &dims)?)
}

#[pyfunction]
fn vc_upper_scalar(n: u64, m: u64, k: u64, ell_max: u64) -> Res<f64> {
    Ok(bounds::vc_upper_scalar(n, m, k, ell_max)?)
}

#[pyfunction]
#[pyo3(signature = (n, k, rounding="floor"))]
fn vc_lower(n: u64, k: u64, rounding: &str) -> Res<u64> {
    let r = match rounding {
        "floor" => Rounding::Floor,
        "ceil" => Rounding::Ceil,
        other => {
            return Err(invalid(format!(
                "rounding must be \"floor\" or \"ceil\", got {other:?}"
            )))
        }
    };
    Ok(bounds::vc_lower(n, k, r)?)
}

/// Runs a verification request and returns the shattering report.
#[pyfunction]
#[pyo3(signature = (config, seed=None))]
fn verify<'py>(py: Python<'py>, config: &Bound<'py, PyAny>, seed: Option<u64>) -> Res<Bound<'py, PyAny>> {
    let cfg: VerifyConfig = from_py(config)?;
    let report = py.detach(|| vclab_core::verify::run_verify(&cfg, seed))?;
    Ok(json_to_py(py, &report.to_json())?)
}

/// Runs a learning-curve experiment; returns the result with one row per trial.
#[pyfunction]
#[pyo3(signature = (config, seed=None))]
fn learn<'py>(py: Python<'py>, config: &Bound<'py, PyAny>, seed: Option<u64>) -> Res<Bound<'py, PyAny>> {
    let mut cfg: LearnConfig = from_py(config)?;
    cfg.seed = Some(vclab_core::verify::resolve_seed(seed, cfg.seed)?);
    let result = py.detach(|| vclab_core::learn::run_experiment(&cfg))?;
    to_py(py, &result)
}

#[pyfunction]
fn selftest(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    let report = py.detach(|| run_selftest(&SelfTestOptions::default()));
    json_to_py(py, &report.to_json())
}

#[pymodule]
fn vclab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<System>()?;
    m.add_function(wrap_pyfunction!(integrate_monomial, m)?)?;
    m.add_function(wrap_pyfunction!(sign_observe, m)?)?;
    m.add_function(wrap_pyfunction!(loss_eval, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(vc_upper_scalar, m)?)?;
    m.add_function(wrap_pyfunction!(vc_lower, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
