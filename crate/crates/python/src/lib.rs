//! Python bindings: one-shot trust ratings, scenario validation and runs.
//!
//! Validation failures raise `ValueError`; unreadable or unparseable input
//! raises `OSError`.

use std::path::Path;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use trustsim_core::aleatoric::{quantify_samples, MonteCarloConfig, DEFAULT_DISPERSION_CAP};
use trustsim_core::scenario::{parse_evidence, write_bundle, ScenarioConfig, SummaryDocument};
use trustsim_core::sim;
use trustsim_core::trust::{weighted_trust, TrustEvaluator};

/// Why a binding call failed; maps onto a Python exception type.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Invalid(String),
    Io(String),
}

impl From<Failure> for PyErr {
    fn from(f: Failure) -> Self {
        match f {
            Failure::Invalid(m) => PyValueError::new_err(m),
            Failure::Io(m) => PyOSError::new_err(m),
        }
    }
}

fn invalid(e: impl ToString) -> Failure {
    Failure::Invalid(e.to_string())
}

/// (facet name, kind, certainty, weight).
pub type FacetRow = (String, String, f64, f64);

/// Per-facet breakdown of a one-shot rating.
#[derive(Debug, Clone, PartialEq)]
pub struct Rating {
    pub trust: f64,
    /// In evidence order.
    pub facets: Vec<FacetRow>,
}

pub fn rate_evidence(text: &str, seed: u64) -> Result<Rating, Failure> {
    let base = TrustEvaluator::default();
    let evidence = parse_evidence(text, &base.taxonomy).map_err(|e| Failure::Io(e.to_string()))?;
    let ev = TrustEvaluator {
        monte_carlo: MonteCarloConfig {
            seed,
            ..base.monte_carlo
        },
        weight_overrides: evidence.weights,
        ..base
    };
    let q = ev.quantify(&evidence.set).map_err(invalid)?;
    let w = ev.weights(&evidence.set).map_err(invalid)?;
    let facets = q
        .entries()
        .iter()
        .zip(w.as_slice())
        .map(|(e, &w)| {
            let name = ev.taxonomy.facet(&e.facet).map_err(invalid)?.name.clone();
            Ok((name, e.kind.as_str().to_string(), e.value, w))
        })
        .collect::<Result<_, Failure>>()?;
    Ok(Rating {
        trust: weighted_trust(&q, &w).map_err(invalid)?,
        facets,
    })
}

pub fn load_scenario(
    path: &Path,
    seed: Option<u64>,
    rounds: Option<u64>,
) -> Result<ScenarioConfig, Failure> {
    let mut cfg = ScenarioConfig::load(path).map_err(|e| Failure::Io(e.to_string()))?;
    if let Some(seed) = seed {
        cfg.simulation.seed = seed;
    }
    if let Some(rounds) = rounds {
        cfg.simulation.rounds = rounds;
    }
    Ok(cfg)
}

/// Runs a scenario, optionally writing the report bundle, and returns the
/// summary document as JSON.
pub fn run_scenario(
    path: &Path,
    seed: Option<u64>,
    rounds: Option<u64>,
    out: Option<&Path>,
) -> Result<String, Failure> {
    let cfg = load_scenario(path, seed, rounds)?;
    let (scenario, _) = cfg.compile().map_err(invalid)?;
    let report = sim::run(scenario).map_err(invalid)?;
    if let Some(out) = out {
        write_bundle(out, &report, &cfg).map_err(|e| Failure::Io(e.to_string()))?;
    }
    let doc = SummaryDocument {
        summary: &report.summary,
        config: &cfg,
    };
    serde_json::to_string(&doc).map_err(|e| Failure::Io(e.to_string()))
}

/// Weighted mean of certainty scores.
#[pyfunction]
fn weighted_mean(q: Vec<f64>, w: Vec<f64>) -> PyResult<f64> {
    Ok(trustsim_core::trust::weighted_mean(&q, &w).map_err(invalid)?)
}

/// Certainty score of a sample of measurements, by bootstrap resampling.
#[pyfunction]
#[pyo3(signature = (samples, trials=10_000, seed=0))]
fn certainty(samples: Vec<f64>, trials: usize, seed: u64) -> PyResult<f64> {
    let cfg = MonteCarloConfig::new(trials, seed, DEFAULT_DISPERSION_CAP).map_err(invalid)?;
    Ok(quantify_samples(&samples, &cfg).map_err(invalid)?)
}

/// Rates the evidence text; returns `(T, [(facet, kind, q, w), ...])`.
#[pyfunction]
#[pyo3(signature = (evidence, seed=0))]
fn trust(evidence: &str, seed: u64) -> PyResult<(f64, Vec<FacetRow>)> {
    let r = rate_evidence(evidence, seed)?;
    Ok((r.trust, r.facets))
}

/// Validates a scenario file; returns `(errors, warnings)`.
#[pyfunction]
fn validate(path: &str) -> PyResult<(Vec<String>, Vec<String>)> {
    let report = load_scenario(Path::new(path), None, None)?.validate();
    Ok((report.errors, report.warnings))
}

/// Runs a scenario and returns its summary as a dict. With `out`, also writes
/// the CSV/JSON report bundle there.
#[pyfunction]
#[pyo3(signature = (path, seed=None, rounds=None, out=None))]
fn simulate<'py>(
    py: Python<'py>,
    path: &str,
    seed: Option<u64>,
    rounds: Option<u64>,
    out: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let json = py.detach(|| run_scenario(Path::new(path), seed, rounds, out.map(Path::new)))?;
    py.import("json")?
        .call_method1("loads", (json,))?
        .cast_into::<PyDict>()
        .map_err(Into::into)
}

#[pymodule]
fn trustsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(weighted_mean, m)?)?;
    m.add_function(wrap_pyfunction!(certainty, m)?)?;
    m.add_function(wrap_pyfunction!(trust, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
