//! JSON run reports.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::DatasetMeta;
use crate::solver::{InequalityViolation, IterationRecord, SolveResult};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    /// Effective solver parameters, echoed for provenance.
    pub params: Value,
    pub dataset_meta: DatasetMeta,
    pub r: usize,
    pub iterations: usize,
    pub converged: bool,
    pub phi: f64,
    pub stationarity: Option<f64>,
    pub time_ms: f64,
    pub objectives: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub max_orthonormality_error: f64,
    pub violations: Vec<InequalityViolation>,
    pub trace: Vec<IterationRecord>,
}

impl RunReport {
    pub fn new<P: Serialize>(result: &SolveResult, params: &P, dataset_meta: DatasetMeta) -> Result<Self> {
        Ok(RunReport {
            algorithm: result.algorithm.clone(),
            params: serde_json::to_value(params)?,
            dataset_meta,
            r: result.u.r(),
            iterations: result.iterations,
            converged: result.converged,
            phi: result.phi,
            stationarity: result.stationarity,
            time_ms: result.time_ms,
            objectives: result.objectives.values().to_vec(),
            y: result.y.as_ref().map(|y| y.as_slice().to_vec()),
            max_orthonormality_error: result.max_orthonormality_error,
            violations: result.violations.clone(),
            trace: result.trace.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

const TRACE_KEYS: [&str; 9] = ["k", "phi", "E", "grad_norm", "gap", "lambda", "beta", "zeta", "ms"];

/// Structural check of a serialized report: required keys with the right
/// JSON types, including every trace entry.
pub fn validate_report(value: &Value) -> Result<()> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Schema("report is not a JSON object".into()))?;
    let need = |key: &str, ok: fn(&Value) -> bool| -> Result<()> {
        match obj.get(key) {
            Some(v) if ok(v) => Ok(()),
            Some(_) => Err(Error::Schema(format!("field '{key}' has the wrong type"))),
            None => Err(Error::Schema(format!("missing field '{key}'"))),
        }
    };
    need("algorithm", |v| matches!(v.as_str(), Some("arpgda" | "rsg")))?;
    need("params", Value::is_object)?;
    need("dataset_meta", Value::is_object)?;
    need("r", Value::is_u64)?;
    need("iterations", Value::is_u64)?;
    need("converged", Value::is_boolean)?;
    need("phi", Value::is_number)?;
    need("stationarity", |v| v.is_number() || v.is_null())?;
    need("time_ms", Value::is_number)?;
    need("trace", Value::is_array)?;
    for (i, rec) in obj["trace"].as_array().into_iter().flatten().enumerate() {
        let rec = rec
            .as_object()
            .ok_or_else(|| Error::Schema(format!("trace[{i}] is not an object")))?;
        for key in TRACE_KEYS {
            match rec.get(key) {
                Some(v) if v.is_number() || (v.is_null() && !matches!(key, "k" | "phi" | "ms")) => {}
                _ => return Err(Error::Schema(format!("trace[{i}].{key} missing or invalid"))),
            }
        }
    }
    if obj["algorithm"] == "arpgda" && obj["converged"] == true {
        let e = obj["stationarity"].as_f64();
        let eps = obj["params"].get("epsilon").and_then(Value::as_f64);
        if let (Some(e), Some(eps)) = (e, eps) {
            if e > eps {
                return Err(Error::Schema(format!(
                    "converged run reports stationarity {e} above epsilon {eps}"
                )));
            }
        }
    }
    Ok(())
}
