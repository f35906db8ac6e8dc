//! Riemannian subgradient ascent on `Φ(U) = minᵢ fᵢ(U)`.
//!
//! Each step picks the lowest-index minimizing group `i*`, projects
//! `∇f_{i*}(U)` onto the tangent space and retracts along it with stepsize
//! `c/√k`. With a reference value the run stops once
//! `Φ(U_k) ≥ (1 − 10⁻⁴)·reference`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::manifold::{orthonormality_error, polar_retract, project_to_tangent, random_stiefel, StiefelPoint};
use crate::problem::{dist_to_subgradient, Evaluation, GroupedDataset};
use crate::solver::{IterationRecord, SolveResult, DEFAULT_MAX_ITERS};
use crate::{Error, Result};

/// Relative tolerance of the reference-value stopping rule.
pub const REFERENCE_TOLERANCE: f64 = 1e-4;

/// Default stride between subgradient-distance evaluations in the trace.
pub const DEFAULT_DIST_STRIDE: usize = 100;

/// Stepsize scales tried by [`sweep_rsg`].
pub const STEP_GRID: [f64; 5] = [1e-3, 1e-2, 1e-1, 1e0, 1e1];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsgParams {
    pub c: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub reference_phi: Option<f64>,
    /// Evaluate `Dist(0, ∂_R Φ)` every this many iterations; 0 disables it.
    pub dist_stride: usize,
    pub trace_stride: usize,
}

impl Default for RsgParams {
    fn default() -> Self {
        RsgParams {
            c: 0.1,
            max_iters: DEFAULT_MAX_ITERS,
            seed: 0,
            reference_phi: None,
            dist_stride: DEFAULT_DIST_STRIDE,
            trace_stride: 1,
        }
    }
}

impl RsgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Parameter(format!("c must be positive, got {}", self.c)));
        }
        if self.max_iters == 0 || self.trace_stride == 0 {
            return Err(Error::Parameter("max_iters and trace_stride must be positive".into()));
        }
        if let Some(v) = self.reference_phi {
            if v.is_nan() {
                return Err(Error::Parameter("reference_phi is NaN".into()));
            }
        }
        Ok(())
    }

    fn target(&self) -> Option<f64> {
        self.reference_phi.map(|v| (1.0 - REFERENCE_TOLERANCE) * v)
    }
}

/// `R_U(+(c/√k) grad f_{i*}(U))` given the evaluation at `U`.
fn step_from(eval: &Evaluation, u: &StiefelPoint, data: &GroupedDataset, c: f64, k: usize) -> Result<StiefelPoint> {
    let i = eval.objectives().argmin();
    let grad = project_to_tangent(u, &eval.group_gradient(data, i))?;
    if !grad.norm().is_finite() {
        return Err(Error::Numerical(format!(
            "iteration {k}: subgradient of group {i} is not finite"
        )));
    }
    polar_retract(u, &grad.scale(c / (k as f64).sqrt()))
}

/// One subgradient ascent step from `U_k`.
pub fn rsg_step(u: &StiefelPoint, data: &GroupedDataset, c: f64, k: usize) -> Result<StiefelPoint> {
    if k == 0 {
        return Err(Error::Parameter("iteration index starts at 1".into()));
    }
    let eval = Evaluation::new(data, u)?;
    step_from(&eval, u, data, c, k)
}

/// Runs the subgradient method from `random_stiefel(d, r, seed)`.
///
/// `iterations` counts steps taken. The trace holds one record per iterate
/// `U_k` that was tested against the stopping rule, starting at `k = 1`.
pub fn solve_rsg(data: &GroupedDataset, r: usize, params: &RsgParams) -> Result<SolveResult> {
    params.validate()?;
    let u0 = random_stiefel(data.d(), r, params.seed)?;
    solve_rsg_from(data, u0, params)
}

pub fn solve_rsg_from(data: &GroupedDataset, u0: StiefelPoint, params: &RsgParams) -> Result<SolveResult> {
    params.validate()?;
    let start = Instant::now();
    let target = params.target();
    let mut u = u0;
    let mut max_orth = orthonormality_error(u.matrix());
    let mut trace = Vec::new();
    let mut steps = 0;

    let mut k = 1;
    let (eval, converged) = loop {
        let eval = Evaluation::new(data, &u)?;
        let phi = eval.objectives().min();
        if !phi.is_finite() {
            return Err(Error::Numerical(format!("iteration {k}: objective is not finite")));
        }
        let converged = target.is_some_and(|t| phi >= t);
        let last = converged || steps == params.max_iters;
        if last || k % params.trace_stride == 0 || k == 1 {
            let dist = if params.dist_stride > 0 && (k % params.dist_stride == 0 || last) {
                dist_to_subgradient(data, &u, 0.1).ok()
            } else {
                None
            };
            trace.push(IterationRecord {
                k,
                phi,
                stationarity: None,
                grad_norm: None,
                gap: None,
                lambda: None,
                beta: None,
                zeta: None,
                dist,
                ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
        if last {
            break (eval, converged);
        }
        u = step_from(&eval, &u, data, params.c, k)?;
        max_orth = max_orth.max(orthonormality_error(u.matrix()));
        steps += 1;
        k += 1;
    };

    let objectives = eval.into_objectives();
    Ok(SolveResult {
        algorithm: "rsg".into(),
        phi: objectives.min(),
        objectives,
        u,
        y: None,
        stationarity: None,
        iterations: steps,
        converged,
        time_ms: start.elapsed().as_secs_f64() * 1e3,
        trace,
        violations: Vec::new(),
        max_orthonormality_error: max_orth,
    })
}

/// Runs [`solve_rsg`] for every `c` in `grid` and keeps the run with the
/// largest final `Φ` (earliest `c` on ties).
pub fn sweep_rsg(data: &GroupedDataset, r: usize, params: &RsgParams, grid: &[f64]) -> Result<SolveResult> {
    let mut best: Option<SolveResult> = None;
    for &c in grid {
        let res = solve_rsg(data, r, &RsgParams { c, ..*params })?;
        if best.as_ref().map_or(true, |b| res.phi > b.phi) {
            best = Some(res);
        }
    }
    best.ok_or_else(|| Error::Parameter("empty stepsize grid".into()))
}
