//! Alternating Riemannian/projected gradient descent ascent.
//!
//! Each iteration takes a Riemannian gradient descent step in `U` on
//! `f(U, y) = −Σ yᵢ fᵢ(U)` followed by a projected gradient ascent step in
//! `y` on the regularized `f_k(U, y) = f(U, y) − (λ_k/2)‖y‖²`:
//!
//! ```text
//! U_{k+1} = R_{U_k}(−ζ_k grad_U f(U_k, y_k))
//! y_{k+1} = P_Δ(y_k + (∇_y f(U_{k+1}, y_k) − λ_k y_k) / (λ_k + β_k))
//! ```
//!
//! with `λ_k = ε/(8R²)`, `β_k = μ k^{−ρ}` and
//! `ζ_k = θ / (L₁ + L₂²/(λ_k + β_k + β_{k+1}))`. The run stops once the
//! stationarity measure at `(U_{k+1}, y_{k+1})` drops to `ε`.

use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::manifold::{polar_retract, random_stiefel, StiefelPoint, TangentVector};
use crate::problem::{smoothness_constants, Evaluation, GroupObjectives, GroupedDataset, SmoothnessConstants};
use crate::simplex::{uniform_weights, AscentSet, SimplexWeights, StandardSimplex};
use crate::{Error, Result};

/// Slack allowed on the per-iteration inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArpgdaParams {
    pub epsilon: f64,
    pub rho: f64,
    pub theta: f64,
    pub mu: f64,
    /// `R = max_{y ∈ Y} ‖y‖`; 1 for the simplex.
    pub radius: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub check_inequalities: bool,
    /// Keep every `trace_stride`-th iteration record (the last one is always kept).
    pub trace_stride: usize,
}

pub const DEFAULT_MAX_ITERS: usize = 100_000;

impl ArpgdaParams {
    /// Defaults for one-sample-per-group data (`n = N`):
    /// `ε = 10⁻³ maxᵢ‖xᵢ‖²`, `ρ = 1.1`, `θ = 1.5`, `μ = 30 n² √r`.
    pub fn per_sample_defaults(data: &GroupedDataset, r: usize) -> Self {
        let n = data.n_groups() as f64;
        ArpgdaParams {
            epsilon: 1e-3 * data.max_sample_norm_squared(),
            rho: 1.1,
            theta: 1.5,
            mu: 30.0 * n * n * (r as f64).sqrt(),
            ..Self::base()
        }
    }

    /// Defaults for block data (`n ≪ N`):
    /// `ε = 10⁻³`, `ρ = 1.01`, `θ = 1.99`, `μ = 200 n² √r`.
    pub fn block_defaults(n_groups: usize, r: usize) -> Self {
        let n = n_groups as f64;
        ArpgdaParams {
            epsilon: 1e-3,
            rho: 1.01,
            theta: 1.99,
            mu: 200.0 * n * n * (r as f64).sqrt(),
            ..Self::base()
        }
    }

    /// Picks the per-sample regime when every group has one sample.
    pub fn defaults_for(data: &GroupedDataset, r: usize) -> Self {
        if data.n_groups() == data.n_samples() {
            Self::per_sample_defaults(data, r)
        } else {
            Self::block_defaults(data.n_groups(), r)
        }
    }

    fn base() -> Self {
        ArpgdaParams {
            epsilon: 1e-3,
            rho: 1.1,
            theta: 1.5,
            mu: 0.0,
            radius: 1.0,
            max_iters: DEFAULT_MAX_ITERS,
            seed: 0,
            check_inequalities: false,
            trace_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Parameter(what));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return bad(format!("rho must exceed 1, got {}", self.rho));
        }
        if !(self.theta > 0.0 && self.theta < 2.0) {
            return bad(format!("theta must lie in (0, 2), got {}", self.theta));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be nonnegative, got {}", self.mu));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive".into());
        }
        if self.trace_stride == 0 {
            return bad("trace_stride must be positive".into());
        }
        Ok(())
    }
}

/// Closed-form parameter sequences indexed from `k = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedules {
    lambda: f64,
    mu: f64,
    rho: f64,
    theta: f64,
    radius: f64,
    constants: SmoothnessConstants,
}

impl Schedules {
    /// `λ_k = ε/(8R²)`, the same for every `k`.
    pub fn lambda(&self, _k: usize) -> f64 {
        self.lambda
    }

    /// `β_k = μ k^{−ρ}`.
    pub fn beta(&self, k: usize) -> f64 {
        self.mu * (k as f64).powf(-self.rho)
    }

    /// `ζ_k = θ / (L₁ + L₂²/(λ_k + β_k + β_{k+1}))`.
    pub fn zeta(&self, k: usize) -> f64 {
        let denom = self.lambda(k) + self.beta(k) + self.beta(k + 1);
        let l2 = self.constants.l2;
        self.theta / (self.constants.l1 + l2 * l2 / denom)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn constants(&self) -> SmoothnessConstants {
        self.constants
    }
}

pub fn make_schedules(params: &ArpgdaParams, consts: &SmoothnessConstants) -> Result<Schedules> {
    if !(consts.l1 >= 0.0 && consts.l2 >= 0.0 && consts.l1.is_finite() && consts.l2.is_finite()) {
        return Err(Error::Parameter(format!("invalid smoothness constants {consts:?}")));
    }
    // checked first: all-zero data also zeroes the default epsilon
    if consts.l1 == 0.0 && consts.l2 == 0.0 {
        return Err(Error::Degenerate(
            "L1 = L2 = 0: every group objective is identically zero".into(),
        ));
    }
    params.validate()?;
    Ok(Schedules {
        lambda: params.epsilon / (8.0 * params.radius * params.radius),
        mu: params.mu,
        rho: params.rho,
        theta: params.theta,
        radius: params.radius,
        constants: *consts,
    })
}

/// Iterate `(U_k, y_k)` together with `y_{k−1}` and the evaluations the next
/// step needs.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub k: usize,
    pub u: StiefelPoint,
    pub y: SimplexWeights,
    pub y_prev: SimplexWeights,
    eval: Evaluation,
    grad: TangentVector,
}

impl SolverState {
    /// State at `k = 1`; `y_0` is taken equal to `y_1`.
    pub fn initial(data: &GroupedDataset, u: StiefelPoint, y: SimplexWeights) -> Result<Self> {
        if y.len() != data.n_groups() {
            return Err(Error::Dimension(format!(
                "{} weights for {} groups",
                y.len(),
                data.n_groups()
            )));
        }
        let eval = Evaluation::new(data, &u)?;
        let grad = eval.riemannian_gradient(data, &u, y.as_slice())?;
        Ok(SolverState {
            k: 1,
            y_prev: y.clone(),
            u,
            y,
            eval,
            grad,
        })
    }

    pub fn objectives(&self) -> &GroupObjectives {
        self.eval.objectives()
    }

    /// `grad_U f(U_k, y_k)`.
    pub fn gradient(&self) -> &TangentVector {
        &self.grad
    }

    /// `E(U_k, y_k)`.
    pub fn stationarity(&self) -> f64 {
        self.grad.norm().max(self.gap())
    }

    pub fn gap(&self) -> f64 {
        self.objectives().ascent_gap(&self.y)
    }

    /// `f_k(U_k, y_k) = −Σ yᵢ fᵢ(U_k) − (λ/2)‖y_k‖²`.
    fn regularized_value(&self, lambda: f64) -> f64 {
        -self.y.dot(self.objectives().values()) - 0.5 * lambda * self.y.norm_squared()
    }
}

/// One descent-ascent iteration, `U` first and then `y` against `U_{k+1}`.
///
/// The returned state carries `grad_U f(U_{k+1}, y_{k+1})`, which both the
/// stopping test and the next descent step use.
pub fn arpgda_step(state: SolverState, schedules: &Schedules, data: &GroupedDataset) -> Result<SolverState> {
    let k = state.k;
    let zeta = schedules.zeta(k);
    let lambda = schedules.lambda(k);
    let beta = schedules.beta(k);

    let u_next = polar_retract(&state.u, &state.grad.scale(-zeta))?;
    let eval = Evaluation::new(data, &u_next)?;
    if let Some(i) = eval.objectives().values().iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "iteration {k}: objective of group {i} is not finite"
        )));
    }

    // ∇_y f(U_{k+1}, y_k) = −f(U_{k+1})
    let step = 1.0 / (lambda + beta);
    let z: Vec<f64> = state
        .y
        .as_slice()
        .iter()
        .zip(eval.objectives().values())
        .map(|(&yi, &fi)| yi + step * (-fi - lambda * yi))
        .collect();
    let y_next = StandardSimplex.project(&z).map_err(|e| {
        Error::Numerical(format!("iteration {k}: ascent step failed: {e}"))
    })?;

    let grad = eval.riemannian_gradient(data, &u_next, y_next.as_slice())?;
    if !grad.norm().is_finite() {
        return Err(Error::Numerical(format!(
            "iteration {k}: Riemannian gradient is not finite"
        )));
    }
    Ok(SolverState {
        k: k + 1,
        u: u_next,
        y_prev: state.y,
        y: y_next,
        eval,
        grad,
    })
}

/// Per-iteration diagnostics. Fields that an algorithm does not produce are
/// `None` and serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub phi: f64,
    #[serde(rename = "E")]
    pub stationarity: Option<f64>,
    pub grad_norm: Option<f64>,
    pub gap: Option<f64>,
    pub lambda: Option<f64>,
    pub beta: Option<f64>,
    pub zeta: Option<f64>,
    /// Approximate `Dist(0, ∂_R Φ)` where it was evaluated.
    pub dist: Option<f64>,
    pub ms: f64,
}

impl IterationRecord {
    /// Equality ignoring wall-clock time.
    pub fn same_values(&self, other: &Self) -> bool {
        Self { ms: 0.0, ..self.clone() } == Self { ms: 0.0, ..other.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    SufficientDecrease,
    AscentGap,
}

/// A failed per-iteration inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityViolation {
    pub k: usize,
    pub kind: InequalityKind,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub algorithm: String,
    pub u: StiefelPoint,
    pub y: Option<SimplexWeights>,
    pub objectives: GroupObjectives,
    pub phi: f64,
    pub stationarity: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub time_ms: f64,
    pub trace: Vec<IterationRecord>,
    pub violations: Vec<InequalityViolation>,
    /// Largest orthonormality error over all iterates.
    pub max_orthonormality_error: f64,
}

impl SolveResult {
    /// First recorded iteration whose `Φ` reaches `target`.
    pub fn first_iteration_reaching(&self, target: f64) -> Option<usize> {
        self.trace.iter().find(|rec| rec.phi >= target).map(|rec| rec.k)
    }
}

/// Runs the solver from `random_stiefel(d, r, seed)` and uniform weights.
pub fn solve_arpgda(data: &GroupedDataset, r: usize, params: &ArpgdaParams) -> Result<SolveResult> {
    params.validate()?;
    let u0 = random_stiefel(data.d(), r, params.seed)?;
    solve_arpgda_from(data, u0, params)
}

/// Runs the solver from a given starting point.
pub fn solve_arpgda_from(data: &GroupedDataset, u0: StiefelPoint, params: &ArpgdaParams) -> Result<SolveResult> {
    let start = Instant::now();
    let consts = smoothness_constants(data, u0.r())?;
    let schedules = make_schedules(params, &consts)?;
    let radius = schedules.radius();

    let mut state = SolverState::initial(data, u0, uniform_weights(data.n_groups())?)?;
    let mut trace = Vec::new();
    let mut violations = Vec::new();
    let mut max_orth = crate::manifold::orthonormality_error(state.u.matrix());
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=params.max_iters {
        let (lambda, beta, zeta) = (schedules.lambda(k), schedules.beta(k), schedules.zeta(k));
        let before = params.check_inequalities.then(|| {
            (
                state.regularized_value(lambda),
                state.grad.norm().powi(2),
                state.y.distance_squared(&state.y_prev),
            )
        });

        state = arpgda_step(state, &schedules, data)?;
        iterations = k;
        max_orth = max_orth.max(crate::manifold::orthonormality_error(state.u.matrix()));

        let grad_norm = state.grad.norm();
        let gap = state.gap();
        let e = grad_norm.max(gap);

        if let Some((value_before, grad_sq, dy_before)) = before {
            let beta_next = schedules.beta(k + 1);
            let lhs = state.regularized_value(schedules.lambda(k + 1)) - value_before;
            let dy_after = state.y.distance_squared(&state.y_prev);
            let rhs = -(2.0 - schedules.theta()) / (2.0 * schedules.theta()) * zeta * grad_sq
                + 0.5 * (lambda - schedules.lambda(k + 1) + 4.0 * beta) * radius
                - 0.5 * (beta * dy_before - beta_next * dy_after);
            if lhs > rhs + INEQUALITY_SLACK {
                warn!("iteration {k}: sufficient decrease violated ({lhs:e} > {rhs:e})");
                violations.push(InequalityViolation {
                    k,
                    kind: InequalityKind::SufficientDecrease,
                    lhs,
                    rhs,
                });
            }
            // (U_{k+1}, y_{k+1}) has index k + 1 >= 2
            let bound = 4.0 * radius * radius * (lambda + beta);
            if gap > bound + INEQUALITY_SLACK {
                warn!("iteration {}: ascent gap {gap:e} exceeds {bound:e}", k + 1);
                violations.push(InequalityViolation {
                    k: k + 1,
                    kind: InequalityKind::AscentGap,
                    lhs: gap,
                    rhs: bound,
                });
            }
        }

        converged = e <= params.epsilon;
        let last = converged || k == params.max_iters;
        if last || k % params.trace_stride == 0 {
            trace.push(IterationRecord {
                k,
                phi: state.objectives().min(),
                stationarity: Some(e),
                grad_norm: Some(grad_norm),
                gap: Some(gap),
                lambda: Some(lambda),
                beta: Some(beta),
                zeta: Some(zeta),
                dist: None,
                ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
        if converged {
            break;
        }
    }

    let objectives = state.objectives().clone();
    Ok(SolveResult {
        algorithm: "arpgda".into(),
        phi: objectives.min(),
        stationarity: Some(state.stationarity()),
        objectives,
        u: state.u,
        y: Some(state.y),
        iterations,
        converged,
        time_ms: start.elapsed().as_secs_f64() * 1e3,
        trace,
        violations,
        max_orthonormality_error: max_orth,
    })
}
