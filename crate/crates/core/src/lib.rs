//! Fair principal component analysis as a non-convex linear minimax problem
//! over the Stiefel manifold.
//!
//! The FPCA problem `max_{UᵀU = I} min_i ⟨XᵢXᵢᵀ, UUᵀ⟩` is solved in its
//! equivalent form `min_U max_{y ∈ Δ} Σ yᵢ (−fᵢ(U))` by alternating a
//! Riemannian gradient descent step in `U` (polar retraction) with a
//! projected gradient ascent step in `y` on a regularized objective. A
//! Riemannian subgradient baseline on `Φ(U) = minᵢ fᵢ(U)` is provided for
//! comparisons.
//!
//! Module map:
//! - [`manifold`]: Stiefel points, tangent projection, polar retraction.
//! - [`simplex`]: the standard simplex and Euclidean projection onto it.
//! - [`problem`]: grouped data, objectives, gradients, smoothness constants,
//!   stationarity and subgradient diagnostics.
//! - [`solver`]: the alternating descent-ascent solver.
//! - [`baselines`]: the Riemannian subgradient method.
//! - [`data`]: synthetic generators, CSV ingestion, preprocessing.
//! - [`report`] and [`compare`]: JSON run reports and comparison sweeps.

pub mod baselines;
pub mod compare;
pub mod data;
pub mod error;
pub mod manifold;
pub mod problem;
pub mod report;
pub mod simplex;
pub mod solver;

pub use baselines::{rsg_step, solve_rsg, RsgParams};
pub use data::{
    gen_synthetic_blocks, gen_synthetic_gaussian, load_csv_grouped, preprocess, DatasetMeta,
    Preprocess,
};
pub use error::{Error, Result};
pub use manifold::{
    orthonormality_error, polar_retract, project_to_tangent, random_stiefel, StiefelPoint,
    TangentVector,
};
pub use problem::{
    dist_to_subgradient, euclidean_gradient_u, group_objectives, ky_fan_norm, min_objective,
    riemannian_gradient_u, smoothness_constants, stationarity_measure, y_gradient,
    GroupObjectives, GroupedDataset, SmoothnessConstants,
};
pub use simplex::{project_to_simplex, uniform_weights, SimplexWeights};
pub use solver::{
    arpgda_step, make_schedules, solve_arpgda, ArpgdaParams, IterationRecord, Schedules,
    SolveResult, SolverState,
};

/// Dense real matrix used throughout.
pub type Mat = nalgebra::DMatrix<f64>;
