//! The standard simplex `Δ = {y : Σ yᵢ = 1, yᵢ ≥ 0}` and Euclidean projection onto it.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on `|Σ yᵢ − 1|` for a vector to count as simplex weights.
pub const TOL_SUM: f64 = 1e-12;

/// A point of the standard simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("simplex weights need n >= 1".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::Input(format!("weight {i} is {v}, must be >= 0")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > TOL_SUM {
            return Err(Error::Input(format!("weights sum to {sum}, not 1")));
        }
        Ok(SimplexWeights(values))
    }

    /// The vertex `e_j`.
    pub fn vertex(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::Dimension(format!("vertex {j} of a {n}-simplex")));
        }
        let mut v = vec![0.0; n];
        v[j] = 1.0;
        Ok(SimplexWeights(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `⟨self, v⟩`.
    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn distance_squared(&self, other: &SimplexWeights) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// One CSV row, values separated by commas.
    pub fn to_csv_row(&self) -> String {
        self.0
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A compact convex set the ascent variable lives in.
///
/// The solver only needs the Euclidean projection and the radius
/// `R = max_{y ∈ Y} ‖y‖`, which enters the regularization schedule.
pub trait AscentSet {
    fn project(&self, z: &[f64]) -> Result<SimplexWeights>;
    fn radius(&self) -> f64;
}

/// The standard simplex; `R = 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardSimplex;

impl AscentSet for StandardSimplex {
    fn project(&self, z: &[f64]) -> Result<SimplexWeights> {
        project_to_simplex(z)
    }

    fn radius(&self) -> f64 {
        1.0
    }
}

/// Euclidean projection onto the standard simplex by sort-and-threshold.
///
/// Sorts `z` in descending order, finds the largest `ρ` with
/// `u_ρ > (Σ_{j≤ρ} u_j − 1)/ρ`, and returns `max(z − τ, 0)` for the
/// corresponding threshold `τ`. `O(n log n)`.
pub fn project_to_simplex(z: &[f64]) -> Result<SimplexWeights> {
    if z.is_empty() {
        return Err(Error::Dimension("cannot project an empty vector".into()));
    }
    if let Some((i, v)) = z.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Input(format!("entry {i} is not finite ({v})")));
    }

    let mut sorted = z.to_vec();
    // stable: equal entries keep index order
    sorted.sort_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut tau = sorted[0] - 1.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u > t {
            tau = t;
        } else {
            break;
        }
    }

    let mut y: Vec<f64> = z.iter().map(|&v| (v - tau).max(0.0)).collect();

    // Pin the sum to one over the support.
    let support = y.iter().filter(|&&v| v > 0.0).count();
    let excess = y.iter().sum::<f64>() - 1.0;
    if support > 0 && excess != 0.0 {
        let shift = excess / support as f64;
        for v in y.iter_mut().filter(|v| **v > 0.0) {
            *v = (*v - shift).max(0.0);
        }
    }
    Ok(SimplexWeights(y))
}

/// `(1/n, …, 1/n)`.
pub fn uniform_weights(n: usize) -> Result<SimplexWeights> {
    if n == 0 {
        return Err(Error::Dimension("uniform weights need n >= 1".into()));
    }
    Ok(SimplexWeights(vec![1.0 / n as f64; n]))
}
