//! The FPCA problem instance.
//!
//! Group `i` contributes `fᵢ(U) = ⟨XᵢXᵢᵀ, UUᵀ⟩ = ‖XᵢᵀU‖²_F`. The minimax
//! objective is `f(U, y) = Σ yᵢ (−fᵢ(U))`, linear in `y`. Evaluations go
//! through the `N×r` product `XᵀU`, or through the cached group covariances
//! `XᵢXᵢᵀ` when there are more samples than `n·d` (block datasets).

use nalgebra::{DMatrixView, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::manifold::{project_to_tangent, StiefelPoint, TangentVector};
use crate::simplex::{project_to_simplex, SimplexWeights};
use crate::{Error, Mat, Result};

/// `N` samples in `ℝ^d`, stored as the columns of a `d×N` matrix and
/// partitioned into `n` contiguous non-empty groups.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedDataset {
    samples: Mat,
    group_sizes: Vec<usize>,
    offsets: Vec<usize>,
    labels: Vec<String>,
    covariances: Option<Vec<Mat>>,
}

impl GroupedDataset {
    /// Groups are labelled `0..n`.
    pub fn new(samples: Mat, group_sizes: Vec<usize>) -> Result<Self> {
        let labels = (0..group_sizes.len()).map(|i| i.to_string()).collect();
        Self::with_labels(samples, group_sizes, labels)
    }

    pub fn with_labels(samples: Mat, group_sizes: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if group_sizes.is_empty() {
            return Err(Error::EmptyDataset("no groups".into()));
        }
        if labels.len() != group_sizes.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} groups",
                labels.len(),
                group_sizes.len()
            )));
        }
        if let Some(i) = group_sizes.iter().position(|&s| s == 0) {
            return Err(Error::Input(format!("group {} is empty", labels[i])));
        }
        let total: usize = group_sizes.iter().sum();
        if total != samples.ncols() {
            return Err(Error::Dimension(format!(
                "group sizes sum to {total} but there are {} samples",
                samples.ncols()
            )));
        }
        if samples.nrows() == 0 {
            return Err(Error::Dimension("samples have dimension 0".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("samples contain non-finite values".into()));
        }
        let mut offsets = Vec::with_capacity(group_sizes.len());
        let mut acc = 0;
        for &s in &group_sizes {
            offsets.push(acc);
            acc += s;
        }
        let mut data = GroupedDataset {
            samples,
            group_sizes,
            offsets,
            labels,
            covariances: None,
        };
        if data.n_samples() > data.n_groups() * data.d() {
            let covs = (0..data.n_groups())
                .map(|i| {
                    let g = data.group(i);
                    g * g.transpose()
                })
                .collect();
            data.covariances = Some(covs);
        }
        Ok(data)
    }

    /// Builds a dataset from a list of per-group `d×nᵢ` blocks.
    pub fn from_groups(groups: &[Mat]) -> Result<Self> {
        let Some(first) = groups.first() else {
            return Err(Error::EmptyDataset("no groups".into()));
        };
        let d = first.nrows();
        if let Some(g) = groups.iter().find(|g| g.nrows() != d) {
            return Err(Error::Dimension(format!(
                "group blocks have {} and {} rows",
                d,
                g.nrows()
            )));
        }
        let sizes: Vec<usize> = groups.iter().map(|g| g.ncols()).collect();
        let total = sizes.iter().sum();
        let mut samples = Mat::zeros(d, total);
        let mut at = 0;
        for g in groups {
            samples.columns_mut(at, g.ncols()).copy_from(g);
            at += g.ncols();
        }
        GroupedDataset::new(samples, sizes)
    }

    pub fn d(&self) -> usize {
        self.samples.nrows()
    }

    /// Total sample count `N`.
    pub fn n_samples(&self) -> usize {
        self.samples.ncols()
    }

    /// Group count `n`.
    pub fn n_groups(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn samples(&self) -> &Mat {
        &self.samples
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The `d×nᵢ` block `Xᵢ`.
    pub fn group(&self, i: usize) -> DMatrixView<'_, f64> {
        self.samples.columns(self.offsets[i], self.group_sizes[i])
    }

    /// Column range of group `i` inside the sample matrix.
    pub fn group_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i] + self.group_sizes[i]
    }

    /// `maxⱼ ‖xⱼ‖²` over all samples.
    pub fn max_sample_norm_squared(&self) -> f64 {
        self.samples
            .column_iter()
            .map(|c| c.norm_squared())
            .fold(0.0, f64::max)
    }

    /// Cached `XᵢXᵢᵀ` per group, present only when `N > n·d`.
    pub fn covariances(&self) -> Option<&[Mat]> {
        self.covariances.as_deref()
    }

    fn check_point(&self, u: &StiefelPoint) -> Result<()> {
        if u.d() != self.d() {
            return Err(Error::Dimension(format!(
                "data dimension {} but U is {}x{}",
                self.d(),
                u.d(),
                u.r()
            )));
        }
        Ok(())
    }

    /// `XᵀU`.
    pub fn project(&self, u: &StiefelPoint) -> Result<Mat> {
        self.check_point(u)?;
        Ok(self.samples.tr_mul(u.matrix()))
    }
}

/// `(f₁(U), …, f_n(U))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupObjectives(Vec<f64>);

impl GroupObjectives {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `Φ = minᵢ fᵢ`.
    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Lowest index attaining the minimum.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v < self.0[best] {
                best = i;
            }
        }
        best
    }

    /// `max_{y' ∈ Δ} ⟨∇_y f, y' − y⟩ = Σ yᵢfᵢ − minᵢ fᵢ`, since `∇_y f = −f`.
    pub fn ascent_gap(&self, y: &SimplexWeights) -> f64 {
        (y.dot(&self.0) - self.min()).max(0.0)
    }
}

#[derive(Debug, Clone)]
enum Products {
    /// `XᵀU`, `N×r`.
    Samples(Mat),
    /// `XᵢXᵢᵀU` per group, each `d×r`.
    Covariance(Vec<Mat>),
}

/// Objectives at one point, with the products needed for gradients kept.
#[derive(Debug, Clone)]
pub struct Evaluation {
    products: Products,
    objectives: GroupObjectives,
}

impl Evaluation {
    pub fn new(data: &GroupedDataset, u: &StiefelPoint) -> Result<Self> {
        data.check_point(u)?;
        let (products, objectives) = match data.covariances() {
            Some(covs) => {
                let prods: Vec<Mat> = covs.iter().map(|a| a * u.matrix()).collect();
                let vals = prods.iter().map(|p| u.matrix().dot(p)).collect();
                (Products::Covariance(prods), vals)
            }
            None => {
                let projection = data.samples().tr_mul(u.matrix());
                let vals = (0..data.n_groups())
                    .map(|i| {
                        let range = data.group_range(i);
                        projection.rows(range.start, range.len()).norm_squared()
                    })
                    .collect();
                (Products::Samples(projection), vals)
            }
        };
        Ok(Evaluation {
            products,
            objectives: GroupObjectives(objectives),
        })
    }

    pub fn objectives(&self) -> &GroupObjectives {
        &self.objectives
    }

    pub fn into_objectives(self) -> GroupObjectives {
        self.objectives
    }

    /// `−2 Σᵢ yᵢ Xᵢ(XᵢᵀU)`.
    pub fn euclidean_gradient(&self, data: &GroupedDataset, y: &[f64]) -> Result<Mat> {
        if y.len() != data.n_groups() {
            return Err(Error::Dimension(format!(
                "{} weights for {} groups",
                y.len(),
                data.n_groups()
            )));
        }
        match &self.products {
            Products::Samples(projection) => {
                let mut weighted = projection.clone();
                for (i, &yi) in y.iter().enumerate() {
                    let range = data.group_range(i);
                    weighted.rows_mut(range.start, range.len()).scale_mut(-2.0 * yi);
                }
                Ok(data.samples() * weighted)
            }
            Products::Covariance(prods) => {
                let mut g = Mat::zeros(prods[0].nrows(), prods[0].ncols());
                for (p, &yi) in prods.iter().zip(y) {
                    let c = -2.0 * yi;
                    g.zip_apply(p, |a, b| *a += c * b);
                }
                Ok(g)
            }
        }
    }

    /// Riemannian gradient of `f(·, y)` at the evaluated point.
    pub fn riemannian_gradient(
        &self,
        data: &GroupedDataset,
        u: &StiefelPoint,
        y: &[f64],
    ) -> Result<TangentVector> {
        project_to_tangent(u, &self.euclidean_gradient(data, y)?)
    }

    /// Euclidean gradient of the single group objective `fᵢ`: `2 Xᵢ(XᵢᵀU)`.
    pub fn group_gradient(&self, data: &GroupedDataset, i: usize) -> Mat {
        match &self.products {
            Products::Samples(projection) => {
                let range = data.group_range(i);
                let block = projection.rows(range.start, range.len());
                data.group(i) * block * 2.0
            }
            Products::Covariance(prods) => &prods[i] * 2.0,
        }
    }
}

/// `fᵢ(U) = ‖XᵢᵀU‖²_F` for every group.
pub fn group_objectives(data: &GroupedDataset, u: &StiefelPoint) -> Result<GroupObjectives> {
    Ok(Evaluation::new(data, u)?.into_objectives())
}

/// `∇_U f(U, y) = −2 Σᵢ yᵢ Xᵢ(XᵢᵀU)`.
pub fn euclidean_gradient_u(
    data: &GroupedDataset,
    u: &StiefelPoint,
    y: &SimplexWeights,
) -> Result<Mat> {
    Evaluation::new(data, u)?.euclidean_gradient(data, y.as_slice())
}

/// `grad_U f(U, y)`, the tangent projection of the Euclidean gradient.
pub fn riemannian_gradient_u(
    data: &GroupedDataset,
    u: &StiefelPoint,
    y: &SimplexWeights,
) -> Result<TangentVector> {
    Evaluation::new(data, u)?.riemannian_gradient(data, u, y.as_slice())
}

/// `∇_y f(U, y) = (−f₁(U), …, −f_n(U))`; independent of `y`.
pub fn y_gradient(data: &GroupedDataset, u: &StiefelPoint) -> Result<Vec<f64>> {
    Ok(group_objectives(data, u)?
        .values()
        .iter()
        .map(|v| -v)
        .collect())
}

/// `f(U, y) = −Σ yᵢ fᵢ(U)`.
pub fn coupled_objective(data: &GroupedDataset, u: &StiefelPoint, y: &SimplexWeights) -> Result<f64> {
    if y.len() != data.n_groups() {
        return Err(Error::Dimension(format!(
            "{} weights for {} groups",
            y.len(),
            data.n_groups()
        )));
    }
    Ok(-y.dot(group_objectives(data, u)?.values()))
}

/// `Φ(U) = minᵢ fᵢ(U)`.
pub fn min_objective(data: &GroupedDataset, u: &StiefelPoint) -> Result<f64> {
    Ok(group_objectives(data, u)?.min())
}

/// Constants of the descent lemma and the cross-Lipschitz bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessConstants {
    /// `2 maxᵢ ‖XᵢXᵢᵀ‖₂`.
    pub l1: f64,
    /// `2 √(Ky-Fan-r of Σᵢ (XᵢXᵢᵀ)²)`.
    pub l2: f64,
}

/// Largest eigenvalue of a symmetric PSD matrix.
fn lambda_max(m: Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn smoothness_constants(data: &GroupedDataset, r: usize) -> Result<SmoothnessConstants> {
    let d = data.d();
    if r == 0 || r > d {
        return Err(Error::Dimension(format!("need 1 <= r <= d = {d}, got r = {r}")));
    }
    let mut spectral_max: f64 = 0.0;
    let mut m = Mat::zeros(d, d);
    for i in 0..data.n_groups() {
        let xi = data.group(i);
        if xi.ncols() < d {
            // (XXᵀ)² = X(XᵀX)Xᵀ, and σ_max(X)² = λ_max(XᵀX)
            let inner = xi.tr_mul(&xi);
            spectral_max = spectral_max.max(lambda_max(inner.clone()));
            let left = xi * inner;
            m.gemm(1.0, &left, &xi.transpose(), 1.0);
        } else {
            let outer = xi * xi.transpose();
            spectral_max = spectral_max.max(lambda_max(outer.clone()));
            m.gemm(1.0, &outer, &outer, 1.0);
        }
    }
    m = (&m + m.transpose()) * 0.5;
    let kf = ky_fan_norm(&m, r)?;
    Ok(SmoothnessConstants {
        l1: 2.0 * spectral_max,
        l2: 2.0 * kf.sqrt(),
    })
}

/// Sum of the `r` largest singular values of a symmetric PSD matrix.
///
/// Rejects inputs that are asymmetric or indefinite by more than `1e-8`
/// relative to the largest entry magnitude.
pub fn ky_fan_norm(m: &Mat, r: usize) -> Result<f64> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::Dimension(format!("matrix is {rows}x{cols}, not square")));
    }
    if r > rows {
        return Err(Error::Dimension(format!("r = {r} exceeds size {rows}")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let scale = m.amax();
    let tol = 1e-8 * scale;
    let asym = (m - m.transpose()).amax();
    if asym > tol {
        return Err(Error::Input(format!("matrix is not symmetric (max |M - Mᵀ| = {asym:e})")));
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    if let Some(&neg) = eig.iter().find(|&&l| l < -tol * rows as f64) {
        return Err(Error::Input(format!("matrix is not PSD (eigenvalue {neg:e})")));
    }
    eig.iter_mut().for_each(|l| *l = l.abs());
    eig.sort_by(|a, b| b.total_cmp(a));
    Ok(eig.iter().take(r).sum())
}

/// The two components of the stationarity measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationarity {
    pub grad_norm: f64,
    pub gap: f64,
}

impl Stationarity {
    pub fn value(&self) -> f64 {
        self.grad_norm.max(self.gap)
    }
}

pub fn stationarity_parts(
    data: &GroupedDataset,
    u: &StiefelPoint,
    y: &SimplexWeights,
) -> Result<Stationarity> {
    if y.len() != data.n_groups() {
        return Err(Error::Dimension(format!(
            "{} weights for {} groups",
            y.len(),
            data.n_groups()
        )));
    }
    let eval = Evaluation::new(data, u)?;
    let grad = eval.riemannian_gradient(data, u, y.as_slice())?;
    Ok(Stationarity {
        grad_norm: grad.norm(),
        gap: eval.objectives().ascent_gap(y),
    })
}

/// `E(U, y) = max{‖grad_U f(U, y)‖, max_{y' ∈ Δ} ⟨∇_y f(U, y), y' − y⟩}`.
pub fn stationarity_measure(
    data: &GroupedDataset,
    u: &StiefelPoint,
    y: &SimplexWeights,
) -> Result<f64> {
    Ok(stationarity_parts(data, u, y)?.value())
}

/// Iteration cap and tolerance for the inner simplex QP.
const QP_MAX_ITERS: usize = 10_000;
const QP_TOL: f64 = 1e-8;

/// Approximate `Dist(0, ∂_R Φ(U))`.
///
/// Takes the near-active groups `A = {i : fᵢ − min f ≤ rel_threshold · min f}`
/// and returns the minimum norm over the convex hull of their Riemannian
/// gradients, found by projected gradient on the simplex.
pub fn dist_to_subgradient(data: &GroupedDataset, u: &StiefelPoint, rel_threshold: f64) -> Result<f64> {
    let eval = Evaluation::new(data, u)?;
    let f = eval.objectives();
    let phi = f.min();
    if !(phi > 0.0) {
        return Err(Error::DiagnosticUnavailable(format!(
            "min objective is {phi}, the relative active-set threshold needs it positive"
        )));
    }
    let grads = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v - phi <= rel_threshold * phi)
        .map(|(i, _)| project_to_tangent(u, &eval.group_gradient(data, i)).map(|g| g.into_matrix()))
        .collect::<Result<Vec<_>>>()?;
    let (dist, _) = min_norm_in_hull(&grads)?;
    Ok(dist)
}

/// `min_{y ∈ Δ} ‖Σ yᵢ gᵢ‖` and a minimizing `y`.
///
/// Projected gradient on `yᵀQy` with `Q` the Gram matrix of the `gᵢ` and
/// stepsize `1/(2 λ_max(Q))`.
pub fn min_norm_in_hull(grads: &[Mat]) -> Result<(f64, SimplexWeights)> {
    let k = grads.len();
    if k == 0 {
        return Err(Error::Dimension("no gradients".into()));
    }
    let gram = Mat::from_fn(k, k, |i, j| grads[i].dot(&grads[j]));
    let value = |y: &[f64]| -> f64 {
        let yv = nalgebra::DVector::from_column_slice(y);
        yv.dot(&(&gram * &yv)).max(0.0)
    };
    let mut y = crate::simplex::uniform_weights(k)?;
    let lmax = lambda_max(gram.clone());
    if k == 1 || lmax <= 0.0 {
        let v = value(y.as_slice());
        return Ok((v.sqrt(), y));
    }
    let step = 1.0 / (2.0 * lmax);
    for _ in 0..QP_MAX_ITERS {
        let yv = y.to_dvector();
        let g = &gram * &yv * 2.0;
        let z: Vec<f64> = yv.iter().zip(g.iter()).map(|(a, b)| a - step * b).collect();
        let next = project_to_simplex(&z)?;
        let moved = next.distance_squared(&y).sqrt();
        y = next;
        if moved <= QP_TOL {
            break;
        }
    }
    Ok((value(y.as_slice()).sqrt(), y))
}
