//! Python bindings. Matrices cross the boundary as lists of rows.

use arpgda::compare::ArpgdaConfig;
use arpgda::data::{write_csv_grouped, DEFAULT_GROUP_COLUMN};
use arpgda::report::RunReport;
use arpgda::{DatasetMeta, GroupedDataset, Mat, Preprocess, SimplexWeights, StiefelPoint, TangentVector};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: arpgda::Error) -> PyErr {
    match e {
        arpgda::Error::Io(_) => PyOSError::new_err(e.to_string()),
        e if e.is_numerical() => PyRuntimeError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<Mat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(PyValueError::new_err("matrix must be non-empty"));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    Ok(Mat::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn point(u: &[Vec<f64>]) -> PyResult<StiefelPoint> {
    StiefelPoint::new(matrix(u)?).map_err(to_py)
}

fn weights(y: Vec<f64>) -> PyResult<SimplexWeights> {
    SimplexWeights::new(y).map_err(to_py)
}

/// Grouped samples. `Dataset(samples, group_sizes)` takes one row per
/// sample, groups stored contiguously in the given order.
#[pyclass(frozen, module = "arpgda_py")]
struct Dataset {
    inner: GroupedDataset,
    meta: DatasetMeta,
}

impl Dataset {
    fn wrap(inner: GroupedDataset, name: &str, seed: Option<u64>) -> Self {
        let mut meta = DatasetMeta::describe(name, &inner);
        meta.seed = seed;
        Dataset { inner, meta }
    }
}

#[pymethods]
impl Dataset {
    #[new]
    fn new(samples: Vec<Vec<f64>>, group_sizes: Vec<usize>) -> PyResult<Self> {
        let x = matrix(&samples)?.transpose();
        let data = GroupedDataset::new(x, group_sizes).map_err(to_py)?;
        Ok(Dataset::wrap(data, "python", None))
    }

    #[staticmethod]
    #[pyo3(signature = (d, n, seed=0))]
    fn gaussian(d: usize, n: usize, seed: u64) -> PyResult<Self> {
        let data = arpgda::gen_synthetic_gaussian(d, n, seed).map_err(to_py)?;
        Ok(Dataset::wrap(data, "gaussian", Some(seed)))
    }

    #[staticmethod]
    #[pyo3(signature = (d, group_sizes, seed=0))]
    fn blocks(d: usize, group_sizes: Vec<usize>, seed: u64) -> PyResult<Self> {
        let data = arpgda::gen_synthetic_blocks(d, &group_sizes, seed).map_err(to_py)?;
        Ok(Dataset::wrap(data, "blocks", Some(seed)))
    }

    #[staticmethod]
    #[pyo3(signature = (path, group_col=DEFAULT_GROUP_COLUMN))]
    fn from_csv(path: &str, group_col: &str) -> PyResult<Self> {
        let data = arpgda::load_csv_grouped(path, group_col).map_err(to_py)?;
        Ok(Dataset::wrap(data, path, None))
    }

    #[pyo3(signature = (path, group_col=DEFAULT_GROUP_COLUMN))]
    fn to_csv(&self, path: &str, group_col: &str) -> PyResult<()> {
        let file = std::fs::File::create(path).map_err(|e| PyOSError::new_err(e.to_string()))?;
        write_csv_grouped(&self.inner, file, group_col).map_err(to_py)
    }

    #[pyo3(signature = (normalize=false, center=false, standardize=false, min_norm=None))]
    fn preprocess(&self, normalize: bool, center: bool, standardize: bool, min_norm: Option<f64>) -> PyResult<Self> {
        let opts = Preprocess {
            normalize,
            center,
            standardize_features: standardize,
            min_norm_threshold: min_norm,
        };
        let threshold = opts.threshold_for(&self.inner);
        let data = arpgda::preprocess(&self.inner, &opts).map_err(to_py)?;
        let meta = self.meta.clone().with_preprocessing(&opts, &data, threshold);
        Ok(Dataset { inner: data, meta })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[getter]
    fn n_groups(&self) -> usize {
        self.inner.n_groups()
    }

    #[getter]
    fn group_sizes(&self) -> Vec<usize> {
        self.inner.group_sizes().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    /// Samples as rows.
    fn samples(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.samples().transpose())
    }

    /// `[f_1(U), ..., f_n(U)]`.
    fn objectives(&self, u: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        Ok(arpgda::group_objectives(&self.inner, &point(&u)?)
            .map_err(to_py)?
            .into_vec())
    }

    fn min_objective(&self, u: Vec<Vec<f64>>) -> PyResult<f64> {
        arpgda::min_objective(&self.inner, &point(&u)?).map_err(to_py)
    }

    fn riemannian_gradient(&self, u: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let g = arpgda::riemannian_gradient_u(&self.inner, &point(&u)?, &weights(y)?).map_err(to_py)?;
        Ok(rows(g.matrix()))
    }

    fn stationarity(&self, u: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<f64> {
        arpgda::stationarity_measure(&self.inner, &point(&u)?, &weights(y)?).map_err(to_py)
    }

    /// `(L1, L2)` for rank `r`.
    fn smoothness_constants(&self, r: usize) -> PyResult<(f64, f64)> {
        let c = arpgda::smoothness_constants(&self.inner, r).map_err(to_py)?;
        Ok((c.l1, c.l2))
    }

    #[pyo3(signature = (u, rel_threshold=0.1))]
    fn dist_to_subgradient(&self, u: Vec<Vec<f64>>, rel_threshold: f64) -> PyResult<f64> {
        arpgda::dist_to_subgradient(&self.inner, &point(&u)?, rel_threshold).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(d={}, N={}, n={})",
            self.inner.d(),
            self.inner.n_samples(),
            self.inner.n_groups()
        )
    }
}

#[pyclass(frozen, get_all, module = "arpgda_py")]
struct SolveResult {
    algorithm: String,
    u: Vec<Vec<f64>>,
    y: Option<Vec<f64>>,
    objectives: Vec<f64>,
    phi: f64,
    stationarity: Option<f64>,
    iterations: usize,
    converged: bool,
    time_ms: f64,
    max_orthonormality_error: f64,
    violations: usize,
    /// `(k, phi)` for every recorded iteration.
    trace: Vec<(usize, f64)>,
    /// Full JSON run report.
    report: String,
}

#[pymethods]
impl SolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(algorithm='{}', phi={}, iterations={}, converged={})",
            self.algorithm,
            self.phi,
            self.iterations,
            if self.converged { "True" } else { "False" }
        )
    }
}

fn finish<P: serde::Serialize>(res: arpgda::SolveResult, params: &P, meta: &DatasetMeta) -> PyResult<SolveResult> {
    let report = RunReport::new(&res, params, meta.clone())
        .and_then(|r| r.to_json())
        .map_err(to_py)?;
    Ok(SolveResult {
        algorithm: res.algorithm.clone(),
        u: rows(res.u.matrix()),
        y: res.y.as_ref().map(|y| y.as_slice().to_vec()),
        objectives: res.objectives.values().to_vec(),
        phi: res.phi,
        stationarity: res.stationarity,
        iterations: res.iterations,
        converged: res.converged,
        time_ms: res.time_ms,
        max_orthonormality_error: res.max_orthonormality_error,
        violations: res.violations.len(),
        trace: res.trace.iter().map(|t| (t.k, t.phi)).collect(),
        report,
    })
}

fn start_point(data: &GroupedDataset, r: usize, seed: u64, init_u: Option<Vec<Vec<f64>>>) -> PyResult<StiefelPoint> {
    match init_u {
        Some(u) => point(&u),
        None => arpgda::random_stiefel(data.d(), r, seed).map_err(to_py),
    }
}

/// Runs the descent-ascent solver; unset parameters take the regime defaults.
#[pyfunction]
#[pyo3(signature = (data, r, seed=0, epsilon=None, rho=None, theta=None, mu=None, max_iters=None, check_inequalities=false, trace_stride=None, init_u=None))]
#[allow(clippy::too_many_arguments)]
fn solve_arpgda(
    py: Python<'_>,
    data: &Dataset,
    r: usize,
    seed: u64,
    epsilon: Option<f64>,
    rho: Option<f64>,
    theta: Option<f64>,
    mu: Option<f64>,
    max_iters: Option<usize>,
    check_inequalities: bool,
    trace_stride: Option<usize>,
    init_u: Option<Vec<Vec<f64>>>,
) -> PyResult<SolveResult> {
    let config = ArpgdaConfig {
        epsilon,
        rho,
        theta,
        mu,
        max_iters,
        check_inequalities,
        trace_stride,
    };
    let params = config.resolve(&data.inner, r, seed);
    let u0 = start_point(&data.inner, r, seed, init_u)?;
    let inner = &data.inner;
    let res = py
        .detach(|| arpgda::solver::solve_arpgda_from(inner, u0, &params))
        .map_err(to_py)?;
    finish(res, &params, &data.meta)
}

/// Runs the Riemannian subgradient method with stepsize `c/sqrt(k)`.
#[pyfunction]
#[pyo3(signature = (data, r, c=0.1, seed=0, max_iters=100_000, reference_phi=None, dist_stride=0, trace_stride=1, init_u=None))]
#[allow(clippy::too_many_arguments)]
fn solve_rsg(
    py: Python<'_>,
    data: &Dataset,
    r: usize,
    c: f64,
    seed: u64,
    max_iters: usize,
    reference_phi: Option<f64>,
    dist_stride: usize,
    trace_stride: usize,
    init_u: Option<Vec<Vec<f64>>>,
) -> PyResult<SolveResult> {
    let params = arpgda::RsgParams {
        c,
        max_iters,
        seed,
        reference_phi,
        dist_stride,
        trace_stride,
    };
    let u0 = start_point(&data.inner, r, seed, init_u)?;
    let inner = &data.inner;
    let res = py
        .detach(|| arpgda::baselines::solve_rsg_from(inner, u0, &params))
        .map_err(to_py)?;
    finish(res, &params, &data.meta)
}

#[pyfunction]
#[pyo3(signature = (d, r, seed=0))]
fn random_stiefel(d: usize, r: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows(arpgda::random_stiefel(d, r, seed).map_err(to_py)?.matrix()))
}

#[pyfunction]
fn orthonormality_error(u: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(arpgda::orthonormality_error(&matrix(&u)?))
}

#[pyfunction]
fn project_to_tangent(u: Vec<Vec<f64>>, g: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let t = arpgda::project_to_tangent(&point(&u)?, &matrix(&g)?).map_err(to_py)?;
    Ok(rows(t.matrix()))
}

#[pyfunction]
fn polar_retract(u: Vec<Vec<f64>>, d: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let base = point(&u)?;
    let step = TangentVector::new(&base, matrix(&d)?).map_err(to_py)?;
    Ok(rows(arpgda::polar_retract(&base, &step).map_err(to_py)?.matrix()))
}

#[pyfunction]
fn project_to_simplex(z: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(arpgda::project_to_simplex(&z).map_err(to_py)?.into_vec())
}

#[pyfunction]
fn ky_fan_norm(m: Vec<Vec<f64>>, r: usize) -> PyResult<f64> {
    arpgda::ky_fan_norm(&matrix(&m)?, r).map_err(to_py)
}

#[pymodule]
fn arpgda_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<SolveResult>()?;
    m.add_function(wrap_pyfunction!(solve_arpgda, m)?)?;
    m.add_function(wrap_pyfunction!(solve_rsg, m)?)?;
    m.add_function(wrap_pyfunction!(random_stiefel, m)?)?;
    m.add_function(wrap_pyfunction!(orthonormality_error, m)?)?;
    m.add_function(wrap_pyfunction!(project_to_tangent, m)?)?;
    m.add_function(wrap_pyfunction!(polar_retract, m)?)?;
    m.add_function(wrap_pyfunction!(project_to_simplex, m)?)?;
    m.add_function(wrap_pyfunction!(ky_fan_norm, m)?)?;
    Ok(())
}
