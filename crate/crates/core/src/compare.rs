//! Factorial comparison sweeps (algorithm × r × seed) on one dataset.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{solve_rsg, RsgParams, REFERENCE_TOLERANCE};
use crate::problem::GroupedDataset;
use crate::solver::{solve_arpgda, ArpgdaParams, SolveResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Arpgda,
    Rsg,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Arpgda => "arpgda",
            Algorithm::Rsg => "rsg",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arpgda" => Ok(Algorithm::Arpgda),
            "rsg" => Ok(Algorithm::Rsg),
            other => Err(Error::Parameter(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Solver parameters that may be left to the regime defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArpgdaConfig {
    pub epsilon: Option<f64>,
    pub rho: Option<f64>,
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    pub max_iters: Option<usize>,
    pub check_inequalities: bool,
    pub trace_stride: Option<usize>,
}

impl ArpgdaConfig {
    /// Fills unset values from [`ArpgdaParams::defaults_for`].
    pub fn resolve(&self, data: &GroupedDataset, r: usize, seed: u64) -> ArpgdaParams {
        let base = ArpgdaParams::defaults_for(data, r);
        ArpgdaParams {
            epsilon: self.epsilon.unwrap_or(base.epsilon),
            rho: self.rho.unwrap_or(base.rho),
            theta: self.theta.unwrap_or(base.theta),
            mu: self.mu.unwrap_or(base.mu),
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            check_inequalities: self.check_inequalities,
            trace_stride: self.trace_stride.unwrap_or(base.trace_stride),
            seed,
            ..base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub ranks: Vec<usize>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    pub arpgda: ArpgdaConfig,
    /// Template for the subgradient runs; `c`, `seed` and the reference are
    /// filled per cell.
    pub rsg: RsgParams,
    /// Stepsize scales swept per cell; the best final `Φ` is kept.
    pub rsg_grid: Vec<f64>,
    pub jobs: usize,
}

/// One `(algorithm, r, seed)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: Algorithm,
    pub r: usize,
    pub seed: u64,
    pub phi: f64,
    /// `Φ / Φ̂`, with `Φ̂` the best `Φ` over algorithms for this `(r, seed)`.
    pub phi_ratio: f64,
    pub time_ms: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stepsize scale used (subgradient rows only).
    pub c: Option<f64>,
    /// Iterations the descent-ascent run needed to reach `(1 − 10⁻⁴)` of the
    /// best other algorithm's `Φ` (descent-ascent rows only).
    pub reach_iters: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub r: usize,
    pub runs: usize,
    pub failed: usize,
    pub converged: usize,
    pub mean_phi: f64,
    pub mean_phi_ratio: f64,
    pub mean_time_ms: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

fn failed_row(algorithm: Algorithm, r: usize, seed: u64, err: &Error) -> ComparisonRow {
    ComparisonRow {
        algorithm,
        r,
        seed,
        phi: f64::NAN,
        phi_ratio: f64::NAN,
        time_ms: 0.0,
        iterations: 0,
        converged: false,
        c: None,
        reach_iters: None,
        error: Some(err.to_string()),
    }
}

fn result_row(algorithm: Algorithm, r: usize, seed: u64, res: &SolveResult) -> ComparisonRow {
    ComparisonRow {
        algorithm,
        r,
        seed,
        phi: res.phi,
        phi_ratio: f64::NAN,
        time_ms: res.time_ms,
        iterations: res.iterations,
        converged: res.converged,
        c: None,
        reach_iters: None,
        error: None,
    }
}

/// Runs one `(r, seed)` cell: descent-ascent first, so its `Φ` can serve as
/// the subgradient stopping reference.
pub fn run_cell(data: &GroupedDataset, config: &CompareConfig, r: usize, seed: u64) -> Vec<ComparisonRow> {
    let mut rows = Vec::new();
    let mut arpgda_run = None;
    if config.algorithms.contains(&Algorithm::Arpgda) {
        let params = config.arpgda.resolve(data, r, seed);
        match solve_arpgda(data, r, &params) {
            Ok(res) => {
                rows.push(result_row(Algorithm::Arpgda, r, seed, &res));
                arpgda_run = Some(res);
            }
            Err(e) => rows.push(failed_row(Algorithm::Arpgda, r, seed, &e)),
        }
    }
    if config.algorithms.contains(&Algorithm::Rsg) {
        let template = RsgParams {
            seed,
            reference_phi: arpgda_run.as_ref().map(|res| res.phi),
            ..config.rsg
        };
        let grid = if config.rsg_grid.is_empty() {
            vec![config.rsg.c]
        } else {
            config.rsg_grid.clone()
        };
        let mut best: Option<(f64, SolveResult)> = None;
        let mut last_err = None;
        for c in grid {
            match solve_rsg(data, r, &RsgParams { c, ..template }) {
                Ok(res) => {
                    if best.as_ref().map_or(true, |(_, b)| res.phi > b.phi) {
                        best = Some((c, res));
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        match (best, last_err) {
            (Some((c, res)), _) => {
                let mut row = result_row(Algorithm::Rsg, r, seed, &res);
                row.c = Some(c);
                rows.push(row);
            }
            (None, Some(e)) => rows.push(failed_row(Algorithm::Rsg, r, seed, &e)),
            (None, None) => {}
        }
    }

    let best_phi = rows
        .iter()
        .filter(|row| row.error.is_none())
        .map(|row| row.phi)
        .fold(f64::NEG_INFINITY, f64::max);
    for row in rows.iter_mut().filter(|row| row.error.is_none()) {
        row.phi_ratio = if best_phi > 0.0 { row.phi / best_phi } else { 1.0 };
    }
    if let Some(res) = &arpgda_run {
        let other = rows
            .iter()
            .filter(|row| row.algorithm != Algorithm::Arpgda && row.error.is_none())
            .map(|row| row.phi)
            .fold(f64::NEG_INFINITY, f64::max);
        if other.is_finite() {
            let reach = res.first_iteration_reaching((1.0 - REFERENCE_TOLERANCE) * other);
            rows[0].reach_iters = reach;
        }
    }
    rows
}

pub fn run_comparison(data: &GroupedDataset, config: &CompareConfig) -> Result<ComparisonTable> {
    run_comparison_with(data, config, |_| {})
}

/// Like [`run_comparison`], calling `on_cell` with each cell's rows as soon
/// as the cell finishes (from the worker thread that ran it).
pub fn run_comparison_with<F>(data: &GroupedDataset, config: &CompareConfig, on_cell: F) -> Result<ComparisonTable>
where
    F: Fn(&[ComparisonRow]) + Sync,
{
    if config.ranks.is_empty() || config.seeds.is_empty() || config.algorithms.is_empty() {
        return Err(Error::Parameter("ranks, seeds and algorithms must be non-empty".into()));
    }
    if let Some(&r) = config.ranks.iter().find(|&&r| r == 0 || r > data.d()) {
        return Err(Error::Parameter(format!("rank {r} outside 1..={}", data.d())));
    }
    let cells: Vec<(usize, u64)> = config
        .ranks
        .iter()
        .flat_map(|&r| config.seeds.iter().map(move |&s| (r, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| Error::Parameter(e.to_string()))?;
    let per_cell: Vec<Vec<ComparisonRow>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(r, seed)| {
                let rows = run_cell(data, config, r, seed);
                on_cell(&rows);
                rows
            })
            .collect()
    });
    let mut rows: Vec<ComparisonRow> = per_cell.into_iter().flatten().collect();
    rows.sort_by(|a, b| (a.algorithm, a.r, a.seed).cmp(&(b.algorithm, b.r, b.seed)));
    Ok(ComparisonTable { rows })
}

impl ComparisonTable {
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(Algorithm, usize)> = self.rows.iter().map(|r| (r.algorithm, r.r)).collect();
        keys.dedup();
        keys.into_iter()
            .map(|(algorithm, r)| {
                let group: Vec<&ComparisonRow> = self
                    .rows
                    .iter()
                    .filter(|row| row.algorithm == algorithm && row.r == r)
                    .collect();
                let ok: Vec<&&ComparisonRow> = group.iter().filter(|row| row.error.is_none()).collect();
                let mean = |f: &dyn Fn(&ComparisonRow) -> f64| {
                    if ok.is_empty() {
                        f64::NAN
                    } else {
                        ok.iter().map(|row| f(row)).sum::<f64>() / ok.len() as f64
                    }
                };
                SummaryRow {
                    algorithm,
                    r,
                    runs: group.len(),
                    failed: group.len() - ok.len(),
                    converged: ok.iter().filter(|row| row.converged).count(),
                    mean_phi: mean(&|row| row.phi),
                    mean_phi_ratio: mean(&|row| row.phi_ratio),
                    mean_time_ms: mean(&|row| row.time_ms),
                    mean_iterations: mean(&|row| row.iterations as f64),
                }
            })
            .collect()
    }

    /// Plot-ready CSV: `algorithm,r,seed,phi,phi_ratio,time_ms,iterations,converged,c,reach_iters,error`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "algorithm", "r", "seed", "phi", "phi_ratio", "time_ms", "iterations", "converged", "c",
            "reach_iters", "error",
        ])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for row in &self.rows {
            w.write_record([
                row.algorithm.to_string(),
                row.r.to_string(),
                row.seed.to_string(),
                row.phi.to_string(),
                row.phi_ratio.to_string(),
                format!("{:.3}", row.time_ms),
                row.iterations.to_string(),
                row.converged.to_string(),
                opt(row.c.map(|c| c.to_string())),
                opt(row.reach_iters.map(|k| k.to_string())),
                opt(row.error.clone()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV without the timing column, stable across runs with the same seeds.
    pub fn write_csv_without_timing<W: Write>(&self, writer: W) -> Result<()> {
        let stripped = ComparisonTable {
            rows: self
                .rows
                .iter()
                .map(|row| ComparisonRow { time_ms: 0.0, ..row.clone() })
                .collect(),
        };
        stripped.write_csv(writer)
    }
}

/// Parses `"3"`, `"1:10"` or `"1,2,5"`.
pub fn parse_ranks(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parameter(format!("invalid rank list '{spec}'"));
    let ranks: Vec<usize> = if let Some((lo, hi)) = spec.split_once(':') {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if ranks.is_empty() || ranks.contains(&0) {
        return Err(bad());
    }
    Ok(ranks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_synthetic_gaussian;

    fn config(algorithms: Vec<Algorithm>) -> CompareConfig {
        CompareConfig {
            ranks: vec![1, 2],
            seeds: vec![0, 1],
            algorithms,
            arpgda: ArpgdaConfig { max_iters: Some(300), ..Default::default() },
            rsg: RsgParams { max_iters: 300, dist_stride: 0, ..Default::default() },
            rsg_grid: vec![0.01, 0.1],
            jobs: 1,
        }
    }

    #[test]
    fn rank_specs() {
        assert_eq!(parse_ranks("1:4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_ranks("2, 5").unwrap(), vec![2, 5]);
        assert_eq!(parse_ranks("3").unwrap(), vec![3]);
        assert!(parse_ranks("0:2").is_err());
        assert!(parse_ranks("a").is_err());
    }

    #[test]
    fn single_algorithm_ratio_is_one() {
        let data = gen_synthetic_gaussian(8, 8, 3).unwrap();
        let table = run_comparison(&data, &config(vec![Algorithm::Arpgda])).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert!(table.rows.iter().all(|r| r.phi_ratio == 1.0));
    }

    #[test]
    fn factorial_and_ratios() {
        let data = gen_synthetic_gaussian(8, 8, 3).unwrap();
        let table = run_comparison(&data, &config(vec![Algorithm::Arpgda, Algorithm::Rsg])).unwrap();
        assert_eq!(table.rows.len(), 8);
        for r in [1, 2] {
            for seed in [0, 1] {
                let cell: Vec<_> = table.rows.iter().filter(|x| x.r == r && x.seed == seed).collect();
                assert_eq!(cell.len(), 2);
                assert!(cell.iter().all(|x| x.phi_ratio <= 1.0 && x.phi_ratio >= 0.0));
                assert!(cell.iter().any(|x| x.phi_ratio == 1.0));
            }
        }
        let summary = table.summary();
        assert_eq!(summary.len(), 4);
        assert!(summary.iter().all(|s| s.runs == 2 && s.failed == 0));
    }

    #[test]
    fn table_is_reproducible() {
        let data = gen_synthetic_gaussian(6, 6, 4).unwrap();
        let cfg = config(vec![Algorithm::Arpgda, Algorithm::Rsg]);
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_comparison(&data, &cfg).unwrap().write_csv_without_timing(&mut a).unwrap();
        run_comparison(&data, &cfg).unwrap().write_csv_without_timing(&mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn failed_cells_are_recorded() {
        let data = GroupedDataset::new(crate::Mat::zeros(4, 4), vec![2, 2]).unwrap();
        let table = run_comparison(&data, &config(vec![Algorithm::Arpgda])).unwrap();
        assert!(table.rows.iter().all(|r| r.error.is_some()));
    }
}
