//! Flag definitions shared by several commands, the optional JSON config
//! file, and dataset loading. Precedence: flag, then config file, then the
//! solver's regime defaults.

use std::path::{Path, PathBuf};

use arpgda::compare::ArpgdaConfig;
use arpgda::data::{DEFAULT_GROUP_COLUMN, gen_synthetic_blocks};
use arpgda::{gen_synthetic_gaussian, load_csv_grouped, preprocess, DatasetMeta, GroupedDataset, Preprocess};
use clap::Args;
use serde::Deserialize;

use crate::failure::{CliResult, Failure};

#[derive(Args, Debug, Default, Clone)]
pub struct DataArgs {
    /// Grouped CSV input (header row, one sample per row).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Name of the group column in the CSV [default: g].
    #[arg(long)]
    pub group_col: Option<String>,
    /// Generate the dataset instead of reading one:
    /// `gaussian:D:N[:SEED]` or `blocks:D:S1,S2,...[:SEED]`.
    #[arg(long, conflicts_with = "data")]
    pub gen: Option<String>,
    /// Scale every sample to unit norm.
    #[arg(long)]
    pub normalize: bool,
    /// Subtract each sample's mean over its entries.
    #[arg(long)]
    pub center: bool,
    /// Standardize each feature across samples.
    #[arg(long)]
    pub standardize: bool,
    /// Drop samples with norm below this [default: 1e-6 x largest norm].
    #[arg(long)]
    pub min_norm: Option<f64>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct SolverArgs {
    /// Stationarity target.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Check the per-iteration descent inequalities and record violations.
    #[arg(long)]
    pub check_inequalities: bool,
    /// Keep every k-th iteration in the trace.
    #[arg(long)]
    pub trace_stride: Option<usize>,
    /// Subgradient stepsize scale.
    #[arg(long)]
    pub c: Option<f64>,
    /// Subgradient-distance diagnostic stride for rsg (0 disables).
    #[arg(long)]
    pub dist_stride: Option<usize>,
}

/// Untyped rank field: `3`, `"1:10"` or `"1,2,5"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RankValue {
    One(usize),
    Text(String),
}

impl RankValue {
    pub fn spec(&self) -> String {
        match self {
            RankValue::One(r) => r.to_string(),
            RankValue::Text(s) => s.clone(),
        }
    }
}

/// Contents of a `--config` JSON file. Keys mirror the long flag names with
/// `_` in place of `-`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub group_col: Option<String>,
    pub gen: Option<String>,
    pub normalize: Option<bool>,
    pub center: Option<bool>,
    pub standardize: Option<bool>,
    pub min_norm: Option<f64>,
    pub r: Option<RankValue>,
    pub seed: Option<Vec<u64>>,
    pub seeds: Option<u64>,
    pub algs: Option<Vec<String>>,
    pub eps: Option<f64>,
    pub rho: Option<f64>,
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    pub max_iters: Option<usize>,
    pub check_inequalities: Option<bool>,
    pub trace_stride: Option<usize>,
    pub c: Option<f64>,
    pub c_grid: Option<Vec<f64>>,
    pub ref_phi: Option<f64>,
    pub dist_stride: Option<usize>,
    pub tol_orth: Option<f64>,
    pub init_u: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Flag values win; unset flags fall back to this file.
    pub fn merge_data(&self, cli: &DataArgs) -> DataArgs {
        DataArgs {
            data: cli.data.clone().or_else(|| if cli.gen.is_some() { None } else { self.data.clone() }),
            group_col: cli.group_col.clone().or_else(|| self.group_col.clone()),
            gen: cli.gen.clone().or_else(|| if cli.data.is_some() { None } else { self.gen.clone() }),
            normalize: cli.normalize || self.normalize.unwrap_or(false),
            center: cli.center || self.center.unwrap_or(false),
            standardize: cli.standardize || self.standardize.unwrap_or(false),
            min_norm: cli.min_norm.or(self.min_norm),
        }
    }

    pub fn merge_solver(&self, cli: &SolverArgs) -> SolverArgs {
        SolverArgs {
            eps: cli.eps.or(self.eps),
            rho: cli.rho.or(self.rho),
            theta: cli.theta.or(self.theta),
            mu: cli.mu.or(self.mu),
            max_iters: cli.max_iters.or(self.max_iters),
            check_inequalities: cli.check_inequalities || self.check_inequalities.unwrap_or(false),
            trace_stride: cli.trace_stride.or(self.trace_stride),
            c: cli.c.or(self.c),
            dist_stride: cli.dist_stride.or(self.dist_stride),
        }
    }
}

impl SolverArgs {
    pub fn arpgda_config(&self) -> ArpgdaConfig {
        ArpgdaConfig {
            epsilon: self.eps,
            rho: self.rho,
            theta: self.theta,
            mu: self.mu,
            max_iters: self.max_iters,
            check_inequalities: self.check_inequalities,
            trace_stride: self.trace_stride,
        }
    }
}

fn parse_field<T: std::str::FromStr>(spec: &str, field: &str, what: &str) -> CliResult<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("generator spec '{spec}': bad {what} '{field}'")))
}

/// Builds a dataset from `gaussian:D:N[:SEED]` or `blocks:D:S1,S2,...[:SEED]`.
pub fn generate(spec: &str) -> CliResult<(GroupedDataset, Option<u64>)> {
    let parts: Vec<&str> = spec.split(':').collect();
    let seed = match parts.get(3) {
        Some(s) => parse_field(spec, s, "seed")?,
        None => 0,
    };
    match (parts.first().copied(), parts.len()) {
        (Some("gaussian"), 3 | 4) => {
            let d = parse_field(spec, parts[1], "dimension")?;
            let n = parse_field(spec, parts[2], "sample count")?;
            Ok((gen_synthetic_gaussian(d, n, seed)?, Some(seed)))
        }
        (Some("blocks"), 3 | 4) => {
            let d = parse_field(spec, parts[1], "dimension")?;
            let sizes = parts[2]
                .split(',')
                .map(|s| parse_field(spec, s, "group size"))
                .collect::<CliResult<Vec<usize>>>()?;
            Ok((gen_synthetic_blocks(d, &sizes, seed)?, Some(seed)))
        }
        _ => Err(Failure::Usage(format!(
            "generator spec '{spec}' is not gaussian:D:N[:SEED] or blocks:D:S1,S2,...[:SEED]"
        ))),
    }
}

/// Reads or generates the dataset, then applies preprocessing.
pub fn load_dataset(args: &DataArgs) -> CliResult<(GroupedDataset, DatasetMeta)> {
    let (raw, name, seed) = match (&args.data, &args.gen) {
        (Some(path), None) => {
            let col = args.group_col.as_deref().unwrap_or(DEFAULT_GROUP_COLUMN);
            let data = load_csv_grouped(path, col).map_err(Failure::data)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            (data, name, None)
        }
        (None, Some(spec)) => {
            let (data, seed) = generate(spec)?;
            (data, spec.clone(), seed)
        }
        (Some(_), Some(_)) => {
            return Err(Failure::Usage("give either --data or --gen, not both".into()))
        }
        (None, None) => return Err(Failure::Usage("no dataset: pass --data or --gen".into())),
    };
    let opts = Preprocess {
        normalize: args.normalize,
        center: args.center,
        standardize_features: args.standardize,
        min_norm_threshold: args.min_norm,
    };
    let threshold = opts.threshold_for(&raw);
    let data = preprocess(&raw, &opts).map_err(Failure::data)?;
    let mut meta = DatasetMeta::describe(name, &raw).with_preprocessing(&opts, &data, threshold);
    meta.seed = seed;
    Ok((data, meta))
}
