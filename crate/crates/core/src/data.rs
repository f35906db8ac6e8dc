//! Synthetic generators, CSV ingestion and preprocessing.
//!
//! CSV layout: UTF-8, one header row, comma separated, one sample per row.
//! Every column except the group column is a numeric feature.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::problem::GroupedDataset;
use crate::{Error, Mat, Result};

/// Name of the group column in generated files.
pub const DEFAULT_GROUP_COLUMN: &str = "g";

/// Describes where a dataset came from and what was done to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub d: usize,
    #[serde(rename = "N")]
    pub n_samples: usize,
    pub n: usize,
    pub group_sizes: Vec<usize>,
    pub normalized: bool,
    pub centered: bool,
    pub standardized: bool,
    pub min_norm_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl DatasetMeta {
    pub fn describe(name: impl Into<String>, data: &GroupedDataset) -> Self {
        DatasetMeta {
            name: name.into(),
            d: data.d(),
            n_samples: data.n_samples(),
            n: data.n_groups(),
            group_sizes: data.group_sizes().to_vec(),
            normalized: false,
            centered: false,
            standardized: false,
            min_norm_threshold: 0.0,
            seed: None,
        }
    }

    pub fn with_preprocessing(mut self, opts: &Preprocess, data: &GroupedDataset, threshold: f64) -> Self {
        self.normalized = opts.normalize;
        self.centered = opts.center;
        self.standardized = opts.standardize_features;
        self.min_norm_threshold = threshold;
        self.d = data.d();
        self.n_samples = data.n_samples();
        self.n = data.n_groups();
        self.group_sizes = data.group_sizes().to_vec();
        self
    }
}

/// `n` groups of one standard-Gaussian sample each in `ℝ^d`.
pub fn gen_synthetic_gaussian(d: usize, n: usize, seed: u64) -> Result<GroupedDataset> {
    if d == 0 || n == 0 {
        return Err(Error::Dimension(format!("need d, n >= 1, got d={d}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Mat::from_fn(d, n, |_, _| StandardNormal.sample(&mut rng));
    GroupedDataset::new(x, vec![1; n])
}

/// Gaussian groups with a random diagonal covariance per group.
///
/// Group `i` draws per-feature standard deviations `2^u`, `u ~ U(−1, 1)`,
/// so groups favour different directions. Samples are divided by `√N`,
/// making `Σᵢ XᵢXᵢᵀ` the pooled sample second-moment matrix.
pub fn gen_synthetic_blocks(d: usize, group_sizes: &[usize], seed: u64) -> Result<GroupedDataset> {
    gen_synthetic_blocks_scaled(d, group_sizes, &vec![1.0; group_sizes.len()], seed)
}

/// [`gen_synthetic_blocks`] with an extra multiplier per group.
pub fn gen_synthetic_blocks_scaled(
    d: usize,
    group_sizes: &[usize],
    group_scales: &[f64],
    seed: u64,
) -> Result<GroupedDataset> {
    if d == 0 || group_sizes.is_empty() {
        return Err(Error::Dimension("need d >= 1 and at least one group".into()));
    }
    if group_sizes.contains(&0) {
        return Err(Error::Input("group sizes must be positive".into()));
    }
    if group_scales.len() != group_sizes.len() {
        return Err(Error::Dimension(format!(
            "{} scales for {} groups",
            group_scales.len(),
            group_sizes.len()
        )));
    }
    let total: usize = group_sizes.iter().sum();
    let norm = 1.0 / (total as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exponent = Uniform::new(-1.0, 1.0).map_err(|e| Error::Input(e.to_string()))?;
    let mut x = Mat::zeros(d, total);
    let mut at = 0;
    for (&size, &scale) in group_sizes.iter().zip(group_scales) {
        let stds: Vec<f64> = (0..d).map(|_| 2f64.powf(exponent.sample(&mut rng))).collect();
        for j in at..at + size {
            for (i, s) in stds.iter().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                x[(i, j)] = scale * s * z * norm;
            }
        }
        at += size;
    }
    let labels = (0..group_sizes.len()).map(|i| i.to_string()).collect();
    GroupedDataset::with_labels(x, group_sizes.to_vec(), labels)
}

/// Reads a grouped CSV file; see [`read_csv_grouped`].
pub fn load_csv_grouped(path: impl AsRef<Path>, group_column: &str) -> Result<GroupedDataset> {
    read_csv_grouped(File::open(path)?, group_column)
}

/// Rows become samples; groups are the distinct values of `group_column`
/// in order of first appearance.
pub fn read_csv_grouped<R: Read>(reader: R, group_column: &str) -> Result<GroupedDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let group_idx = headers
        .iter()
        .position(|h| h == group_column)
        .ok_or_else(|| Error::Schema(format!("group column '{group_column}' not found")))?;
    let feature_idx: Vec<usize> = (0..headers.len()).filter(|&i| i != group_idx).collect();
    if feature_idx.is_empty() {
        return Err(Error::Schema("no feature columns".into()));
    }

    let mut labels: Vec<String> = Vec::new();
    let mut lookup: HashMap<String, usize> = HashMap::new();
    let mut members: Vec<Vec<Vec<f64>>> = Vec::new();
    let mut bad_rows = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let row = row + 1;
        if record.len() != headers.len() {
            bad_rows.push(row);
            continue;
        }
        let values: Option<Vec<f64>> = feature_idx
            .iter()
            .map(|&i| record[i].parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        let label = record[group_idx].to_string();
        let (Some(values), false) = (values, label.is_empty()) else {
            bad_rows.push(row);
            continue;
        };
        let g = *lookup.entry(label.clone()).or_insert_with(|| {
            labels.push(label);
            members.push(Vec::new());
            labels.len() - 1
        });
        members[g].push(values);
    }
    if !bad_rows.is_empty() {
        let listed: Vec<String> = bad_rows.iter().take(20).map(|r| r.to_string()).collect();
        let more = if bad_rows.len() > 20 { ", ..." } else { "" };
        return Err(Error::Input(format!(
            "{} row(s) with missing or non-numeric values: {}{more}",
            bad_rows.len(),
            listed.join(", ")
        )));
    }
    if members.is_empty() {
        return Err(Error::EmptyDataset("no data rows".into()));
    }

    let d = feature_idx.len();
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let total = sizes.iter().sum();
    let mut x = Mat::zeros(d, total);
    for (j, sample) in members.iter().flatten().enumerate() {
        for (i, v) in sample.iter().enumerate() {
            x[(i, j)] = *v;
        }
    }
    GroupedDataset::with_labels(x, sizes, labels)
}

/// Writes the dataset with header `x0,…,x{d−1},<group_column>`.
pub fn write_csv_grouped<W: Write>(data: &GroupedDataset, writer: W, group_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..data.d()).map(|i| format!("x{i}")).collect();
    header.push(group_column.to_string());
    w.write_record(&header)?;
    for g in 0..data.n_groups() {
        let label = &data.labels()[g];
        for col in data.group(g).column_iter() {
            let mut row: Vec<String> = col.iter().map(|v| v.to_string()).collect();
            row.push(label.clone());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Preprocessing flags, applied in the order: drop small samples,
/// standardize features, center samples, normalize samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preprocess {
    pub normalize: bool,
    /// Subtract each sample's mean over its own entries.
    pub center: bool,
    /// Zero mean, unit variance per feature across all samples.
    pub standardize_features: bool,
    /// Samples with norm strictly below this are dropped; `None` means
    /// `10⁻⁶ ×` the largest sample norm.
    pub min_norm_threshold: Option<f64>,
}

impl Default for Preprocess {
    fn default() -> Self {
        Preprocess {
            normalize: false,
            center: false,
            standardize_features: false,
            min_norm_threshold: None,
        }
    }
}

impl Preprocess {
    pub fn identity() -> Self {
        Preprocess {
            min_norm_threshold: Some(0.0),
            ..Default::default()
        }
    }

    pub fn threshold_for(&self, data: &GroupedDataset) -> f64 {
        self.min_norm_threshold
            .unwrap_or_else(|| 1e-6 * data.max_sample_norm_squared().sqrt())
    }
}

pub fn preprocess(data: &GroupedDataset, opts: &Preprocess) -> Result<GroupedDataset> {
    let threshold = opts.threshold_for(data);
    let d = data.d();

    let mut sizes = Vec::new();
    let mut labels = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for g in 0..data.n_groups() {
        let before = kept.len();
        kept.extend(
            data.group_range(g)
                .filter(|&j| data.samples().column(j).norm() >= threshold),
        );
        let size = kept.len() - before;
        if size == 0 {
            warn!("group '{}' has no samples left and is removed", data.labels()[g]);
        } else {
            sizes.push(size);
            labels.push(data.labels()[g].clone());
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "every sample has norm below {threshold:e}"
        )));
    }
    let mut x = data.samples().select_columns(&kept);

    if opts.standardize_features {
        let count = x.ncols() as f64;
        for i in 0..d {
            let mut row = x.row_mut(i);
            let mean = row.sum() / count;
            row.add_scalar_mut(-mean);
            let std = (row.norm_squared() / count).sqrt();
            if std > 0.0 {
                row.unscale_mut(std);
            }
        }
    }
    for mut col in x.column_iter_mut() {
        if opts.center {
            let mean = col.sum() / d as f64;
            col.add_scalar_mut(-mean);
        }
        if opts.normalize {
            let norm = col.norm();
            if norm > 0.0 {
                col.unscale_mut(norm);
            }
        }
    }
    GroupedDataset::with_labels(x, sizes, labels)
}
