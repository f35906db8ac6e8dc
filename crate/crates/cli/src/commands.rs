use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use arpgda::baselines::{solve_rsg_from, STEP_GRID};
use arpgda::compare::{parse_ranks, run_comparison_with, Algorithm, ComparisonRow, CompareConfig, SummaryRow};
use arpgda::data::{write_csv_grouped, DEFAULT_GROUP_COLUMN};
use arpgda::report::{validate_report, RunReport};
use arpgda::solver::solve_arpgda_from;
use arpgda::{
    dist_to_subgradient, group_objectives, random_stiefel, DatasetMeta, GroupedDataset, RsgParams,
    SolveResult, StiefelPoint,
};
use log::{info, warn};
use serde::Serialize;

use crate::config::{generate, load_dataset, FileConfig, SolverArgs};
use crate::failure::{CliResult, Failure};
use crate::output::{ensure_dir, meta_path, write_atomic, write_json};
use crate::{CompareArgs, GenArgs, GenKind, MetricsArgs, SolveArgs};

pub fn gen(args: &GenArgs) -> CliResult<()> {
    let (spec, kind) = match &args.kind {
        GenKind::Gaussian { d, n } => (format!("gaussian:{d}:{n}:{}", args.seed), "gaussian"),
        GenKind::Blocks { d, sizes } => {
            let sizes: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
            (format!("blocks:{d}:{}:{}", sizes.join(","), args.seed), "blocks")
        }
    };
    let (data, seed) = generate(&spec)?;
    let col = args.group_col.as_deref().unwrap_or(DEFAULT_GROUP_COLUMN);
    let mut bytes = Vec::new();
    write_csv_grouped(&data, &mut bytes, col)?;
    write_atomic(&args.output, &bytes)?;

    let mut meta = DatasetMeta::describe(kind, &data);
    meta.seed = seed;
    let meta_file = meta_path(&args.output);
    write_json(&meta_file, &meta)?;
    println!(
        "wrote {} (d={}, N={}, n={}) and {}",
        args.output.display(),
        data.d(),
        data.n_samples(),
        data.n_groups(),
        meta_file.display()
    );
    Ok(())
}

fn load_init(path: &Path, tol: f64, data: &GroupedDataset) -> CliResult<StiefelPoint> {
    let file = File::open(path)
        .map_err(|e| Failure::Data(format!("cannot open {}: {e}", path.display())))?;
    let u = StiefelPoint::read_csv_with_tolerance(file, tol)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    if u.d() != data.d() {
        return Err(Failure::Data(format!(
            "{} has {} rows but the data has dimension {}",
            path.display(),
            u.d(),
            data.d()
        )));
    }
    Ok(u)
}

fn single_rank(spec: Option<String>, init: Option<&StiefelPoint>) -> CliResult<usize> {
    match (spec, init) {
        (Some(s), init) => {
            let r = s
                .trim()
                .parse::<usize>()
                .map_err(|_| Failure::Usage(format!("--r must be a single positive integer, got '{s}'")))?;
            if let Some(u) = init.filter(|u| u.r() != r) {
                return Err(Failure::Usage(format!("--r {r} but the initial point has {} columns", u.r())));
            }
            if r == 0 {
                return Err(Failure::Usage("--r must be positive".into()));
            }
            Ok(r)
        }
        (None, Some(u)) => Ok(u.r()),
        (None, None) => Err(Failure::Usage("missing --r".into())),
    }
}

struct Finished {
    result: SolveResult,
    report: RunReport,
}

fn run_one(
    algorithm: Algorithm,
    data: &GroupedDataset,
    meta: &DatasetMeta,
    r: usize,
    seed: u64,
    solver: &SolverArgs,
    ref_phi: Option<f64>,
    init: Option<&StiefelPoint>,
) -> CliResult<Finished> {
    let u0 = match init {
        Some(u) => u.clone(),
        None => random_stiefel(data.d(), r, seed)?,
    };
    let (result, report) = match algorithm {
        Algorithm::Arpgda => {
            let params = solver.arpgda_config().resolve(data, r, seed);
            let result = solve_arpgda_from(data, u0, &params)?;
            let report = RunReport::new(&result, &params, meta.clone())?;
            (result, report)
        }
        Algorithm::Rsg => {
            let defaults = RsgParams::default();
            let params = RsgParams {
                c: solver.c.unwrap_or(defaults.c),
                max_iters: solver.max_iters.unwrap_or(defaults.max_iters),
                seed,
                reference_phi: ref_phi,
                dist_stride: solver.dist_stride.unwrap_or(defaults.dist_stride),
                trace_stride: solver.trace_stride.unwrap_or(defaults.trace_stride),
            };
            params.validate()?;
            let result = solve_rsg_from(data, u0, &params)?;
            let report = RunReport::new(&result, &params, meta.clone())?;
            (result, report)
        }
    };
    let value = serde_json::to_value(&report).map_err(arpgda::Error::from)?;
    validate_report(&value).map_err(|e| Failure::Numerical(format!("report failed validation: {e}")))?;
    Ok(Finished { result, report })
}

pub fn solve(args: &SolveArgs) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let (data, meta) = load_dataset(&file.merge_data(&args.data))?;
    let solver = file.merge_solver(&args.solver);
    let tol_orth = args.tol_orth.or(file.tol_orth).unwrap_or(arpgda::manifold::TOL_ORTH);
    let init = match args.init_u.clone().or(file.init_u.clone()) {
        Some(path) => Some(load_init(&path, tol_orth, &data)?),
        None => None,
    };
    let r = single_rank(args.r.clone().or_else(|| file.r.as_ref().map(|v| v.spec())), init.as_ref())?;
    let seeds = if !args.seed.is_empty() {
        args.seed.clone()
    } else {
        file.seed.clone().unwrap_or_else(|| vec![0])
    };
    let ref_phi = args.ref_phi.or(file.ref_phi);
    let out = args.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    ensure_dir(&out)?;

    let mut first_failure = None;
    for seed in seeds {
        let stem = format!("{}_r{r}_s{seed}", args.algorithm);
        let outcome = run_one(args.algorithm, &data, &meta, r, seed, &solver, ref_phi, init.as_ref())
            .and_then(|done| {
                let path = out.join(format!("{stem}.json"));
                write_json(&path, &done.report)?;
                if args.save_u {
                    let mut bytes = Vec::new();
                    done.result.u.write_csv(&mut bytes)?;
                    write_atomic(&out.join(format!("{stem}_U.csv")), &bytes)?;
                }
                let res = &done.result;
                println!(
                    "{} r={r} seed={seed} phi={:.8} E={} iterations={} converged={} time_ms={:.1} report={}",
                    args.algorithm,
                    res.phi,
                    res.stationarity.map_or("-".to_string(), |e| format!("{e:.6e}")),
                    res.iterations,
                    res.converged,
                    res.time_ms,
                    path.display()
                );
                if !res.violations.is_empty() {
                    warn!("seed {seed}: {} inequality violations recorded in the report", res.violations.len());
                }
                if res.max_orthonormality_error > tol_orth {
                    return Err(Failure::Numerical(format!(
                        "seed {seed}: orthonormality error {:e} exceeds {tol_orth:e}",
                        res.max_orthonormality_error
                    )));
                }
                Ok(())
            });
        if let Err(e) = outcome {
            eprintln!("seed {seed}: {e}");
            first_failure.get_or_insert(e);
        }
    }
    first_failure.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct CompareSummary<'a> {
    dataset_meta: &'a DatasetMeta,
    config: &'a CompareConfig,
    summary: Vec<SummaryRow>,
    failed_cells: Vec<&'a ComparisonRow>,
}

pub fn compare(args: &CompareArgs) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let (data, meta) = load_dataset(&file.merge_data(&args.data))?;
    let solver = file.merge_solver(&args.solver);

    let rank_spec = args
        .r
        .clone()
        .or_else(|| file.r.as_ref().map(|v| v.spec()))
        .ok_or_else(|| Failure::Usage("missing --r".into()))?;
    let ranks = parse_ranks(&rank_spec)?;
    let seeds: Vec<u64> = (0..args.seeds.or(file.seeds).unwrap_or(10)).collect();
    let algorithms = match (&args.algs, &file.algs) {
        (Some(list), _) | (None, Some(list)) => list
            .iter()
            .map(|s| s.parse::<Algorithm>())
            .collect::<arpgda::Result<Vec<_>>>()?,
        (None, None) => vec![Algorithm::Arpgda, Algorithm::Rsg],
    };
    let rsg_grid = match (&args.c_grid, &file.c_grid, solver.c) {
        (Some(grid), _, _) | (None, Some(grid), _) => grid.clone(),
        (None, None, Some(c)) => vec![c],
        (None, None, None) => STEP_GRID.to_vec(),
    };
    let max_iters = solver.max_iters.unwrap_or(arpgda::solver::DEFAULT_MAX_ITERS);
    let config = CompareConfig {
        ranks,
        seeds,
        algorithms,
        arpgda: solver.arpgda_config(),
        rsg: RsgParams {
            c: rsg_grid[0],
            max_iters,
            seed: 0,
            reference_phi: None,
            dist_stride: solver.dist_stride.unwrap_or(0),
            trace_stride: solver.trace_stride.unwrap_or(max_iters),
        },
        rsg_grid,
        jobs: args.jobs.or(file.jobs).unwrap_or(1),
    };

    let out = args.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let cells_dir = out.join("cells");
    ensure_dir(&cells_dir)?;
    let write_errors = Mutex::new(Vec::new());
    let table = run_comparison_with(&data, &config, |rows| {
        let Some(first) = rows.first() else { return };
        let path = cells_dir.join(format!("r{}_s{}.json", first.r, first.seed));
        info!("cell r={} seed={} done", first.r, first.seed);
        if let Err(e) = write_json(&path, &rows) {
            write_errors.lock().unwrap().push(e.to_string());
        }
    })?;
    if let Some(e) = write_errors.into_inner().unwrap().into_iter().next() {
        return Err(Failure::Usage(e));
    }

    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    write_atomic(&out.join("comparison.csv"), &csv)?;
    let failed: Vec<&ComparisonRow> = table.rows.iter().filter(|r| r.error.is_some()).collect();
    let summary = CompareSummary {
        dataset_meta: &meta,
        config: &config,
        summary: table.summary(),
        failed_cells: failed.clone(),
    };
    write_json(&out.join("summary.json"), &summary)?;

    println!("algorithm  r  runs  converged  mean_phi  mean_phi_ratio  mean_time_ms");
    for row in &summary.summary {
        println!(
            "{:<9} {:>2} {:>5} {:>10} {:>9.5} {:>15.6} {:>13.1}",
            row.algorithm.to_string(),
            row.r,
            row.runs,
            row.converged,
            row.mean_phi,
            row.mean_phi_ratio,
            row.mean_time_ms
        );
    }
    println!("wrote {}", out.join("comparison.csv").display());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("{} of {} runs failed", failed.len(), table.rows.len())))
    }
}

#[derive(Serialize)]
struct DistReport {
    d: usize,
    r: usize,
    phi: f64,
    objectives: Vec<f64>,
    rel_threshold: f64,
    dist: f64,
}

pub fn metrics(args: &MetricsArgs) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let (data, _) = load_dataset(&file.merge_data(&args.data))?;
    let tol = args.tol_orth.or(file.tol_orth).unwrap_or(arpgda::manifold::TOL_ORTH);
    let u = load_init(&args.u, tol, &data)?;
    let objectives = group_objectives(&data, &u)?;
    let dist = dist_to_subgradient(&data, &u, args.rel_threshold)?;
    let report = DistReport {
        d: u.d(),
        r: u.r(),
        phi: objectives.min(),
        objectives: objectives.into_vec(),
        rel_threshold: args.rel_threshold,
        dist,
    };
    match &args.out {
        Some(path) => {
            write_json(path, &report)?;
            println!("phi={:.8} dist={dist:.6e} report={}", report.phi, path.display());
        }
        None => println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(arpgda::Error::from)?
        ),
    }
    Ok(())
}
