//! End-to-end acceptance suite. Runs every criterion, prints one
//! `criterion N (...): PASS|FAIL` line each, and exits non-zero on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use arpgda::baselines::{REFERENCE_TOLERANCE, STEP_GRID};
use arpgda::problem::coupled_objective;
use arpgda::simplex::SimplexWeights;
use arpgda::solver::SolverState;
use arpgda::*;
use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

const DATA_SEED: u64 = 0;
const RANKS: [usize; 4] = [1, 2, 5, 10];
const SEEDS: std::ops::Range<u64> = 0..10;

type Outcome = std::result::Result<String, String>;

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

fn random_simplex(n: usize, rng: &mut ChaCha8Rng) -> SimplexWeights {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = raw.iter().sum();
    project_to_simplex(&raw.iter().map(|v| v / s).collect::<Vec<_>>()).unwrap()
}

fn synthetic() -> &'static GroupedDataset {
    static DATA: OnceLock<GroupedDataset> = OnceLock::new();
    DATA.get_or_init(|| gen_synthetic_gaussian(200, 200, DATA_SEED).unwrap())
}

fn blocks() -> &'static GroupedDataset {
    static DATA: OnceLock<GroupedDataset> = OnceLock::new();
    DATA.get_or_init(|| gen_synthetic_blocks(23, &[750; 4], DATA_SEED).unwrap())
}

/// One `(r, seed)` comparison: ARPGDA, then the subgradient sweep stopped at
/// ARPGDA's `Φ`. Traces are dropped after extracting what is needed.
struct Cell {
    r: usize,
    epsilon: f64,
    arpgda: SolveResult,
    rsg: SolveResult,
    /// First ARPGDA iteration with `Φ ≥ (1 − 10⁻⁴)·Φ_RSG`.
    reach: Option<usize>,
    /// Over every stepsize of the sweep.
    rsg_orth: f64,
}

fn run_cell(data: &GroupedDataset, r: usize, seed: u64) -> Cell {
    let params = ArpgdaParams {
        seed,
        check_inequalities: true,
        ..ArpgdaParams::defaults_for(data, r)
    };
    let mut arpgda = solve_arpgda(data, r, &params).unwrap();
    let template = RsgParams {
        seed,
        reference_phi: Some(arpgda.phi),
        dist_stride: 0,
        trace_stride: 1000,
        ..Default::default()
    };
    let mut best: Option<SolveResult> = None;
    let mut rsg_orth: f64 = 0.0;
    for c in STEP_GRID {
        let mut res = solve_rsg(data, r, &RsgParams { c, ..template }).unwrap();
        rsg_orth = rsg_orth.max(res.max_orthonormality_error);
        res.trace.clear();
        if best.as_ref().map_or(true, |b| res.phi > b.phi) {
            best = Some(res);
        }
    }
    let rsg = best.unwrap();
    let reach = arpgda.first_iteration_reaching((1.0 - REFERENCE_TOLERANCE) * rsg.phi);
    arpgda.trace.clear();
    Cell {
        r,
        epsilon: params.epsilon,
        arpgda,
        rsg,
        reach,
        rsg_orth,
    }
}

fn cells_for(data: &GroupedDataset) -> Vec<Cell> {
    RANKS
        .iter()
        .flat_map(|&r| SEEDS.map(move |s| (r, s)))
        .map(|(r, s)| run_cell(data, r, s))
        .collect()
}

fn synthetic_cells() -> &'static [Cell] {
    static CELLS: OnceLock<Vec<Cell>> = OnceLock::new();
    CELLS.get_or_init(|| cells_for(synthetic()))
}

fn block_cells() -> &'static [Cell] {
    static CELLS: OnceLock<Vec<Cell>> = OnceLock::new();
    CELLS.get_or_init(|| cells_for(blocks()))
}

fn converged_by_rank(cells: &[Cell]) -> Vec<(usize, usize)> {
    RANKS
        .iter()
        .map(|&r| (r, cells.iter().filter(|c| c.r == r && c.arpgda.converged).count()))
        .collect()
}

fn fmt_counts(counts: &[(usize, usize)]) -> String {
    counts
        .iter()
        .map(|(r, k)| format!("r={r}:{k}/10"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn criterion_1() -> Outcome {
    let d = 50;
    let mut worst_rel: f64 = 0.0;
    let mut worst_ms: f64 = 0.0;
    let mut failures = Vec::new();
    for seed in SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let q = random_stiefel(d, d, 2000 + seed).unwrap().into_matrix();
        let s = DVector::from_fn(d, |_, _| rng.random_range(0.05..1.0));
        let data = GroupedDataset::new(&q * Mat::from_diagonal(&s), vec![d]).unwrap();
        let gram = data.samples() * data.samples().transpose();
        let mut eig: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        for r in [1, 3, 5] {
            let params = ArpgdaParams {
                seed,
                ..ArpgdaParams::defaults_for(&data, r)
            };
            let res = solve_arpgda(&data, r, &params).unwrap();
            let top: f64 = eig[..r].iter().sum();
            let rel = (res.phi - top).abs() / top;
            worst_rel = worst_rel.max(rel);
            worst_ms = worst_ms.max(res.time_ms);
            if rel > 1e-3 || res.time_ms >= 5000.0 {
                failures.push(format!("seed {seed} r={r}: rel {rel:.2e}, {:.0} ms", res.time_ms));
            }
        }
    }
    let detail = format!("worst relative gap {worst_rel:.2e}, slowest run {worst_ms:.0} ms");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

fn criterion_2() -> Outcome {
    let cells = synthetic_cells();
    let counts = converged_by_rank(cells);
    let bad_e: Vec<String> = cells
        .iter()
        .filter(|c| c.arpgda.converged && c.arpgda.stationarity.unwrap() > c.epsilon)
        .map(|c| format!("r={} E={:.4e}", c.r, c.arpgda.stationarity.unwrap()))
        .collect();
    let slowest = cells.iter().map(|c| c.arpgda.time_ms).fold(0.0, f64::max);
    let unconverged: Vec<String> = cells
        .iter()
        .filter(|c| !c.arpgda.converged)
        .map(|c| format!("r={} E={:.4} eps={:.4}", c.r, c.arpgda.stationarity.unwrap(), c.epsilon))
        .collect();
    let detail = format!(
        "converged {}, slowest run {:.1} s{}",
        fmt_counts(&counts),
        slowest / 1e3,
        if unconverged.is_empty() {
            String::new()
        } else {
            format!(", at cap: {}", unconverged.join(", "))
        }
    );
    let ok = bad_e.is_empty() && counts.iter().all(|&(_, k)| k >= 8) && slowest < 60_000.0;
    if ok {
        Ok(detail)
    } else {
        Err(format!("{detail}; E above eps on converged runs: {bad_e:?}"))
    }
}

fn criterion_3() -> Outcome {
    let cells = synthetic_cells();
    let mut means = Vec::new();
    let mut means_ok = true;
    for r in RANKS {
        let sel: Vec<&Cell> = cells.iter().filter(|c| c.r == r).collect();
        let a = sel.iter().map(|c| c.arpgda.phi).sum::<f64>() / sel.len() as f64;
        let b = sel.iter().map(|c| c.rsg.phi).sum::<f64>() / sel.len() as f64;
        means_ok &= a >= b;
        means.push(format!("r={r}: {a:.4} vs {b:.4}"));
    }
    let faster = cells
        .iter()
        .filter(|c| c.reach.is_some_and(|k| k < c.rsg.iterations))
        .count();
    let detail = format!(
        "mean phi arpgda vs rsg [{}], arpgda faster in {faster}/{} cells",
        means.join(", "),
        cells.len()
    );
    if means_ok && faster * 4 >= cells.len() * 3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_4() -> Outcome {
    let runs: [(&GroupedDataset, usize, u64); 5] = [
        (synthetic(), 1, 0),
        (synthetic(), 1, 1),
        (synthetic(), 2, 2),
        (blocks(), 2, 3),
        (blocks(), 5, 4),
    ];
    let mut total = 0;
    let mut iters = 0;
    let mut first = None;
    for (data, r, seed) in runs {
        let params = ArpgdaParams {
            seed,
            check_inequalities: true,
            ..ArpgdaParams::defaults_for(data, r)
        };
        let res = solve_arpgda(data, r, &params).unwrap();
        iters += res.iterations;
        total += res.violations.len();
        if first.is_none() {
            first = res.violations.first().cloned();
        }
    }
    let detail = format!("{total} violations over {iters} checked iterations");
    if total == 0 {
        Ok(detail)
    } else {
        Err(format!("{detail}; first {first:?}"))
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let small = GroupedDataset::new(gaussian(8, 18, &mut rng), vec![5, 1, 12]).unwrap();
    let pca = GroupedDataset::new(gaussian(12, 30, &mut rng), vec![30]).unwrap();
    let sets: [(&str, &GroupedDataset, usize); 4] = [
        ("gaussian", synthetic(), 5),
        ("blocks", blocks(), 3),
        ("small", &small, 2),
        ("single", &pca, 4),
    ];
    let slack = 1e-9;
    let mut worst_a = f64::NEG_INFINITY;
    let mut worst_b = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (name, data, r) in sets {
        let consts = smoothness_constants(data, r).unwrap();
        let n = data.n_groups();
        for t in 0..100u64 {
            let u = random_stiefel(data.d(), r, rng.random()).unwrap();
            let y = random_simplex(n, &mut rng);
            let raw = gaussian(data.d(), r, &mut rng);
            let dir = project_to_tangent(&u, &raw).unwrap();
            let scale = 10f64.powf(rng.random_range(-3.0..0.0)) / dir.norm();
            let step = dir.scale(scale);
            let lhs = coupled_objective(data, &polar_retract(&u, &step).unwrap(), &y).unwrap();
            let grad = riemannian_gradient_u(data, &u, &y).unwrap();
            let rhs = coupled_objective(data, &u, &y).unwrap()
                + grad.inner(step.matrix())
                + 0.5 * consts.l1 * step.norm().powi(2);
            worst_a = worst_a.max(lhs - rhs);
            if lhs > rhs + slack {
                violations.push(format!("{name} #{t} descent lemma {lhs:e} > {rhs:e}"));
            }

            let ybar = if t % 4 == 0 {
                SimplexWeights::vertex(n, rng.random_range(0..n)).unwrap()
            } else {
                random_simplex(n, &mut rng)
            };
            let gbar = riemannian_gradient_u(data, &u, &ybar).unwrap();
            let lhs = (grad.matrix() - gbar.matrix()).norm();
            let rhs = consts.l2 * y.distance_squared(&ybar).sqrt();
            worst_b = worst_b.max(lhs - rhs);
            if lhs > rhs + slack {
                violations.push(format!("{name} #{t} cross-Lipschitz {lhs:e} > {rhs:e}"));
            }
        }
    }
    let detail = format!(
        "400 triples each; max excess descent {worst_a:.3e}, cross-Lipschitz {worst_b:.3e}"
    );
    if violations.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", violations.join("; ")))
    }
}

/// Enumerates supports `S`; on `S` the KKT point is `zᵢ − τ` with a common
/// shift, feasible when nonnegative. Returns the closest feasible candidate.
fn active_set_projection(z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let tau = (support.iter().map(|&i| z[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut y = vec![0.0; n];
        for &i in &support {
            y[i] = z[i] - tau;
        }
        if y.iter().any(|&v| v < -1e-14) {
            continue;
        }
        let dist: f64 = y.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(b, _)| dist < *b) {
            best = Some((dist, y));
        }
    }
    best.unwrap().1
}

fn norm1_sv(m: &Mat) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Straight-line `d = 3`, `r = 1`, `n = 2` iteration on column vectors.
fn transcribed_arpgda(
    groups: &[Mat; 2],
    u: &DVector<f64>,
    y: [f64; 2],
    k: usize,
    (eps, rho, theta, mu): (f64, f64, f64, f64),
) -> (DVector<f64>, [f64; 2]) {
    let l1 = 2.0 * groups.iter().map(|g| norm1_sv(g).powi(2)).fold(0.0, f64::max);
    let m: Mat = groups.iter().map(|g| {
        let a = g * g.transpose();
        &a * &a
    }).sum();
    let l2 = 2.0 * norm1_sv(&m).sqrt();
    let lambda = eps / 8.0;
    let beta = |k: usize| mu * (k as f64).powf(-rho);
    let zeta = theta / (l1 + l2 * l2 / (lambda + beta(k) + beta(k + 1)));

    let mut g = DVector::zeros(3);
    for (grp, yi) in groups.iter().zip(y) {
        for x in grp.column_iter() {
            g -= x * (2.0 * yi * x.dot(u));
        }
    }
    let grad = &g - u * u.dot(&g);
    let step = grad * -zeta;
    let u_next = (u + &step) / (1.0 + step.norm_squared()).sqrt();

    let f: Vec<f64> = groups
        .iter()
        .map(|grp| grp.column_iter().map(|x| x.dot(&u_next).powi(2)).sum())
        .collect();
    let z0 = y[0] + (-f[0] - lambda * y[0]) / (lambda + beta(k));
    let z1 = y[1] + (-f[1] - lambda * y[1]) / (lambda + beta(k));
    let t = ((z0 - z1 + 1.0) / 2.0).clamp(0.0, 1.0);
    (u_next, [t, 1.0 - t])
}

fn transcribed_rsg(groups: &[Mat; 2], u: &DVector<f64>, c: f64, k: usize) -> DVector<f64> {
    let f: Vec<f64> = groups
        .iter()
        .map(|grp| grp.column_iter().map(|x| x.dot(u).powi(2)).sum())
        .collect();
    let i = if f[1] < f[0] { 1 } else { 0 };
    let mut g = DVector::zeros(3);
    for x in groups[i].column_iter() {
        g += x * (2.0 * x.dot(u));
    }
    let grad = &g - u * u.dot(&g);
    let step = grad * (c / (k as f64).sqrt());
    (u + &step) / (1.0 + step.norm_squared()).sqrt()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut problems = Vec::new();

    let mut worst_simplex: f64 = 0.0;
    for t in 0..1000 {
        let n = rng.random_range(1..=8);
        let scale = 10f64.powf(rng.random_range(-1.0..1.5));
        let z: Vec<f64> = (0..n).map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            scale * g
        }).collect();
        let got = project_to_simplex(&z).unwrap();
        let want = active_set_projection(&z);
        let err = got.as_slice().iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_simplex = worst_simplex.max(err);
        if err > 1e-10 {
            problems.push(format!("simplex #{t}: {err:e}"));
        }
    }

    let mut worst_kf: f64 = 0.0;
    for t in 0..100 {
        let m = rng.random_range(1..=20);
        let k = rng.random_range(1..=m);
        let b = gaussian(m, rng.random_range(1..=m + 3), &mut rng);
        let a = &b * b.transpose();
        let mut sv: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        let want: f64 = sv.iter().take(k).sum();
        let got = ky_fan_norm(&a, k).unwrap();
        let err = (got - want).abs() / want.max(1.0);
        worst_kf = worst_kf.max(err);
        if err > 1e-10 {
            problems.push(format!("ky fan #{t}: {err:e}"));
        }
    }

    let mut worst_step: f64 = 0.0;
    let params = ArpgdaParams {
        epsilon: 0.02,
        rho: 1.1,
        theta: 1.5,
        mu: 3.0,
        ..ArpgdaParams::block_defaults(2, 1)
    };
    let sizes_list: [[usize; 2]; 2] = [[2, 1], [4, 5]];
    for sizes in sizes_list {
        let groups = [gaussian(3, sizes[0], &mut rng), gaussian(3, sizes[1], &mut rng)];
        let data = GroupedDataset::from_groups(&groups).unwrap();
        let u0 = random_stiefel(3, 1, rng.random()).unwrap();
        let consts = smoothness_constants(&data, 1).unwrap();
        let sched = make_schedules(&params, &consts).unwrap();

        let mut state = SolverState::initial(&data, u0.clone(), uniform_weights(2).unwrap()).unwrap();
        let mut u = u0.matrix().column(0).into_owned();
        let mut y = [0.5, 0.5];
        for k in 1..=3 {
            state = arpgda_step(state, &sched, &data).unwrap();
            let (un, yn) = transcribed_arpgda(
                &groups,
                &u,
                y,
                k,
                (params.epsilon, params.rho, params.theta, params.mu),
            );
            let err = (state.u.matrix().column(0) - &un)
                .amax()
                .max((state.y.as_slice()[0] - yn[0]).abs())
                .max((state.y.as_slice()[1] - yn[1]).abs());
            worst_step = worst_step.max(err);
            if err > 1e-12 {
                problems.push(format!("arpgda step {k} sizes {sizes:?}: {err:e}"));
            }
            (u, y) = (un, yn);
        }

        let mut ur = u0;
        let mut v = ur.matrix().column(0).into_owned();
        for k in 1..=3 {
            ur = rsg_step(&ur, &data, 0.3, k).unwrap();
            v = transcribed_rsg(&groups, &v, 0.3, k);
            let err = (ur.matrix().column(0) - &v).amax();
            worst_step = worst_step.max(err);
            if err > 1e-12 {
                problems.push(format!("rsg step {k} sizes {sizes:?}: {err:e}"));
            }
        }
    }

    let detail = format!(
        "max errors: simplex {worst_simplex:.1e}, ky fan {worst_kf:.1e}, steps {worst_step:.1e}"
    );
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", problems.join("; ")))
    }
}

/// Frobenius-orthonormal basis of `T_U St(d, r)`.
fn tangent_basis(u: &StiefelPoint) -> Vec<Mat> {
    let (d, r) = (u.d(), u.r());
    let mut basis: Vec<Mat> = Vec::new();
    for j in 0..r {
        for i in 0..d {
            let mut e = Mat::zeros(d, r);
            e[(i, j)] = 1.0;
            let mut v = project_to_tangent(u, &e).unwrap().into_matrix();
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&v);
                    v -= b * c;
                }
            }
            let n = v.norm();
            if n > 1e-8 {
                basis.push(v / n);
            }
        }
    }
    basis
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for t in 0..50 {
        let d = rng.random_range(3..=7);
        let r = rng.random_range(1..=(d - 1).min(3));
        let n = rng.random_range(1..=4);
        let sizes: Vec<usize> = (0..n).map(|_| rng.random_range(1..=5)).collect();
        let data = GroupedDataset::new(gaussian(d, sizes.iter().sum(), &mut rng), sizes).unwrap();
        let u = random_stiefel(d, r, rng.random()).unwrap();
        let y = random_simplex(n, &mut rng);
        let grad = riemannian_gradient_u(&data, &u, &y).unwrap();

        let basis = tangent_basis(&u);
        if basis.len() != d * r - r * (r + 1) / 2 {
            problems.push(format!("#{t}: tangent basis has {} elements", basis.len()));
            continue;
        }
        let mut fd = Mat::zeros(d, r);
        for b in &basis {
            let along = |s: f64| {
                let step = TangentVector::new(&u, b * s).unwrap();
                coupled_objective(&data, &polar_retract(&u, &step).unwrap(), &y).unwrap()
            };
            fd += b * ((along(h) - along(-h)) / (2.0 * h));
        }
        let rel = (&fd - grad.matrix()).norm() / grad.norm();
        worst = worst.max(rel);
        if rel > 1e-4 {
            problems.push(format!("#{t}: relative error {rel:e}"));
        }
    }
    let detail = format!("worst relative error {worst:.2e}");
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", problems.join("; ")))
    }
}

fn simplex_ok(y: &[f64]) -> bool {
    y.iter().all(|&v| v >= 0.0) && (y.iter().sum::<f64>() - 1.0).abs() <= 1e-12 * y.len() as f64
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad_y = 0;
    let mut checked = 0;
    for (data, r, seed) in [(synthetic(), 2, 11), (blocks(), 3, 12), (synthetic(), 10, 13)] {
        let params = ArpgdaParams::defaults_for(data, r);
        let consts = smoothness_constants(data, r).unwrap();
        let sched = make_schedules(&params, &consts).unwrap();
        let u0 = random_stiefel(data.d(), r, seed).unwrap();
        let mut state = SolverState::initial(data, u0, uniform_weights(data.n_groups()).unwrap()).unwrap();
        for _ in 0..2000 {
            state = arpgda_step(state, &sched, data).unwrap();
            worst = worst.max(orthonormality_error(state.u.matrix()));
            if !simplex_ok(state.y.as_slice()) {
                bad_y += 1;
            }
            checked += 1;
        }
    }
    for cell in synthetic_cells().iter().chain(block_cells()) {
        worst = worst
            .max(cell.arpgda.max_orthonormality_error)
            .max(cell.rsg_orth);
        if !simplex_ok(cell.arpgda.y.as_ref().unwrap().as_slice()) {
            bad_y += 1;
        }
        checked += 1;
    }
    let detail = format!("max orthonormality error {worst:.2e}, {bad_y} infeasible weights of {checked} checked");
    if worst <= 1e-8 && bad_y == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_9() -> Outcome {
    let cells = block_cells();
    let counts = converged_by_rank(cells);
    let dominant = cells
        .iter()
        .filter(|c| c.arpgda.phi >= (1.0 - REFERENCE_TOLERANCE) * c.rsg.phi)
        .count();
    let worst = cells
        .iter()
        .map(|c| c.arpgda.phi / c.rsg.phi)
        .fold(f64::INFINITY, f64::min);
    let detail = format!(
        "converged {}, arpgda within tolerance of rsg in {dominant}/{} cells, worst ratio {worst:.6}",
        fmt_counts(&counts),
        cells.len()
    );
    if counts.iter().all(|&(_, k)| k >= 8) && dominant * 4 >= cells.len() * 3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("PCA sanity", criterion_1),
        ("stationarity contract", criterion_2),
        ("baseline dominance", criterion_3),
        ("inequality suite", criterion_4),
        ("smoothness certification", criterion_5),
        ("oracle equivalences", criterion_6),
        ("gradient checks", criterion_7),
        ("feasibility", criterion_8),
        ("block regime", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{secs:.1} s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{secs:.1} s] {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
