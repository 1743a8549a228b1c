use std::collections::BTreeMap;
use std::path::Path;

use srpat_core::determin::{self, BetaIter, PSI};
use srpat_core::estimators::{alpha_summary, epsilon_estimate, fit_exponent, DegreeHistogram};
use srpat_core::pat::pat_simulate;
use srpat_core::rng::replica_rng;
use srpat_core::sa::{alpha_star_functionals, comparison_bound, quadratic_drift, ComparisonParams, SaWindowReport};
use srpat_core::simulate::{dense_path, simulate_replica, ReplicaOutput, SimConfig, Snapshot, Trajectory};
use srpat_core::Vertex;

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::grid::{join, GridSpec};
use crate::output::{real, Echo, Manifest, OutputFile, Table};
use crate::replicas::{resolve_jobs, run_replicas};

/// Largest window start accepted by `sa-verify` (dense recording to `2t`).
pub const SA_MAX_WINDOW: u64 = 100_000;

pub const TRAJECTORY_HEADER: [&str; 7] = ["replica", "vertex", "t", "degree", "theta", "alpha", "alpha_star"];

/// Files written plus any failed post-run checks. Failures turn into exit
/// code 2 after the manifest is on disk.
pub struct Outcome {
    pub echo: Echo,
    pub seed: Option<u64>,
    pub replicas: Option<u32>,
    pub files: Vec<OutputFile>,
    pub failures: Vec<String>,
}

pub fn execute(cmd: &Command) -> CliResult<()> {
    let out = match cmd {
        Command::Simulate(a) => &a.common.out,
        Command::Pat(a) => &a.common.out,
        Command::Beta(a) => &a.common.out,
        Command::Crossover(a) => &a.common.out,
        Command::Bounds(a) => &a.common.out,
        Command::SaVerify(a) => &a.common.out,
        Command::Fit(a) => &a.common.out,
    };
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let outcome = match cmd {
        Command::Simulate(a) => simulate(a)?,
        Command::Pat(a) => pat(a)?,
        Command::Beta(a) => beta(a)?,
        Command::Crossover(a) => crossover(a)?,
        Command::Bounds(a) => bounds(a)?,
        Command::SaVerify(a) => sa_verify(a)?,
        Command::Fit(a) => fit(a)?,
    };
    Manifest::new(cmd.name(), &outcome.echo, outcome.seed, outcome.replicas, outcome.files).write(out)?;
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Internal(outcome.failures.join("\n")))
    }
}

fn write_trajectories<'a>(dir: &Path, runs: impl Iterator<Item = (u32, &'a [Trajectory])>) -> CliResult<OutputFile> {
    let mut table = Table::create(dir, "trajectory.csv", &TRAJECTORY_HEADER)?;
    for (replica, trajs) in runs {
        for traj in trajs {
            for s in &traj.records {
                table.row([
                    replica.to_string(),
                    traj.vertex.to_string(),
                    s.t.to_string(),
                    s.degree.to_string(),
                    s.theta.to_string(),
                    real(s.alpha),
                    real(s.alpha_star),
                ])?;
            }
        }
    }
    table.finish()
}

fn write_histogram(dir: &Path, hist: &DegreeHistogram) -> CliResult<OutputFile> {
    let mut table = Table::create(dir, "histogram.csv", &["degree", "count"])?;
    for (k, c) in &hist.counts {
        table.row([k.to_string(), c.to_string()])?;
    }
    table.finish()
}

fn report_tail(hist: &DegreeHistogram, min_degree: u32) {
    match hist.tail_exponent(min_degree) {
        Some(f) => println!(
            "tail exponent (exploratory, degrees >= {}): {:.4} +- {:.4} over {} points",
            f.min_degree, f.exponent, f.stderr, f.points
        ),
        None => println!("tail exponent: too few distinct degrees >= {min_degree}"),
    }
}

fn snapshot_grid(spec: &str, tracked: &[Vertex], t_max: u64) -> CliResult<(GridSpec, Vec<u64>)> {
    if t_max < 1 {
        return Err(CliError::Validation("--t-max must be at least 1".into()));
    }
    let grid: GridSpec = spec.parse()?;
    let start = (tracked.iter().copied().min().unwrap_or(1) as u64).max(10).min(t_max);
    let times = grid.resolve(start, t_max)?;
    Ok((grid, times))
}

fn simulate(a: &SimulateArgs) -> CliResult<Outcome> {
    let jobs = resolve_jobs(a.common.jobs)?;
    let (grid, snapshots) = snapshot_grid(&a.snapshots, &a.track, a.t_max)?;
    let config = SimConfig {
        t_max: a.t_max,
        tracked: a.track.clone(),
        snapshots,
        sampler: a.sampler,
        seed: a.seed,
        replicas: a.replicas,
    };
    config.validate()?;
    let runs: Vec<ReplicaOutput> = run_replicas(jobs, a.replicas, |r| Ok(simulate_replica(&config, r)?))?;
    let dir = &a.common.out;
    let traj = write_trajectories(dir, runs.iter().map(|o| (o.replica, o.trajectories.as_slice())))?;
    let mut hist = DegreeHistogram::default();
    for o in &runs {
        hist.merge(&o.histogram);
    }
    let histo = write_histogram(dir, &hist)?;
    report_tail(&hist, 10);

    let mut echo = Echo::default();
    echo.flag("t-max", a.t_max, a.t_max)
        .flag("track", a.track.clone(), join(&a.track))
        .flag("snapshots", grid.render(), grid.render())
        .flag("sampler", a.sampler.as_str(), a.sampler.as_str())
        .flag("seed", a.seed, a.seed)
        .flag("replicas", a.replicas, a.replicas);
    Ok(Outcome { echo, seed: Some(a.seed), replicas: Some(a.replicas), files: vec![traj, histo], failures: vec![] })
}

fn pat(a: &PatArgs) -> CliResult<Outcome> {
    let jobs = resolve_jobs(a.common.jobs)?;
    let (grid, snapshots) = snapshot_grid(&a.snapshots, &a.track, a.t_max)?;
    // same range checks as the self-reinforced runs
    let mut check = SimConfig::new(a.t_max, a.track.clone(), srpat_core::sampler::SamplerKind::Fast, a.seed, a.replicas);
    check.snapshots = snapshots.clone();
    check.validate()?;
    srpat_core::pat::PatState::new(a.delta, 1)?;
    let runs = run_replicas(jobs, a.replicas, |r| {
        let mut rng = replica_rng(a.seed, r as u64);
        let (trajs, degrees) = pat_simulate(a.delta, &a.track, &snapshots, &mut rng)?;
        Ok((r, trajs, DegreeHistogram::from_degrees(&degrees)))
    })?;
    let dir = &a.common.out;
    let traj = write_trajectories(dir, runs.iter().map(|(r, t, _)| (*r, t.as_slice())))?;
    let mut hist = DegreeHistogram::default();
    for (_, _, h) in &runs {
        hist.merge(h);
    }
    let histo = write_histogram(dir, &hist)?;
    report_tail(&hist, 10);

    let mut echo = Echo::default();
    echo.flag("t-max", a.t_max, a.t_max)
        .flag("delta", a.delta, a.delta)
        .flag("track", a.track.clone(), join(&a.track))
        .flag("snapshots", grid.render(), grid.render())
        .flag("seed", a.seed, a.seed)
        .flag("replicas", a.replicas, a.replicas);
    Ok(Outcome { echo, seed: Some(a.seed), replicas: Some(a.replicas), files: vec![traj, histo], failures: vec![] })
}

fn beta(a: &BetaArgs) -> CliResult<Outcome> {
    let grid = a.snapshots.as_deref().map(str::parse::<GridSpec>).transpose()?;
    for &i in &a.i {
        if i < 1 || i > a.t_max {
            return Err(CliError::Validation(format!("beta series needs 1 <= i <= t_max, got i = {i}")));
        }
    }
    let mut table = Table::create(&a.common.out, "beta.csv", &["i", "t", "beta", "x_t"])?;
    for &i in &a.i {
        let times = match &grid {
            Some(g) => g.resolve(i, a.t_max)?,
            None => Vec::new(),
        };
        let mut next = times.iter().copied().peekable();
        let mut it = BetaIter::new(i);
        let mut crossing = None;
        loop {
            let t = it.t();
            let x = determin::fixed_point(t);
            let wanted = match &grid {
                None => true,
                Some(_) => next.next_if_eq(&t).is_some(),
            };
            if wanted {
                table.row([i.to_string(), t.to_string(), real(it.beta()), real(x)])?;
            }
            if t == a.t_max {
                break;
            }
            let gap = it.gap(x);
            if crossing.is_none() && gap > 0.0 {
                crossing = Some(t);
            }
            it.advance_with(x, gap);
        }
        match crossing {
            Some(c) => println!("i = {i}: crossover T(i) = {c}"),
            None => println!("i = {i}: no crossover before t = {}", a.t_max),
        }
    }
    let file = table.finish()?;
    let mut echo = Echo::default();
    echo.flag("i", a.i.clone(), join(&a.i)).flag("t-max", a.t_max, a.t_max);
    if let Some(g) = &grid {
        echo.flag("snapshots", g.render(), g.render());
    }
    Ok(Outcome { echo, seed: None, replicas: None, files: vec![file], failures: vec![] })
}

fn crossover(a: &CrossoverArgs) -> CliResult<Outcome> {
    let grid: GridSpec = a.i_grid.parse()?;
    let vertices = match a.i_max {
        Some(n) if n >= 1 => grid.resolve(1, n)?,
        Some(_) => return Err(CliError::Validation("--i-max must be at least 1".into())),
        None if !a.i.is_empty() => a.i.clone(),
        None => return Err(CliError::Validation("crossover needs --i-max or --i".into())),
    };
    if vertices.contains(&0) {
        return Err(CliError::Validation("vertices start at 1".into()));
    }
    let rows = determin::crossover(&vertices, a.cap)?;
    let mut table = Table::create(&a.common.out, "crossover.csv", &["i", "T_i"])?;
    for (i, t) in &rows {
        table.row([i.to_string(), t.to_string()])?;
    }
    let file = table.finish()?;
    let mut echo = Echo::default();
    match a.i_max {
        Some(n) => echo.flag("i-max", n, n).flag("i-grid", grid.render(), grid.render()),
        None => echo.flag("i", a.i.clone(), join(&a.i)),
    };
    echo.flag("cap", a.cap, a.cap);
    Ok(Outcome { echo, seed: None, replicas: None, files: vec![file], failures: vec![] })
}

fn bounds(a: &BoundsArgs) -> CliResult<Outcome> {
    let grid: GridSpec = a.snapshots.parse()?;
    let mut table = Table::create(&a.common.out, "bounds.csv", &["i", "t", "mean_exact", "upper_bound", "gamma_t"])?;
    let mut failures = Vec::new();
    for &i in &a.i {
        if i < 1 || i > a.t_max {
            return Err(CliError::Validation(format!("bounds need 1 <= i <= t_max, got i = {i}")));
        }
        let times = grid.resolve(i, a.t_max)?;
        let means = determin::mean_degree_series(i, &times);
        for (&t, &m) in times.iter().zip(&means) {
            let ub = determin::mean_degree_upper_bound(i, t);
            let gamma = m / (t as f64 + 1.0).powf(PSI);
            if m > ub * (1.0 + 1e-12) {
                failures.push(format!("mean degree {m} exceeds the Gamma bound {ub} at i = {i}, t = {t}"));
            }
            table.row([i.to_string(), t.to_string(), real(m), real(ub), real(gamma)])?;
        }
    }
    let file = table.finish()?;
    let mut echo = Echo::default();
    echo.flag("i", a.i.clone(), join(&a.i))
        .flag("t-max", a.t_max, a.t_max)
        .flag("snapshots", grid.render(), grid.render());
    Ok(Outcome { echo, seed: None, replicas: None, files: vec![file], failures })
}

fn sa_verify(a: &SaVerifyArgs) -> CliResult<Outcome> {
    let jobs = resolve_jobs(a.common.jobs)?;
    let mut windows = a.windows.clone();
    windows.sort_unstable();
    windows.dedup();
    let Some(&widest) = windows.last() else {
        return Err(CliError::Validation("--windows is empty".into()));
    };
    if a.track < 1 {
        return Err(CliError::Validation("tracked vertex must be at least 1".into()));
    }
    if windows[0] < a.track as u64 || widest > SA_MAX_WINDOW {
        return Err(CliError::Validation(format!(
            "window starts must lie in {}..={SA_MAX_WINDOW}",
            a.track
        )));
    }
    if a.replicas < 1 {
        return Err(CliError::Validation("replicas must be at least 1".into()));
    }
    let t_end = 2 * widest + 1;
    let runs: Vec<(Vec<SaWindowReport>, f64)> = run_replicas(jobs, a.replicas, |r| {
        let path = dense_path(a.track, t_end, replica_rng(a.seed, r as u64))?;
        let series = alpha_star_functionals(&path)?;
        let reports = windows
            .iter()
            .map(|&t0| comparison_bound(series.window_input(), t0, quadratic_drift, ComparisonParams::default()))
            .collect::<srpat_core::Result<Vec<_>>>()?;
        Ok((reports, series.max_residual))
    })?;
    let mut table = Table::create(
        &a.common.out,
        "sa_window.csv",
        &["t0", "t1", "sup_dev", "bound", "K", "C", "sum_a_sq", "sup_zeta_dev", "err_sum"],
    )?;
    let mut failures = Vec::new();
    let mut max_residual = 0.0f64;
    for (r, (reports, residual)) in runs.iter().enumerate() {
        max_residual = max_residual.max(*residual);
        for w in reports {
            if !w.holds() {
                failures.push(format!("replica {r}, window [{}, {}]: deviation {} above bound {}", w.t0, w.t1, w.sup_dev, w.bound));
            }
            table.row([
                w.t0.to_string(),
                w.t1.to_string(),
                real(w.sup_dev),
                real(w.bound),
                real(w.k),
                real(w.c),
                real(w.sum_a_sq),
                real(w.sup_zeta_dev),
                real(w.err_sum),
            ])?;
        }
    }
    println!("max reconstruction residual: {max_residual:e}; bound violations: {}", failures.len());
    let file = table.finish()?;
    let mut echo = Echo::default();
    echo.flag("windows", windows.clone(), join(&windows))
        .flag("track", a.track, a.track)
        .flag("seed", a.seed, a.seed)
        .flag("replicas", a.replicas, a.replicas);
    Ok(Outcome { echo, seed: Some(a.seed), replicas: Some(a.replicas), files: vec![file], failures })
}

#[derive(Debug, serde::Deserialize)]
struct TrajectoryRow {
    replica: u32,
    vertex: Vertex,
    t: u64,
    degree: u64,
    theta: u64,
    alpha: f64,
    alpha_star: f64,
}

/// Trajectories grouped by vertex, each list in replica order.
pub fn read_trajectories(path: &Path) -> CliResult<BTreeMap<Vertex, Vec<Trajectory>>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let header = reader.headers().map_err(|e| CliError::csv(path, e))?.clone();
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(CliError::Validation(format!(
            "{}: expected columns {}, found {}",
            path.display(),
            TRAJECTORY_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut by_vertex: BTreeMap<Vertex, BTreeMap<u32, Vec<Snapshot>>> = BTreeMap::new();
    for row in reader.deserialize::<TrajectoryRow>() {
        let row = row.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        by_vertex.entry(row.vertex).or_default().entry(row.replica).or_default().push(Snapshot {
            t: row.t,
            degree: row.degree,
            theta: row.theta,
            alpha: row.alpha,
            alpha_star: row.alpha_star,
        });
    }
    Ok(by_vertex
        .into_iter()
        .map(|(vertex, reps)| (vertex, reps.into_values().map(|records| Trajectory { vertex, records }).collect()))
        .collect())
}

fn fit(a: &FitArgs) -> CliResult<Outcome> {
    let data = read_trajectories(&a.input)?;
    if data.is_empty() {
        return Err(CliError::Validation(format!("{}: no trajectory rows", a.input.display())));
    }
    let (t_lo, t_hi) = match a.window.as_slice() {
        [] => {
            let ts = data.values().flatten().flat_map(|tr| tr.records.iter().map(|s| s.t));
            let (lo, hi) = ts.fold((u64::MAX, 0), |(lo, hi), t| (lo.min(t), hi.max(t)));
            (lo, hi)
        }
        [lo, hi] if lo < hi => (*lo, *hi),
        _ => return Err(CliError::Validation("--window takes `t_lo,t_hi` with t_lo < t_hi".into())),
    };
    let dir = &a.common.out;
    let mut fits = Table::create(dir, "fit.csv", &["vertex", "slope", "intercept", "stderr", "t_lo", "t_hi", "replicas"])?;
    let mut eps = Table::create(
        dir,
        "epsilon.csv",
        &["vertex", "t_max", "mean", "stderr", "scaled", "scaled_stderr", "min", "replicas"],
    )?;
    let mut alpha = Table::create(dir, "alpha_summary.csv", &["vertex", "t", "median", "p90"])?;
    for (&vertex, trajs) in &data {
        let refs: Vec<&Trajectory> = trajs.iter().collect();
        let f = fit_exponent(&refs, t_lo, t_hi)?;
        fits.row([
            vertex.to_string(),
            real(f.slope),
            real(f.intercept),
            real(f.stderr),
            t_lo.to_string(),
            t_hi.to_string(),
            f.replicas.to_string(),
        ])?;
        let t_max = trajs.iter().filter_map(|tr| tr.records.last()).map(|s| s.t).max().unwrap_or(0);
        let finals: Vec<u64> = trajs
            .iter()
            .filter_map(|tr| tr.records.last().filter(|s| s.t == t_max).map(|s| s.degree))
            .collect();
        if finals.len() != trajs.len() {
            return Err(CliError::Validation(format!("vertex {vertex}: replicas end at different times")));
        }
        let e = epsilon_estimate(vertex, t_max, &finals);
        eps.row([
            vertex.to_string(),
            t_max.to_string(),
            real(e.mean),
            real(e.stderr),
            real(e.scaled),
            real(e.scaled_stderr),
            real(e.minimum()),
            finals.len().to_string(),
        ])?;
        for q in alpha_summary(&refs) {
            alpha.row([vertex.to_string(), q.t.to_string(), real(q.median), real(q.p90)])?;
        }
        println!("vertex {vertex}: slope {:.4} +- {:.4} ({} replicas)", f.slope, f.stderr, f.replicas);
    }
    let hist_path = a.input.with_file_name("histogram.csv");
    if hist_path.exists() {
        report_tail(&read_histogram(&hist_path)?, a.tail_min);
    }
    let files = vec![fits.finish()?, eps.finish()?, alpha.finish()?];
    let mut echo = Echo::default();
    echo.flag("input", a.input.display().to_string(), a.input.display())
        .flag("window", vec![t_lo, t_hi], join(&[t_lo, t_hi]))
        .flag("tail-min", a.tail_min, a.tail_min);
    Ok(Outcome { echo, seed: None, replicas: None, files, failures: vec![] })
}

fn read_histogram(path: &Path) -> CliResult<DegreeHistogram> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let mut hist = DegreeHistogram::default();
    for row in reader.deserialize::<(u32, u64)>() {
        let (k, c) = row.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        *hist.counts.entry(k).or_default() += c;
    }
    Ok(hist)
}
