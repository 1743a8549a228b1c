//! Replica runs: grow a tree to `t_max`, record tracked vertices on a
//! snapshot grid, and report the final degree histogram.

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimators::DegreeHistogram;
use crate::rng::{replica_rng, SimRng};
use crate::sampler::{self, Lookahead, SamplerKind};
use crate::tree::{TreeState, Vertex, MAX_HORIZON, NAIVE_MAX_HORIZON};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub t_max: u64,
    pub tracked: Vec<Vertex>,
    /// Strictly increasing, last entry `t_max`.
    pub snapshots: Vec<u64>,
    pub sampler: SamplerKind,
    pub seed: u64,
    pub replicas: u32,
}

impl SimConfig {
    /// Config with the default geometric grid (ratio 1.1).
    pub fn new(t_max: u64, tracked: Vec<Vertex>, sampler: SamplerKind, seed: u64, replicas: u32) -> Self {
        let start = tracked.iter().copied().min().unwrap_or(1) as u64;
        let snapshots = geometric_grid(start.max(10), t_max, 1.1);
        Self { t_max, tracked, snapshots, sampler, seed, replicas }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_max < 1 {
            return Err(Error::InvalidConfig("t_max must be at least 1".into()));
        }
        if self.t_max > MAX_HORIZON {
            return Err(Error::HorizonTooLarge { t_max: self.t_max, limit: MAX_HORIZON });
        }
        if self.sampler == SamplerKind::Naive && self.t_max > NAIVE_MAX_HORIZON {
            return Err(Error::HorizonTooLarge { t_max: self.t_max, limit: NAIVE_MAX_HORIZON });
        }
        if self.replicas < 1 {
            return Err(Error::InvalidConfig("replicas must be at least 1".into()));
        }
        if let Some(&i) = self.tracked.iter().find(|&&i| i < 1 || i as u64 > self.t_max) {
            return Err(Error::InvalidConfig(format!("tracked vertex {i} outside 1..={}", self.t_max)));
        }
        validate_grid(&self.snapshots, self.t_max)
    }
}

pub fn validate_grid(grid: &[u64], t_max: u64) -> Result<()> {
    if grid.last() != Some(&t_max) {
        return Err(Error::InvalidConfig(format!("snapshot grid must end at t_max = {t_max}")));
    }
    if grid[0] < 1 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("snapshot grid must be strictly increasing from t >= 1".into()));
    }
    Ok(())
}

/// `round(start * ratio^k)` for all `k` with value below `t_max`,
/// deduplicated, followed by `t_max`.
pub fn geometric_grid(start: u64, t_max: u64, ratio: f64) -> Vec<u64> {
    assert!(ratio > 1.0, "geometric ratio must exceed 1");
    let mut grid = Vec::new();
    let mut x = start.max(1) as f64;
    while (x.round() as u64) < t_max {
        let v = x.round() as u64;
        if grid.last() != Some(&v) {
            grid.push(v);
        }
        x *= ratio;
    }
    grid.push(t_max);
    grid
}

/// One recorded row: `(t, degree, theta, alpha, alpha_star)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub t: u64,
    pub degree: u64,
    pub theta: u64,
    pub alpha: f64,
    pub alpha_star: f64,
}

impl Snapshot {
    pub fn new(t: u64, degree: u64, theta: u64) -> Self {
        let alpha = (t as f64 * degree as f64) / theta as f64;
        Self { t, degree, theta, alpha, alpha_star: 1.0 / alpha }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub vertex: Vertex,
    pub records: Vec<Snapshot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaOutput {
    pub replica: u32,
    pub trajectories: Vec<Trajectory>,
    pub histogram: DegreeHistogram,
}

/// Running `theta` of a tracked vertex, maintained as
/// `theta_{t+1}(i) = theta_t(i) + d_{t+1}(i)`.
#[derive(Debug, Clone, Copy)]
struct Tracked {
    vertex: Vertex,
    theta: u64,
}

/// A tree plus its sampler, random stream and tracked-vertex weights.
pub struct Grower {
    state: TreeState,
    sampler: SamplerKind,
    rng: SimRng,
    lookahead: Option<Lookahead>,
    tracked: Vec<Tracked>,
}

impl Grower {
    pub fn new(t_max: u64, sampler: SamplerKind, tracked: &[Vertex], rng: SimRng) -> Self {
        let state = TreeState::with_capacity(t_max, sampler == SamplerKind::Naive);
        let mut rng = rng;
        let lookahead = (sampler == SamplerKind::Fast).then(|| Lookahead::new(&state, t_max, &mut rng));
        let tracked = tracked
            .iter()
            .map(|&vertex| Tracked { vertex, theta: if vertex <= 1 { 1 } else { 0 } })
            .collect();
        Self { state, sampler, rng, lookahead, tracked }
    }

    pub fn state(&self) -> &TreeState {
        &self.state
    }

    pub fn into_state(self) -> TreeState {
        self.state
    }

    /// `theta_t` of the `k`-th tracked vertex (0 before it arrives).
    pub fn tracked_theta(&self, k: usize) -> u64 {
        self.tracked[k].theta
    }

    #[inline]
    pub fn step(&mut self) -> Vertex {
        let target = match (&mut self.lookahead, self.sampler) {
            (Some(la), _) => la.target(&self.state, &mut self.rng),
            (None, SamplerKind::Fast) => sampler::sample_target_fast(&self.state, &mut self.rng),
            (None, SamplerKind::Naive) => sampler::sample_target_naive(&self.state, &mut self.rng)
                .expect("naive grower maintains weights"),
        };
        self.state.attach(target);
        let t = self.state.t();
        for tr in &mut self.tracked {
            if tr.vertex as u64 <= t {
                tr.theta += self.state.degree(tr.vertex) as u64;
            }
        }
        target
    }

    /// Snapshot of the `k`-th tracked vertex at the current time.
    pub fn snapshot(&self, k: usize) -> Option<Snapshot> {
        let tr = self.tracked[k];
        let t = self.state.t();
        (tr.vertex as u64 <= t).then(|| Snapshot::new(t, self.state.degree(tr.vertex) as u64, tr.theta))
    }
}

/// Runs replica `replica` of `config`; a pure function of
/// `(config, replica)`.
pub fn simulate_replica(config: &SimConfig, replica: u32) -> Result<ReplicaOutput> {
    config.validate()?;
    let mut grower = Grower::new(config.t_max, config.sampler, &config.tracked, replica_rng(config.seed, replica as u64));
    let mut trajectories: Vec<Trajectory> = config
        .tracked
        .iter()
        .map(|&vertex| Trajectory { vertex, records: Vec::new() })
        .collect();

    let record = |g: &Grower, trajs: &mut [Trajectory]| {
        for (k, traj) in trajs.iter_mut().enumerate() {
            if let Some(s) = g.snapshot(k) {
                traj.records.push(s);
            }
        }
    };

    let mut grid = config.snapshots.iter().copied().peekable();
    while grid.peek() == Some(&1) {
        record(&grower, &mut trajectories);
        grid.next();
    }
    for next in grid {
        while grower.state().t() < next {
            grower.step();
        }
        record(&grower, &mut trajectories);
    }
    let histogram = DegreeHistogram::from_degrees(grower.state().degrees());
    Ok(ReplicaOutput { replica, trajectories, histogram })
}

/// All replicas, sequentially and in replica order.
pub fn simulate(config: &SimConfig) -> Result<Vec<ReplicaOutput>> {
    (0..config.replicas).map(|r| simulate_replica(config, r)).collect()
}

/// Degree of `vertex` at each time in `times` (increasing), for one run.
/// Cheaper than [`simulate_replica`] when only degrees are needed.
pub fn degree_path<R: Rng>(t_max: u64, vertex: Vertex, times: &[u64], rng: &mut R) -> Vec<u64> {
    let mut state = TreeState::with_capacity(t_max, false);
    let mut la = Lookahead::new(&state, times.last().copied().unwrap_or(0), rng);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        while state.t() < t {
            let target = la.target(&state, rng);
            state.attach(target);
        }
        out.push(if vertex as u64 <= state.t() { state.degree(vertex) as u64 } else { 0 });
    }
    out
}

/// Every-step record of one vertex, for stochastic-approximation analysis.
/// Index `k` holds time `t = vertex + k`; `hit[k]` is the indicator that
/// `v_{t+1}` attached to `vertex`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensePath {
    pub vertex: Vertex,
    pub degree: Vec<u64>,
    pub theta: Vec<u64>,
    pub hit: Vec<bool>,
}

impl DensePath {
    pub fn start(&self) -> u64 {
        self.vertex as u64
    }

    /// Last recorded time.
    pub fn end(&self) -> u64 {
        self.start() + self.degree.len() as u64 - 1
    }

    #[inline]
    pub fn at(&self, t: u64) -> (u64, u64) {
        let k = (t - self.start()) as usize;
        (self.degree[k], self.theta[k])
    }
}

/// Grows a tree to `t_end` with the fast sampler, recording `vertex` at
/// every step from its arrival.
pub fn dense_path(vertex: Vertex, t_end: u64, rng: SimRng) -> Result<DensePath> {
    if vertex < 1 || vertex as u64 > t_end {
        return Err(Error::InvalidConfig(format!("dense vertex {vertex} outside 1..={t_end}")));
    }
    if t_end > MAX_HORIZON {
        return Err(Error::HorizonTooLarge { t_max: t_end, limit: MAX_HORIZON });
    }
    let mut g = Grower::new(t_end, SamplerKind::Fast, &[vertex], rng);
    while g.state().t() < vertex as u64 {
        g.step();
    }
    let n = (t_end - vertex as u64 + 1) as usize;
    let mut path = DensePath {
        vertex,
        degree: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        hit: Vec::with_capacity(n),
    };
    loop {
        path.degree.push(g.state().degree(vertex) as u64);
        path.theta.push(g.tracked_theta(0));
        if g.state().t() == t_end {
            break;
        }
        path.hit.push(g.step() == vertex);
    }
    Ok(path)
}
