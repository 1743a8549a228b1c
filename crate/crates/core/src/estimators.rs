//! Post-processing of recorded trajectories: growth-exponent fits, the
//! `epsilon_i` scaling check, `alpha_t` convergence summaries and degree
//! histograms.

use std::collections::BTreeMap;

use crate::determin::{PHI, PSI};
use crate::error::{Error, Result};
use crate::simulate::Trajectory;
use crate::tree::Vertex;

/// Minimum snapshots inside a fit window.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub vertex: Vertex,
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the mean slope across replicas (OLS standard error
    /// when there is a single replica).
    pub stderr: f64,
    pub t_lo: u64,
    pub t_hi: u64,
    pub replicas: usize,
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, se(b))`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let se = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, intercept, se)
}

/// Log-log slope of degree against time inside `[t_lo, t_hi]`, fitted per
/// trajectory and averaged. All trajectories must belong to one vertex.
pub fn fit_exponent(trajectories: &[&Trajectory], t_lo: u64, t_hi: u64) -> Result<FitResult> {
    let vertex = trajectories.first().map(|t| t.vertex).ok_or_else(|| {
        Error::InvalidConfig("no trajectories to fit".into())
    })?;
    if trajectories.iter().any(|t| t.vertex != vertex) {
        return Err(Error::InvalidConfig("fit mixes trajectories of different vertices".into()));
    }
    let mut fits = Vec::with_capacity(trajectories.len());
    for traj in trajectories {
        let (x, y): (Vec<f64>, Vec<f64>) = traj
            .records
            .iter()
            .filter(|s| s.t >= t_lo && s.t <= t_hi && s.degree >= 1)
            .map(|s| ((s.t as f64).ln(), (s.degree as f64).ln()))
            .unzip();
        if x.len() < MIN_FIT_POINTS {
            return Err(Error::DegenerateWindow { t_lo, t_hi, points: x.len(), needed: MIN_FIT_POINTS });
        }
        fits.push(ols(&x, &y));
    }
    let n = fits.len() as f64;
    let slope = fits.iter().map(|f| f.0).sum::<f64>() / n;
    let intercept = fits.iter().map(|f| f.1).sum::<f64>() / n;
    let stderr = if fits.len() == 1 {
        fits[0].2
    } else {
        let var = fits.iter().map(|f| (f.0 - slope).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    };
    Ok(FitResult { vertex, slope, intercept, stderr, t_lo, t_hi, replicas: fits.len() })
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonEstimate {
    pub vertex: Vertex,
    pub t_max: u64,
    /// `d_{t_max}(i) / t_max^psi` per replica.
    pub per_replica: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    /// `i^psi * mean`.
    pub scaled: f64,
    pub scaled_stderr: f64,
}

impl EpsilonEstimate {
    pub fn minimum(&self) -> f64 {
        self.per_replica.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Endpoint estimator of `epsilon_i` from final degrees.
pub fn epsilon_estimate(vertex: Vertex, t_max: u64, final_degrees: &[u64]) -> EpsilonEstimate {
    let norm = (t_max as f64).powf(PSI);
    let per_replica: Vec<f64> = final_degrees.iter().map(|&d| d as f64 / norm).collect();
    let (mean, stderr) = mean_stderr(&per_replica);
    let scale = (vertex as f64).powf(PSI);
    EpsilonEstimate { vertex, t_max, per_replica, mean, stderr, scaled: scale * mean, scaled_stderr: scale * stderr }
}

/// Linear-interpolated quantile of a sorted slice, `q` in `[0, 1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaQuantiles {
    pub t: u64,
    pub median: f64,
    pub p90: f64,
}

/// Median and 90th percentile of `|alpha_t(i) - phi|` across replicas at
/// each snapshot time shared by all trajectories.
pub fn alpha_summary(trajectories: &[&Trajectory]) -> Vec<AlphaQuantiles> {
    let Some(first) = trajectories.first() else { return Vec::new() };
    let mut out = Vec::new();
    for (k, s) in first.records.iter().enumerate() {
        let mut devs: Vec<f64> = Vec::with_capacity(trajectories.len());
        for traj in trajectories {
            match traj.records.get(k) {
                Some(r) if r.t == s.t => devs.push((r.alpha - PHI).abs()),
                _ => break,
            }
        }
        if devs.len() != trajectories.len() {
            break;
        }
        devs.sort_by(f64::total_cmp);
        out.push(AlphaQuantiles { t: s.t, median: quantile_sorted(&devs, 0.5), p90: quantile_sorted(&devs, 0.9) });
    }
    out
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Final-time degree counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DegreeHistogram {
    pub counts: BTreeMap<u32, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    /// Estimated `tau` in `p_k ~ k^{-tau}`.
    pub exponent: f64,
    pub stderr: f64,
    pub min_degree: u32,
    pub points: usize,
}

impl DegreeHistogram {
    pub fn from_degrees(degrees: &[u32]) -> Self {
        let mut counts = BTreeMap::new();
        for &d in degrees {
            *counts.entry(d).or_insert(0) += 1;
        }
        Self { counts }
    }

    pub fn total_vertices(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn degree_sum(&self) -> u64 {
        self.counts.iter().map(|(&k, &c)| k as u64 * c).sum()
    }

    /// Adds another histogram's counts into this one.
    pub fn merge(&mut self, other: &DegreeHistogram) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
    }

    /// Exploratory tail exponent: regress `log P(D >= k)` on `log k` over
    /// observed degrees `k > min_degree`; `tau = 1 - slope`.
    pub fn tail_exponent(&self, min_degree: u32) -> Option<TailFit> {
        let total = self.total_vertices() as f64;
        let mut above: u64 = self.counts.range(min_degree + 1..).map(|(_, &c)| c).sum();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (&k, &c) in self.counts.range(min_degree + 1..) {
            x.push((k as f64).ln());
            y.push((above as f64 / total).ln());
            above -= c;
        }
        if x.len() < 3 {
            return None;
        }
        let (slope, _, se) = ols(&x, &y);
        Some(TailFit { exponent: 1.0 - slope, stderr: se, min_degree, points: x.len() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::Snapshot;

    fn synthetic(vertex: Vertex, f: impl Fn(u64) -> u64) -> Trajectory {
        let grid = crate::simulate::geometric_grid(100, 1_000_000, 1.1);
        Trajectory { vertex, records: grid.iter().map(|&t| Snapshot::new(t, f(t), t * f(t))).collect() }
    }

    #[test]
    fn recovers_pure_power_law() {
        let grid = crate::simulate::geometric_grid(100, 1_000_000, 1.1);
        let x: Vec<f64> = grid.iter().map(|&t| (t as f64).ln()).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 + PSI * v).collect();
        let (b, a, _) = ols(&x, &y);
        assert!((b - PSI).abs() < 1e-6);
        assert!((a - 0.3).abs() < 1e-6);
    }

    #[test]
    fn floor_power_law_slope() {
        let traj = synthetic(1, |t| (t as f64).powf(0.618).floor() as u64);
        let fit = fit_exponent(&[&traj], 10_000, 1_000_000).unwrap();
        assert!((fit.slope - 0.618).abs() < 0.01, "{fit:?}");
        assert_eq!(fit.replicas, 1);
    }

    #[test]
    fn degenerate_window() {
        let traj = synthetic(1, |t| t);
        let err = fit_exponent(&[&traj], 500_000, 600_000).unwrap_err();
        assert!(matches!(err, Error::DegenerateWindow { .. }));
        let other = synthetic(2, |t| t);
        assert!(fit_exponent(&[&traj, &other], 100, 1_000_000).is_err());
    }

    #[test]
    fn alpha_at_arrival() {
        let traj = Trajectory { vertex: 7, records: vec![Snapshot::new(7, 1, 1)] };
        let s = alpha_summary(&[&traj]);
        assert_eq!(s[0].median, 7.0 - PHI);
    }

    #[test]
    fn histogram_identities_and_tail() {
        let h = DegreeHistogram::from_degrees(&[3, 1, 1, 1, 2, 1, 1]);
        assert_eq!(h.total_vertices(), 7);
        assert_eq!(h.degree_sum(), 10);
        assert!(h.tail_exponent(10).is_none());
        // exact Pareto CCDF k^{-2} -> tau = 3
        let mut counts = BTreeMap::new();
        let n = 1u64 << 40;
        for k in 1..200u64 {
            let ccdf = |k: u64| n / (k * k);
            let c = if k == 199 { ccdf(k) } else { ccdf(k) - ccdf(k + 1) };
            counts.insert(k as u32, c);
        }
        let fit = DegreeHistogram { counts }.tail_exponent(10).unwrap();
        assert!((fit.exponent - 3.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn spearman_extremes() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn epsilon_positive() {
        let e = epsilon_estimate(4, 1000, &[5, 7, 9]);
        assert!(e.minimum() > 0.0);
        assert!((e.scaled - 4f64.powf(PSI) * e.mean).abs() < 1e-12);
    }
}
