//! Deterministic analysis of the annealed ratio
//! `beta_t(i) = t E[d_t(i)] / E[theta_t(i)]`.
//!
//! The mean recursion gives `beta_{t+1} = F_t(beta_t)` with
//! `F_t(x) = (x (t + 1) + 1) / (x + t + 1/(t + 1))`, whose positive fixed
//! point `x_t` increases to `phi`. The series starts at `beta_i = i`,
//! decreases while it sits above `x_t` and increases once it drops below;
//! the switch happens at the crossover time `T(i)`.
//!
//! Iteration uses the increment form
//! `F_t(b) - b = (x_t - b)(b + 1/x_t) / (b + t + 1/(t + 1))`, which carries
//! the sign of `x_t - b` exactly, and accumulates `b` as an unevaluated
//! double-double sum so that increments of order `t^-2` are not lost.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Golden ratio.
pub const PHI: f64 = 1.618_033_988_749_895;
/// `1 / phi = phi - 1`, the degree-growth exponent.
pub const PSI: f64 = 0.618_033_988_749_894_8;

/// Iteration cap used for crossover searches.
pub const DEFAULT_CROSSOVER_CAP: u64 = 1_000_000_000;

/// `F_t(x)`.
#[inline]
pub fn map_f(t: u64, x: f64) -> f64 {
    let tf = t as f64;
    (x * (tf + 1.0) + 1.0) / (x + tf + 1.0 / (tf + 1.0))
}

/// Positive root of `x^2 - (t/(t+1)) x - 1 = 0`.
#[inline]
pub fn fixed_point(t: u64) -> f64 {
    let r = t as f64 / (t as f64 + 1.0);
    0.5 * (r + (r * r + 4.0).sqrt())
}

/// Compensated `beta` iterate at time `t`.
#[derive(Debug, Clone, Copy)]
pub struct BetaIter {
    i: u64,
    t: u64,
    hi: f64,
    lo: f64,
}

impl BetaIter {
    pub fn new(i: u64) -> Self {
        assert!(i >= 1, "beta series starts at a vertex i >= 1");
        Self { i, t: i, hi: i as f64, lo: 0.0 }
    }

    pub fn vertex(&self) -> u64 {
        self.i
    }

    #[inline]
    pub fn t(&self) -> u64 {
        self.t
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.hi + self.lo
    }

    /// `x_t - beta_t`, whose sign is the sign of `beta_{t+1} - beta_t`.
    #[inline]
    pub fn gap(&self, x_t: f64) -> f64 {
        (x_t - self.hi) - self.lo
    }

    /// Advance to `t + 1` given `x_t` and `gap(x_t)`.
    #[inline]
    pub fn advance_with(&mut self, x_t: f64, gap: f64) {
        let tf = self.t as f64;
        let b = self.hi;
        let inc = gap * (b + 1.0 / x_t) / (b + tf + 1.0 / (tf + 1.0));
        let y = inc + self.lo;
        let s = self.hi + y;
        self.lo = y - (s - self.hi);
        self.hi = s;
        self.t += 1;
    }

    /// Advance one step; returns `(x_t, gap)` at the old time.
    #[inline]
    pub fn advance(&mut self) -> (f64, f64) {
        let x = fixed_point(self.t);
        let g = self.gap(x);
        self.advance_with(x, g);
        (x, g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaSeries {
    pub i: u64,
    /// `beta_t` for `t = i..=t_max`.
    pub values: Vec<f64>,
    /// `x_t` for `t = i..=t_max`.
    pub fixed_points: Vec<f64>,
    /// `T(i)`, if reached by `t_max - 1`.
    pub crossover: Option<u64>,
}

impl BetaSeries {
    pub fn t_max(&self) -> u64 {
        self.i + self.values.len() as u64 - 1
    }

    pub fn beta_at(&self, t: u64) -> f64 {
        self.values[(t - self.i) as usize]
    }

    /// Number of sign changes in the first differences.
    pub fn sign_changes(&self) -> usize {
        let mut changes = 0;
        let mut prev = 0.0f64;
        for w in self.values.windows(2) {
            let d = w[1] - w[0];
            if d != 0.0 {
                if prev != 0.0 && d.signum() != prev.signum() {
                    changes += 1;
                }
                prev = d;
            }
        }
        changes
    }
}

/// `beta_t(i)` and `x_t` for `t = i..=t_max`.
pub fn beta_trajectory(i: u64, t_max: u64) -> Result<BetaSeries> {
    if i < 1 || t_max < i {
        return Err(Error::InvalidConfig(format!("beta series needs 1 <= i <= t_max, got i = {i}, t_max = {t_max}")));
    }
    let n = (t_max - i + 1) as usize;
    let mut values = Vec::with_capacity(n);
    let mut fixed_points = Vec::with_capacity(n);
    let mut crossover = None;
    let mut it = BetaIter::new(i);
    loop {
        let t = it.t();
        let x = fixed_point(t);
        values.push(it.beta());
        fixed_points.push(x);
        if t == t_max {
            break;
        }
        let g = it.gap(x);
        if crossover.is_none() {
            if g == 0.0 {
                return Err(Error::FixedPointTie { i, t });
            }
            if g > 0.0 {
                crossover = Some(t);
            }
        }
        it.advance_with(x, g);
    }
    Ok(BetaSeries { i, values, fixed_points, crossover })
}

/// `T(i) = min { t >= i : beta_{t+1} > beta_t }`.
pub fn crossover_time(i: u64, cap: u64) -> Result<u64> {
    let mut it = BetaIter::new(i);
    while it.t() < cap {
        let x = fixed_point(it.t());
        let g = it.gap(x);
        if g > 0.0 {
            return Ok(it.t());
        }
        if g == 0.0 {
            return Err(Error::FixedPointTie { i, t: it.t() });
        }
        it.advance_with(x, g);
    }
    Err(Error::IterationCap { i, cap })
}

/// `T(i)` for every entry of `vertices`. Independent chains are stepped in
/// interleaved groups so their latencies overlap.
pub fn crossover(vertices: &[u64], cap: u64) -> Result<Vec<(u64, u64)>> {
    const LANES: usize = 8;
    let mut out = Vec::with_capacity(vertices.len());
    for chunk in vertices.chunks(LANES) {
        let mut iters: Vec<BetaIter> = chunk.iter().map(|&i| BetaIter::new(i)).collect();
        let mut found: Vec<Option<u64>> = vec![None; chunk.len()];
        let mut pending = chunk.len();
        while pending > 0 {
            for (it, slot) in iters.iter_mut().zip(found.iter_mut()) {
                if slot.is_some() {
                    continue;
                }
                let t = it.t();
                if t >= cap {
                    return Err(Error::IterationCap { i: it.vertex(), cap });
                }
                let x = fixed_point(t);
                let g = it.gap(x);
                if g > 0.0 {
                    *slot = Some(t);
                    pending -= 1;
                } else if g == 0.0 {
                    return Err(Error::FixedPointTie { i: it.vertex(), t });
                } else {
                    it.advance_with(x, g);
                }
            }
        }
        out.extend(chunk.iter().zip(found).map(|(&i, t)| (i, t.expect("all lanes resolved"))));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCheck {
    /// `sup (t / log t) |beta_t - phi|` over the window.
    pub sup: f64,
    pub argmax: u64,
    /// Whether the whole window lies past `T(i)`.
    pub post_crossover: bool,
}

/// Supremum of `(t / log t) |beta_t - phi|` over `t in [t_min, t_max]`.
pub fn beta_rate_check(i: u64, t_min: u64, t_max: u64) -> Result<RateCheck> {
    if t_min < 2 || t_min < i || t_max < t_min {
        return Err(Error::InvalidConfig(format!("rate window [{t_min}, {t_max}] invalid for i = {i}")));
    }
    let mut it = BetaIter::new(i);
    let mut crossed_at = None;
    while it.t() < t_min {
        let (_, g) = it.advance();
        if crossed_at.is_none() && g > 0.0 {
            crossed_at = Some(it.t() - 1);
        }
    }
    let mut best = RateCheck { sup: f64::NEG_INFINITY, argmax: t_min, post_crossover: crossed_at.is_some() };
    loop {
        let t = it.t();
        let tf = t as f64;
        let v = tf / tf.ln() * (it.beta() - PHI).abs();
        if v > best.sup {
            best.sup = v;
            best.argmax = t;
        }
        if t == t_max {
            break;
        }
        it.advance();
    }
    Ok(best)
}

/// Walks `E[d_t(i)]` forward in `t` using
/// `E[d_{t+1}] = E[d_t] (1 + 1 / ((t + 1) beta_t))`, in log space.
#[derive(Debug, Clone)]
pub struct MeanDegreeWalk {
    beta: BetaIter,
    log_mean: f64,
}

impl MeanDegreeWalk {
    pub fn new(i: u64) -> Self {
        Self { beta: BetaIter::new(i), log_mean: 0.0 }
    }

    pub fn t(&self) -> u64 {
        self.beta.t()
    }

    pub fn mean(&self) -> f64 {
        self.log_mean.exp()
    }

    pub fn log_mean(&self) -> f64 {
        self.log_mean
    }

    pub fn beta(&self) -> f64 {
        self.beta.beta()
    }

    pub fn step(&mut self) {
        let t = self.beta.t() as f64;
        self.log_mean += (1.0 / ((t + 1.0) * self.beta.beta())).ln_1p();
        self.beta.advance();
    }

    pub fn advance_to(&mut self, t: u64) {
        while self.t() < t {
            self.step();
        }
    }
}

/// `E[d_t(i)]`, exact up to floating-point rounding.
pub fn mean_degree_exact(i: u64, t: u64) -> f64 {
    assert!(t >= i && i >= 1, "need t >= i >= 1");
    let mut w = MeanDegreeWalk::new(i);
    w.advance_to(t);
    w.mean()
}

/// `E[d_t(i)]` at each of the increasing times `times` (all `>= i`).
pub fn mean_degree_series(i: u64, times: &[u64]) -> Vec<f64> {
    let mut w = MeanDegreeWalk::new(i);
    times
        .iter()
        .map(|&t| {
            w.advance_to(t);
            w.mean()
        })
        .collect()
}

/// `log c_i = log Gamma(i - psi) - log Gamma(i)`.
pub fn log_gamma_prefactor(i: u64) -> f64 {
    ln_gamma(i as f64 - PSI) - ln_gamma(i as f64)
}

/// `c_i Gamma(t) / Gamma(t - psi)`; equals 1 at `t = i`.
pub fn mean_degree_upper_bound(i: u64, t: u64) -> f64 {
    assert!(t >= i && i >= 1, "need t >= i >= 1");
    let log_ci = log_gamma_prefactor(i);
    let log_ratio = ln_gamma(t as f64) - ln_gamma(t as f64 - PSI);
    (log_ci + log_ratio).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSeries {
    pub i: u64,
    /// `gamma_t = E[d_t] / (t + 1)^psi` for `t = i..=t_max`.
    pub values: Vec<f64>,
    /// Smallest `t` from which the series increases strictly through `t_max`.
    pub increasing_from: Option<u64>,
    /// `c_i`, the limit of the Gamma upper bound divided by `t^psi`.
    pub upper_limit: f64,
}

impl GammaSeries {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("non-empty series")
    }
}

pub fn gamma_lower_series(i: u64, t_max: u64) -> GammaSeries {
    assert!(t_max >= i && i >= 1, "need t_max >= i >= 1");
    let mut w = MeanDegreeWalk::new(i);
    let mut values = Vec::with_capacity((t_max - i + 1) as usize);
    loop {
        let t = w.t();
        values.push((w.log_mean() - PSI * ((t + 1) as f64).ln()).exp());
        if t == t_max {
            break;
        }
        w.step();
    }
    let mut from = values.len() - 1;
    while from > 0 && values[from - 1] < values[from] {
        from -= 1;
    }
    let increasing_from = (from < values.len() - 1).then_some(i + from as u64);
    GammaSeries { i, values, increasing_from, upper_limit: log_gamma_prefactor(i).exp() }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `(E[d_t], E[theta_t])` by the plain linear mean recursion, an
    /// algebraic route independent of `F_t`.
    fn linear_means(i: u64, t_max: u64) -> Vec<(f64, f64)> {
        let (mut d, mut th) = (1.0f64, 1.0f64);
        let mut out = vec![(d, th)];
        for t in i..t_max {
            let tt = t as f64 * (t as f64 + 1.0);
            let nd = d + th / tt;
            let nth = d + th * (1.0 + 1.0 / tt);
            d = nd;
            th = nth;
            out.push((d, th));
        }
        out
    }

    #[test]
    fn constants() {
        assert!((PHI * PHI - PHI - 1.0).abs() < 1e-15);
        assert!((PSI - (PHI - 1.0)).abs() < 1e-15);
        assert!((PSI + 1.0 - 1.0 / PSI).abs() < 1e-15);
        assert!((PHI - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn map_values() {
        assert!((map_f(1, 1.0) - 1.2).abs() < 1e-15);
        assert!((map_f(2, 2.0) - 21.0 / 13.0).abs() < 1e-15);
        for t in [1u64, 10, 1000, 1_000_000] {
            let x = fixed_point(t);
            assert!((map_f(t, x) - x).abs() < 1e-12);
        }
        assert!((fixed_point(1) - 0.5 * (0.5 + 4.25f64.sqrt())).abs() < 1e-15);
        assert!((fixed_point(1) - 1.2807764).abs() < 1e-7);
        assert!((fixed_point(100_000_000) - PHI).abs() < 1e-8);
    }

    #[test]
    fn fixed_points_increase_below_phi() {
        let mut prev = fixed_point(1);
        for t in 2..100_000u64 {
            let x = fixed_point(t);
            assert!(x > prev && x < PHI, "t = {t}");
            prev = x;
        }
    }

    #[test]
    fn map_increasing_concave() {
        for t in [1u64, 10, 1000] {
            let h = 1e-3;
            let mut x = h;
            while x + 2.0 * h <= 4.0 {
                let (a, b, c) = (map_f(t, x), map_f(t, x + h), map_f(t, x + 2.0 * h));
                assert!(b > a);
                assert!(c - 2.0 * b + a < 0.0, "t = {t}, x = {x}");
                x += h;
            }
        }
    }

    #[test]
    fn first_values() {
        let s = beta_trajectory(1, 50).unwrap();
        assert_eq!(s.values[0], 1.0);
        assert!((s.values[1] - 1.2).abs() < 1e-15);
        assert_eq!(s.crossover, Some(1));
        assert!(s.values.windows(2).all(|w| w[1] > w[0]));

        let s = beta_trajectory(2, 10).unwrap();
        assert_eq!(s.values[0], 2.0);
        assert!((s.values[1] - 21.0 / 13.0).abs() < 1e-15);
        assert!(s.values[1] < s.values[0]);
    }

    #[test]
    fn compensated_iteration_matches_direct_map_and_linear_route() {
        for i in [1u64, 2, 7, 30] {
            let s = beta_trajectory(i, 20_000).unwrap();
            let lin = linear_means(i, 20_000);
            let mut b = i as f64;
            for (k, &v) in s.values.iter().enumerate() {
                let t = i + k as u64;
                let (d, th) = lin[k];
                assert!((v - t as f64 * d / th).abs() < 1e-10, "i = {i}, t = {t}");
                assert!((v - b).abs() < 1e-10);
                b = map_f(t, b);
            }
        }
    }

    #[test]
    fn beta_bounds_and_unimodality() {
        for i in [2u64, 3, 10, 40] {
            let s = beta_trajectory(i, 200_000).unwrap();
            let cross = s.crossover.unwrap();
            assert!(cross > i);
            assert_eq!(s.sign_changes(), 1);
            for (k, &v) in s.values.iter().enumerate() {
                let t = i + k as u64;
                assert!((1.0..=t as f64).contains(&v));
                if t >= cross {
                    assert!(v < s.fixed_points[k], "i = {i}, t = {t}");
                }
            }
        }
    }

    #[test]
    fn small_crossovers() {
        assert_eq!(crossover_time(1, 10).unwrap(), 1);
        let lanes = crossover(&[1, 2, 3, 5, 10, 100], DEFAULT_CROSSOVER_CAP).unwrap();
        for &(i, t) in &lanes {
            assert_eq!(t, crossover_time(i, DEFAULT_CROSSOVER_CAP).unwrap());
            assert_eq!(Some(t), beta_trajectory(i, t + 2).unwrap().crossover);
        }
        assert!(matches!(crossover_time(100, 200), Err(Error::IterationCap { .. })));
    }

    #[test]
    fn mean_degree_small_cases() {
        assert_eq!(mean_degree_exact(3, 3), 1.0);
        assert!((mean_degree_exact(1, 2) - 1.5).abs() < 1e-15);
        for i in [1u64, 2, 5, 9] {
            let expect = 1.0 + 1.0 / (i as f64 * (i as f64 + 1.0));
            assert!((mean_degree_exact(i, i + 1) - expect).abs() < 1e-14);
        }
        for i in [1u64, 4] {
            let lin = linear_means(i, 5000);
            let times: Vec<u64> = (i..=5000).step_by(97).collect();
            for (t, m) in times.iter().zip(mean_degree_series(i, &times)) {
                let d = lin[(t - i) as usize].0;
                assert!((m / d - 1.0).abs() < 1e-11, "i = {i}, t = {t}");
            }
        }
    }

    #[test]
    fn upper_bound_dominates() {
        for i in [1u64, 2, 3, 10, 50] {
            assert_eq!(mean_degree_upper_bound(i, i), 1.0);
            let grid = crate::simulate::geometric_grid(i, 200_000, 1.1);
            let means = mean_degree_series(i, &grid);
            for (&t, m) in grid.iter().zip(means) {
                assert!(m <= mean_degree_upper_bound(i, t) * (1.0 + 1e-12), "i = {i}, t = {t}");
            }
        }
        let ci = log_gamma_prefactor(3).exp();
        let t = 10_000_000u64;
        let ratio = mean_degree_upper_bound(3, t) / (t as f64).powf(PSI);
        assert!((ratio / ci - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gamma_series_properties() {
        let g = gamma_lower_series(1, 100_000);
        assert!((g.values[0] - 2f64.powf(-PSI)).abs() < 1e-15);
        assert!(g.increasing_from.is_some());
        assert!(g.last() > 0.0 && g.last() <= g.upper_limit);
    }

    #[test]
    fn rate_check_runs() {
        let r = beta_rate_check(10, 1000, 10_000).unwrap();
        assert!(r.sup.is_finite() && r.sup > 0.0);
        assert!(r.post_crossover);
        assert!(!beta_rate_check(100, 1000, 2000).unwrap().post_crossover);
        assert!(beta_rate_check(10, 1, 100).is_err());
    }
}
