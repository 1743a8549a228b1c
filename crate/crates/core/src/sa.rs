//! Stochastic approximation: `x_{t+1} = x_t + a_t (h(x_t) + M_{t+1} + eps_{t+1})`.
//!
//! Generic pieces (iteration, fourth-order ODE integration, the pathwise
//! comparison between interpolated iterates and the ODE flow) plus the
//! functionals of the inverse ratio `alpha*_t = theta_t / (t d_t)`, which
//! is such a scheme with `a_t = 1/(t+1)` and `h(x) = 1 - x - x^2`.

use crate::determin::PSI;
use crate::error::{Error, Result};
use crate::simulate::DensePath;

/// Residual allowed when reassembling `alpha*_{t+1}` from its decomposition.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-12;

/// Tolerance of the halved-step check in [`ode_solve`].
pub const ODE_STEP_TOLERANCE: f64 = 1e-10;

/// `a_t = 1 / (t + 1)`.
#[inline]
pub fn harmonic_step(t: u64) -> f64 {
    1.0 / (t as f64 + 1.0)
}

/// Drift of the `alpha*` recursion, zero at `psi = 1/phi`.
#[inline]
pub fn quadratic_drift(x: f64) -> f64 {
    1.0 - x - x * x
}

/// Iterates of a scheme together with the cumulative times `T_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaPath {
    /// `x_t` for `t = 0..=steps`.
    pub x: Vec<f64>,
    /// `T_t = sum_{s < t} a_s`.
    pub times: Vec<f64>,
    /// `M_{t+1}` applied at step `t`.
    pub noise: Vec<f64>,
    /// `eps_{t+1}` applied at step `t`.
    pub error: Vec<f64>,
}

/// Runs the recursion for `steps` steps. `noise(t, x_t)` and
/// `error(t, x_t)` supply `M_{t+1}` and `eps_{t+1}`. Aborts when an
/// iterate leaves `[-bound, bound]`.
pub fn sa_iterate(
    x0: f64,
    steps: u64,
    step_size: impl Fn(u64) -> f64,
    drift: impl Fn(f64) -> f64,
    mut noise: impl FnMut(u64, f64) -> f64,
    mut error: impl FnMut(u64, f64) -> f64,
    bound: f64,
) -> Result<SaPath> {
    let n = steps as usize;
    let mut path = SaPath {
        x: Vec::with_capacity(n + 1),
        times: Vec::with_capacity(n + 1),
        noise: Vec::with_capacity(n),
        error: Vec::with_capacity(n),
    };
    let (mut x, mut time) = (x0, 0.0);
    path.x.push(x);
    path.times.push(time);
    for t in 0..steps {
        let a = step_size(t);
        let m = noise(t, x);
        let e = error(t, x);
        x += a * (drift(x) + m + e);
        time += a;
        if !(x.abs() <= bound) {
            return Err(Error::IterateEscaped { step: t + 1, value: x, bound });
        }
        path.x.push(x);
        path.times.push(time);
        path.noise.push(m);
        path.error.push(e);
    }
    Ok(path)
}

#[inline]
pub fn rk4_step(drift: &impl Fn(f64) -> f64, y: f64, du: f64) -> f64 {
    let k1 = drift(y);
    let k2 = drift(y + 0.5 * du * k1);
    let k3 = drift(y + 0.5 * du * k2);
    let k4 = drift(y + du * k3);
    y + du / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// ODE solution sampled at `u = k * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdePath {
    pub step: f64,
    pub y: Vec<f64>,
}

impl OdePath {
    pub fn u(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn last(&self) -> f64 {
        *self.y.last().expect("non-empty path")
    }
}

fn rk4_path(drift: &impl Fn(f64) -> f64, y0: f64, steps: usize, du: f64) -> Vec<f64> {
    let mut y = Vec::with_capacity(steps + 1);
    let mut v = y0;
    y.push(v);
    for _ in 0..steps {
        v = rk4_step(drift, v, du);
        y.push(v);
    }
    y
}

/// Solves `y' = h(y)` on `[0, u_max]` with classical Runge-Kutta, and
/// rejects the step when the halved-step solution disagrees by more than
/// [`ODE_STEP_TOLERANCE`].
pub fn ode_solve(drift: impl Fn(f64) -> f64, y0: f64, u_max: f64, step: f64) -> Result<OdePath> {
    if !(step > 0.0 && u_max >= 0.0) {
        return Err(Error::InvalidConfig(format!("ODE needs step > 0 and u_max >= 0, got {step}, {u_max}")));
    }
    let n = (u_max / step).ceil() as usize;
    let du = if n == 0 { step } else { u_max / n as f64 };
    let coarse = rk4_path(&drift, y0, n, du);
    let fine = rk4_path(&drift, y0, 2 * n, du / 2.0);
    let diff = coarse
        .iter()
        .zip(fine.iter().step_by(2))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !(diff <= ODE_STEP_TOLERANCE) {
        return Err(Error::StepTooLarge { step: du, diff });
    }
    Ok(OdePath { step: du, y: coarse })
}

/// Whether `|y(u) - psi| <= |y(0) - psi| e^{-2 psi u}` at every sample.
///
/// Near equilibrium an increment `du * h(y)` below half an ulp is lost, so
/// the iterate stalls at distance about `eps / du`; that floor is allowed.
pub fn within_exponential_envelope(path: &OdePath) -> bool {
    let d0 = (path.y[0] - PSI).abs();
    let floor = f64::EPSILON / path.step;
    path.y.iter().enumerate().all(|(k, &y)| {
        let env = d0 * (-2.0 * PSI * path.u(k)).exp();
        (y - PSI).abs() <= env * (1.0 + 1e-12) + floor
    })
}

/// Functionals of `alpha*_t` along a dense path of one vertex. Index `k`
/// refers to time `t = start + k`; step-indexed series (`martingale`,
/// `error`, `cond_var`, `cond_var_bound`) hold the value attached to the
/// step `t -> t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaStarSeries {
    pub vertex: u32,
    pub start: u64,
    pub alpha_star: Vec<f64>,
    /// `M*_{t+1}`.
    pub martingale: Vec<f64>,
    /// `eps_{t+1} = alpha*_t^2 (1 - t d_t / ((t + 1)(d_t + 1)))`.
    pub error: Vec<f64>,
    /// `zeta_t = sum_{s=i}^{t-1} M*_{s+1} / (s + 1)`.
    pub zeta: Vec<f64>,
    /// `E[(M*_{t+1})^2 | F_t]`.
    pub cond_var: Vec<f64>,
    /// `t / d_t`, an upper bound for `cond_var`.
    pub cond_var_bound: Vec<f64>,
    /// `d_t / prod_{s=i}^{t-1} (1 + alpha*_s / (s + 1))`.
    pub m_bar: Vec<f64>,
    /// `prod (1 + alpha*_s/(s+1)) / prod (1 + psi/(s+1))`.
    pub q_star: Vec<f64>,
    pub max_residual: f64,
}

impl AlphaStarSeries {
    pub fn end(&self) -> u64 {
        self.start + self.alpha_star.len() as u64 - 1
    }

    fn idx(&self, t: u64) -> usize {
        (t - self.start) as usize
    }

    pub fn alpha_star_at(&self, t: u64) -> f64 {
        self.alpha_star[self.idx(t)]
    }

    pub fn zeta_at(&self, t: u64) -> f64 {
        self.zeta[self.idx(t)]
    }

    pub fn m_bar_at(&self, t: u64) -> f64 {
        self.m_bar[self.idx(t)]
    }

    pub fn window_input(&self) -> WindowInput<'_> {
        WindowInput { first: self.start, x: &self.alpha_star, zeta: &self.zeta, error: &self.error }
    }
}

/// `E[1{t+1 -> i} / (d_t + 1{t+1 -> i}) | F_t] = theta_t / (t (t+1) (d_t + 1))`.
#[inline]
pub fn hit_conditional_mean(t: u64, degree: u64, theta: u64) -> f64 {
    theta as f64 / (t as f64 * (t as f64 + 1.0) * (degree as f64 + 1.0))
}

/// `M*_{t+1}` for one step.
#[inline]
pub fn martingale_increment(t: u64, degree: u64, theta: u64, hit: bool) -> f64 {
    let a = theta as f64 / (t as f64 * degree as f64);
    let h = if hit { 1.0 / (degree as f64 + 1.0) } else { 0.0 };
    t as f64 * a * (h - hit_conditional_mean(t, degree, theta))
}

pub fn alpha_star_functionals(path: &DensePath) -> Result<AlphaStarSeries> {
    let start = path.start();
    let n = path.degree.len();
    let mut s = AlphaStarSeries {
        vertex: path.vertex,
        start,
        alpha_star: Vec::with_capacity(n),
        martingale: Vec::with_capacity(n),
        error: Vec::with_capacity(n),
        zeta: Vec::with_capacity(n),
        cond_var: Vec::with_capacity(n),
        cond_var_bound: Vec::with_capacity(n),
        m_bar: Vec::with_capacity(n),
        q_star: Vec::with_capacity(n),
        max_residual: 0.0,
    };
    let (mut zeta, mut log_prod, mut log_psi_prod) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..n {
        let t = start + k as u64;
        let tf = t as f64;
        let (d, th) = (path.degree[k], path.theta[k]);
        let a = th as f64 / (tf * d as f64);
        s.alpha_star.push(a);
        s.zeta.push(zeta);
        s.m_bar.push(((d as f64).ln() - log_prod).exp());
        s.q_star.push((log_prod - log_psi_prod).exp());
        if k + 1 == n {
            break;
        }
        let hit = path.hit[k];
        let m = martingale_increment(t, d, th, hit);
        let ratio = tf * d as f64 / ((tf + 1.0) * (d as f64 + 1.0));
        let eps = a * a * (1.0 - ratio);
        let rebuilt = a + (1.0 - a - a * a - m) / (tf + 1.0) - a * a / (tf + 1.0) * (ratio - 1.0);
        let (d1, th1) = (path.degree[k + 1], path.theta[k + 1]);
        let recorded = th1 as f64 / ((tf + 1.0) * d1 as f64);
        let residual = (rebuilt - recorded).abs();
        if residual > RECONSTRUCTION_TOLERANCE {
            return Err(Error::ReconstructionResidual { t, residual });
        }
        s.max_residual = s.max_residual.max(residual);
        s.martingale.push(m);
        s.error.push(eps);
        let c = th as f64;
        s.cond_var.push(a * a * c * (tf * (tf + 1.0) - c) / ((tf + 1.0).powi(2) * (d as f64 + 1.0).powi(2)));
        s.cond_var_bound.push(tf / d as f64);
        zeta += m / (tf + 1.0);
        log_prod += (a / (tf + 1.0)).ln_1p();
        log_psi_prod += (PSI / (tf + 1.0)).ln_1p();
    }
    Ok(s)
}

/// Constants of the comparison bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonParams {
    /// Lipschitz constant `L` of the drift.
    pub lipschitz: f64,
    /// `C_0 = sup |x_t|`.
    pub c0: f64,
    /// `|h(0)|`.
    pub h0: f64,
    /// ODE substeps per interpolation interval.
    pub refine: usize,
}

impl Default for ComparisonParams {
    /// Values for `h(x) = 1 - x - x^2` on `[0, 1]`.
    fn default() -> Self {
        Self { lipschitz: 3.0, c0: 1.0, h0: 1.0, refine: 8 }
    }
}

/// A recorded scheme with `a_t = 1/(t+1)`: `x[k] = x_{first+k}`,
/// `zeta[k] = zeta_{first+k}`, `error[k] = eps_{first+k+1}`.
#[derive(Debug, Clone, Copy)]
pub struct WindowInput<'a> {
    pub first: u64,
    pub x: &'a [f64],
    pub zeta: &'a [f64],
    pub error: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaWindowReport {
    pub t0: u64,
    pub t1: u64,
    /// `T_{t1} - T_{t0}`.
    pub horizon: f64,
    pub sup_dev: f64,
    pub bound: f64,
    /// `K_{T,t,L}`.
    pub k: f64,
    /// `C_{T,L}`.
    pub c: f64,
    pub sum_a_sq: f64,
    pub sup_zeta_dev: f64,
    pub err_sum: f64,
}

impl SaWindowReport {
    pub fn holds(&self) -> bool {
        self.sup_dev <= self.bound
    }
}

/// Compares the interpolated iterates with the ODE flow started at
/// `x_{t0}` over `[T_{t0}, T_{2 t0}]` and evaluates the pathwise bound
/// `K e^{LT} + C a_{t0} + sum a_s |eps_s|`.
pub fn comparison_bound(
    input: WindowInput<'_>,
    t0: u64,
    drift: impl Fn(f64) -> f64,
    params: ComparisonParams,
) -> Result<SaWindowReport> {
    let t1 = 2 * t0;
    let last_x = input.first + input.x.len() as u64 - 1;
    let last_err = input.first + input.error.len() as u64;
    if t0 < input.first || t0 == 0 || last_x < t1 + 1 || last_err < t1 + 1 || input.zeta.len() < input.x.len() {
        return Err(Error::PathTooShort { vertex: 0, end: last_x.min(last_err), needed: t1 + 1 });
    }
    let at = |t: u64| (t - input.first) as usize;
    let l = params.lipschitz;

    let mut horizon = 0.0;
    let mut sup_dev = 0.0f64;
    let mut y = input.x[at(t0)];
    for s in t0..t1 {
        let a = harmonic_step(s);
        horizon += a;
        let (xa, xb) = (input.x[at(s)], input.x[at(s + 1)]);
        let du = a / params.refine as f64;
        for sub in 1..=params.refine {
            y = rk4_step(&drift, y, du);
            let frac = sub as f64 / params.refine as f64;
            let xbar = xa + (xb - xa) * frac;
            sup_dev = sup_dev.max((xbar - y).abs());
        }
    }

    let mut sum_a_sq = 0.0;
    let mut err_sum = 0.0;
    let mut sup_zeta_dev = 0.0f64;
    let z0 = input.zeta[at(t0)];
    for s in t0..=t1 {
        let a = harmonic_step(s);
        sum_a_sq += a * a;
        err_sum += a * input.error[at(s)].abs();
        sup_zeta_dev = sup_zeta_dev.max((input.zeta[at(s)] - z0).abs());
    }
    let growth = (l * horizon).exp();
    let c = params.h0 + l * (params.c0 + params.h0 * horizon) * growth;
    let k = c * l * sum_a_sq + sup_zeta_dev;
    let bound = k * growth + c * harmonic_step(t0) + err_sum;
    Ok(SaWindowReport { t0, t1, horizon, sup_dev, bound, k, c, sum_a_sq, sup_zeta_dev, err_sum })
}
