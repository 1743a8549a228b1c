//! Classical preferential attachment tree with shift `delta`: the new vertex
//! attaches to `i` with probability `(d_i(t) + delta) / (2t + delta (t + 1))`.
//!
//! Weights live in a Fenwick tree of `f64`; the normalising total is taken
//! from the closed form every step rather than accumulated.

use rand::Rng;

use crate::error::{Error, Result};
use crate::simulate::{Snapshot, Trajectory};
use crate::tree::{Vertex, MAX_HORIZON};

/// Binary indexed tree over `f64` weights with prefix sums and
/// inverse-CDF selection in `O(log n)`.
#[derive(Debug, Clone)]
pub struct Fenwick {
    tree: Vec<f64>,
    top_bit: usize,
}

impl Fenwick {
    pub fn new(len: usize) -> Self {
        let top_bit = if len == 0 { 0 } else { 1 << (usize::BITS - 1 - len.leading_zeros()) };
        Self { tree: vec![0.0; len + 1], top_bit }
    }

    pub fn len(&self) -> usize {
        self.tree.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn add(&mut self, index: usize, delta: f64) {
        let mut k = index + 1;
        while k < self.tree.len() {
            self.tree[k] += delta;
            k += k & k.wrapping_neg();
        }
    }

    /// Sum of weights `0..end`.
    pub fn prefix(&self, end: usize) -> f64 {
        let mut k = end;
        let mut s = 0.0;
        while k > 0 {
            s += self.tree[k];
            k &= k - 1;
        }
        s
    }

    /// Smallest index whose inclusive prefix sum exceeds `u`.
    pub fn select(&self, mut u: f64) -> usize {
        let mut pos = 0;
        let mut step = self.top_bit;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= u {
                pos = next;
                u -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

#[derive(Debug, Clone)]
pub struct PatState {
    t: u64,
    delta: f64,
    degree: Vec<u32>,
    parent: Vec<Vertex>,
    weights: Fenwick,
}

impl PatState {
    /// The tree at `t = 1` with room to grow to `t_max`.
    pub fn new(delta: f64, t_max: u64) -> Result<Self> {
        if !(delta > -1.0) || !delta.is_finite() {
            return Err(Error::InvalidShift(delta));
        }
        if t_max > MAX_HORIZON {
            return Err(Error::HorizonTooLarge { t_max, limit: MAX_HORIZON });
        }
        let cap = t_max.max(1) as usize + 1;
        let mut weights = Fenwick::new(cap);
        weights.add(0, 1.0 + delta);
        weights.add(1, 1.0 + delta);
        let mut degree = Vec::with_capacity(cap);
        degree.extend_from_slice(&[1, 1]);
        let mut parent = Vec::with_capacity(cap);
        parent.extend_from_slice(&[0, 0]);
        Ok(Self { t: 1, delta, degree, parent, weights })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn degree(&self, i: Vertex) -> u32 {
        self.degree[i as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    pub fn parent(&self, j: Vertex) -> Option<Vertex> {
        (j >= 1 && (j as u64) <= self.t).then(|| self.parent[j as usize])
    }

    pub fn fenwick(&self) -> &Fenwick {
        &self.weights
    }

    /// `2t + delta (t + 1)`.
    pub fn total_weight(&self) -> f64 {
        2.0 * self.t as f64 + self.delta * (self.t as f64 + 1.0)
    }

    pub fn attach_probabilities(&self) -> Vec<f64> {
        let total = self.total_weight();
        self.degree.iter().map(|&d| (d as f64 + self.delta) / total).collect()
    }

    /// Vertex owning position `u` in `[0, total_weight())`.
    pub fn select(&self, u: f64) -> Vertex {
        (self.weights.select(u) as u64).min(self.t) as Vertex
    }

    /// Endpoint `r mod 2` of edge `1 + r / 2`, for `r` in `[0, 2t)`.
    /// Uniform `r` induces the `delta = 0` law.
    pub fn edge_endpoint_select(&self, r: u64) -> Vertex {
        let j = 1 + r / 2;
        if r.is_multiple_of(2) {
            j as Vertex
        } else {
            self.parent[j as usize]
        }
    }

    pub fn attach(&mut self, target: Vertex) {
        assert!((target as u64) <= self.t);
        assert!(((self.t + 1) as usize) < self.weights.len(), "PatState capacity exceeded");
        self.degree[target as usize] += 1;
        self.weights.add(target as usize, 1.0);
        self.t += 1;
        self.degree.push(1);
        self.parent.push(target);
        self.weights.add(self.t as usize, 1.0 + self.delta);
    }

    /// One growth step; returns the target.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vertex {
        let u = rng.random::<f64>() * self.total_weight();
        let target = self.select(u);
        self.attach(target);
        target
    }
}

/// Grows a PAT to the last entry of `snapshots`, recording `(t, d_t(i))`
/// together with the running `theta_t(i) = sum_s d_s(i)` for comparability
/// with the self-reinforced model.
pub fn pat_simulate<R: Rng + ?Sized>(
    delta: f64,
    tracked: &[Vertex],
    snapshots: &[u64],
    rng: &mut R,
) -> Result<(Vec<Trajectory>, Vec<u32>)> {
    let t_max = *snapshots.last().ok_or_else(|| Error::InvalidConfig("empty snapshot grid".into()))?;
    crate::simulate::validate_grid(snapshots, t_max)?;
    let mut state = PatState::new(delta, t_max)?;
    let mut thetas: Vec<u64> = tracked.iter().map(|&v| if v <= 1 { 1 } else { 0 }).collect();
    let mut trajs: Vec<Trajectory> = tracked.iter().map(|&vertex| Trajectory { vertex, records: Vec::new() }).collect();
    for &next in snapshots {
        while state.t() < next {
            state.step(rng);
            let t = state.t();
            for (th, &v) in thetas.iter_mut().zip(tracked) {
                if v as u64 <= t {
                    *th += state.degree(v) as u64;
                }
            }
        }
        for ((traj, &th), &v) in trajs.iter_mut().zip(&thetas).zip(tracked) {
            if v as u64 <= state.t() {
                traj.records.push(Snapshot::new(state.t(), state.degree(v) as u64, th));
            }
        }
    }
    let degrees = state.degrees().to_vec();
    Ok((trajs, degrees))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;

    #[test]
    fn rejects_bad_shift() {
        assert_eq!(PatState::new(-1.0, 10).unwrap_err(), Error::InvalidShift(-1.0));
        assert!(PatState::new(f64::NAN, 10).is_err());
        assert!(PatState::new(-0.99, 10).is_ok());
    }

    #[test]
    fn initial_probabilities() {
        for delta in [0.0, 1.0, PSI_SHIFT] {
            let s = PatState::new(delta, 10).unwrap();
            let p = s.attach_probabilities();
            assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        }
    }
    const PSI_SHIFT: f64 = crate::determin::PHI - 2.0;

    #[test]
    fn fenwick_prefix_and_select() {
        let mut f = Fenwick::new(10);
        let w = [1.0, 0.0, 2.5, 3.0, 0.5, 0.0, 0.0, 1.0, 2.0, 4.0];
        for (i, &x) in w.iter().enumerate() {
            f.add(i, x);
        }
        let mut acc = 0.0;
        for (i, &x) in w.iter().enumerate() {
            assert_eq!(f.prefix(i), acc);
            if x > 0.0 {
                assert_eq!(f.select(acc), i);
                assert_eq!(f.select(acc + x * 0.999), i);
            }
            acc += x;
        }
    }

    #[test]
    fn total_weight_tracks_closed_form() {
        let mut rng = replica_rng(2, 0);
        for delta in [0.0, 2.0, PSI_SHIFT, -0.5] {
            let mut s = PatState::new(delta, 5000).unwrap();
            for _ in 1..5000 {
                s.step(&mut rng);
                let t = s.t() as usize;
                let p = s.fenwick().prefix(t + 1);
                assert!((p - s.total_weight()).abs() < 1e-9 * s.total_weight(), "delta = {delta}");
                let probs: f64 = s.attach_probabilities().iter().sum();
                assert!((probs - 1.0).abs() < 1e-9);
            }
            let deg: u64 = s.degrees().iter().map(|&d| d as u64).sum();
            assert_eq!(deg, 2 * s.t());
        }
    }

    #[test]
    fn horizon_one_trajectory() {
        let mut rng = replica_rng(0, 0);
        let (trajs, degrees) = pat_simulate(0.0, &[1], &[1], &mut rng).unwrap();
        assert_eq!(degrees, vec![1, 1]);
        assert_eq!(trajs[0].records[0].degree, 1);
    }
}
