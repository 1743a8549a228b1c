//! Attachment samplers.
//!
//! Both samplers consume one uniform integer `r` in `[0, t (t + 1))` and map
//! it deterministically to a vertex, so their induced laws can be checked
//! exactly by enumerating `r`.
//!
//! * The reference sampler scans cumulative `theta` weights: `O(t)`.
//! * The edge-age sampler picks edge `e_j` with probability
//!   `2 (t + 1 - j) / (t (t + 1))` and then one of its endpoints uniformly:
//!   `O(1)` and no weight array.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tree::{TreeState, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Naive,
    Fast,
}

impl SamplerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Naive => "naive",
            SamplerKind::Fast => "fast",
        }
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(SamplerKind::Naive),
            "fast" => Ok(SamplerKind::Fast),
            other => Err(Error::InvalidConfig(format!("unknown sampler `{other}`"))),
        }
    }
}

/// Which endpoint of `e_j = {v_j, parent(j)}` was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// `v_j` itself.
    Child,
    Parent,
}

/// Uniform rank in `[0, t (t + 1))`.
#[inline]
pub fn draw_rank<R: Rng + ?Sized>(t: u64, rng: &mut R) -> u64 {
    rng.random_range(0..t * (t + 1))
}

/// Maps a rank `r < t (t + 1)` to `(j, endpoint)`.
///
/// With `k = t + 1 - j`, the ranks `[(k - 1) k, k (k + 1))` belong to edge
/// `e_j`: `2k` ranks each, half for each endpoint. The floating-point guess
/// for `k` is corrected against the integer CDF so the map is exact.
#[inline]
pub fn edge_age_select(t: u64, r: u64) -> (u64, Endpoint) {
    debug_assert!(r < t * (t + 1));
    let guess = ((-1.0 + (1.0 + 4.0 * r as f64).sqrt()) * 0.5).floor() as u64 + 1;
    let mut k = guess.clamp(1, t);
    while k * (k + 1) <= r {
        k += 1;
    }
    while k > 1 && (k - 1) * k > r {
        k -= 1;
    }
    let offset = r - (k - 1) * k;
    let end = if offset < k { Endpoint::Child } else { Endpoint::Parent };
    (t + 1 - k, end)
}

/// Cumulative scan: the smallest `i` with `theta[0] + ... + theta[i] > r`.
#[inline]
pub fn cumulative_select(theta: &[u64], r: u64) -> Vertex {
    let mut acc = 0u64;
    for (i, &w) in theta.iter().enumerate() {
        acc += w;
        if r < acc {
            return i as Vertex;
        }
    }
    unreachable!("rank {r} beyond total weight {acc}")
}

/// Vertex selected by the edge-age map for rank `r` in `state`.
#[inline]
pub fn fast_select(state: &TreeState, r: u64) -> Vertex {
    let (j, end) = edge_age_select(state.t(), r);
    match end {
        Endpoint::Child => j as Vertex,
        Endpoint::Parent => state.parent(j as Vertex).expect("edge index within 1..=t"),
    }
}

/// Edge-age sampler that draws its ranks a few steps ahead and prefetches
/// the tree entries they will touch. Ranks never depend on the tree, so the
/// draw for time `s` is the same as with [`sample_target_fast`] and the
/// trees grown are identical for a given stream.
///
/// Steps must be consecutive from the time the lookahead was created, and
/// no draws may be made from the stream in between.
#[derive(Debug, Clone)]
pub struct Lookahead {
    ring: [(u64, Endpoint); Self::DEPTH],
    next_draw: u64,
    limit: u64,
}

impl Lookahead {
    const DEPTH: usize = 16;

    /// Pipelines draws for times `state.t()..limit`; later steps draw
    /// directly.
    pub fn new<R: Rng + ?Sized>(state: &TreeState, limit: u64, rng: &mut R) -> Self {
        let mut la = Self { ring: [(0, Endpoint::Child); Self::DEPTH], next_draw: state.t(), limit };
        while la.next_draw < limit && la.next_draw < state.t() + Self::DEPTH as u64 {
            la.refill(state, rng);
        }
        la
    }

    #[inline]
    fn refill<R: Rng + ?Sized>(&mut self, state: &TreeState, rng: &mut R) {
        let s = self.next_draw;
        let (j, end) = edge_age_select(s, draw_rank(s, rng));
        state.prefetch_edge(j);
        self.ring[s as usize % Self::DEPTH] = (j, end);
        self.next_draw += 1;
    }

    #[inline]
    pub fn target<R: Rng + ?Sized>(&mut self, state: &TreeState, rng: &mut R) -> Vertex {
        let t = state.t();
        if t >= self.limit {
            return sample_target_fast(state, rng);
        }
        debug_assert!(self.next_draw > t && self.next_draw <= t + Self::DEPTH as u64);
        let (j, end) = self.ring[t as usize % Self::DEPTH];
        // second stage: the parent entry of a draw halfway down the ring
        // should be cached by now, so fetch the degree it will bump
        let mid = t + Self::DEPTH as u64 / 2;
        if mid < self.next_draw {
            if let (k, Endpoint::Parent) = self.ring[mid as usize % Self::DEPTH] {
                if let Some(p) = state.parent(k as Vertex) {
                    state.prefetch_degree(p);
                }
            }
        }
        if self.next_draw < self.limit {
            self.refill(state, rng);
        }
        match end {
            Endpoint::Child => j as Vertex,
            Endpoint::Parent => state.parent(j as Vertex).expect("edge index within 1..=t"),
        }
    }
}

/// Reference sampler. Needs the maintained `theta` array.
pub fn sample_target_naive<R: Rng + ?Sized>(state: &TreeState, rng: &mut R) -> Result<Vertex> {
    let theta = state.theta_array().ok_or(Error::WeightsNotMaintained)?;
    let r = draw_rank(state.t(), rng);
    Ok(cumulative_select(theta, r))
}

pub fn sample_target_fast<R: Rng + ?Sized>(state: &TreeState, rng: &mut R) -> Vertex {
    let r = draw_rank(state.t(), rng);
    fast_select(state, r)
}

/// One growth step with the chosen sampler; returns the attachment target.
pub fn step<R: Rng + ?Sized>(state: &mut TreeState, rng: &mut R, kind: SamplerKind) -> Result<Vertex> {
    let target = match kind {
        SamplerKind::Naive => sample_target_naive(state, rng)?,
        SamplerKind::Fast => sample_target_fast(state, rng),
    };
    state.attach(target);
    Ok(target)
}
