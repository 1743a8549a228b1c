//! The growing tree and its exact integer weight accounting.
//!
//! At time `t` the tree has vertices `v_0..=v_t` and edges `e_1..=e_t`,
//! where `e_j = {v_j, parent(j)}`. The attachment weight of a vertex is
//! `theta_t(i) = sum_{s=1}^{t} d_s(i)`. Because edge `e_j` contributes one
//! unit of degree at every time `s >= j`, the same quantity is
//! `sum_{j : i in e_j} (t + 1 - j)`, which needs no weight array at all.

use crate::error::{Error, Result};

/// Vertex index. Horizons are capped at [`MAX_HORIZON`], well inside `u32`.
pub type Vertex = u32;

/// Largest supported horizon: `t (t + 1)` must fit in a `u64`.
pub const MAX_HORIZON: u64 = 2_000_000_000;

/// The reference sampler costs `O(t)` per step; beyond this it is useless.
pub const NAIVE_MAX_HORIZON: u64 = 100_000;

/// The sampler reads `parent` and writes `degree` at random positions, so
/// for large horizons TLB misses dominate a step. Transparent huge pages
/// keep the cost per step close to flat.
#[cfg(target_os = "linux")]
fn advise_huge_pages<T>(v: &Vec<T>) {
    const PAGE: usize = 4096;
    const HUGE: usize = 2 << 20;
    let bytes = v.capacity() * std::mem::size_of::<T>();
    if bytes < 2 * HUGE {
        return;
    }
    let start = (v.as_ptr() as usize).next_multiple_of(PAGE);
    let end = (v.as_ptr() as usize + bytes) & !(PAGE - 1);
    // SAFETY: the range lies inside the vector's own allocation, and the
    // advice only changes how the kernel backs the pages.
    unsafe {
        libc::madvise(start as *mut libc::c_void, end - start, libc::MADV_HUGEPAGE);
    }
}

#[cfg(not(target_os = "linux"))]
fn advise_huge_pages<T>(_: &Vec<T>) {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeState {
    t: u64,
    /// `parent[j]` is the vertex `v_j` attached to; `parent[0]` is unused.
    parent: Vec<Vertex>,
    degree: Vec<u32>,
    theta: Option<Vec<u64>>,
}

/// Attachment law `theta_t(i) / (t (t + 1))` as exact integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttachLaw {
    pub weights: Vec<u64>,
    pub denominator: u64,
}

impl AttachLaw {
    pub fn probability(&self, i: usize) -> f64 {
        self.weights[i] as f64 / self.denominator as f64
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.weights.len()).map(|i| self.probability(i)).collect()
    }
}

impl TreeState {
    /// The tree at `t = 1`: `v_1` attached to `v_0`. With `track_weights`
    /// the full `theta` array is maintained (required by the reference
    /// sampler).
    pub fn new(track_weights: bool) -> Self {
        Self::with_capacity(1, track_weights)
    }

    /// Like [`TreeState::new`], reserving room for growth up to `t_max`.
    pub fn with_capacity(t_max: u64, track_weights: bool) -> Self {
        let cap = t_max as usize + 1;
        let mut parent = Vec::with_capacity(cap);
        let mut degree = Vec::with_capacity(cap);
        advise_huge_pages(&parent);
        advise_huge_pages(&degree);
        parent.extend_from_slice(&[0, 0]);
        degree.extend_from_slice(&[1, 1]);
        let theta = track_weights.then(|| {
            let mut w = Vec::with_capacity(cap);
            w.extend_from_slice(&[1, 1]);
            w
        });
        Self { t: 1, parent, degree, theta }
    }

    /// Rebuild a state from a parent sequence (`parents[j - 1]` is the
    /// parent of `v_j`). Returns `None` unless `parents[0] == 0` and every
    /// `parents[j - 1] < j`.
    pub fn from_parents(parents: &[Vertex], track_weights: bool) -> Option<Self> {
        if parents.first() != Some(&0) {
            return None;
        }
        let mut state = Self::with_capacity(parents.len() as u64, track_weights);
        for (j, &p) in parents.iter().enumerate().skip(1) {
            if p as usize > j {
                return None;
            }
            state.attach(p);
        }
        Some(state)
    }

    #[inline]
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn vertex_count(&self) -> usize {
        self.degree.len()
    }

    #[inline]
    pub fn degree(&self, i: Vertex) -> u32 {
        self.degree[i as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    /// Parent of `v_j`, or `None` for the root.
    pub fn parent(&self, j: Vertex) -> Option<Vertex> {
        (j >= 1 && (j as u64) <= self.t).then(|| self.parent[j as usize])
    }

    /// Hints the cache lines an edge-age draw of edge `e_j` will read.
    #[inline]
    pub fn prefetch_edge(&self, j: u64) {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
            let j = j as usize;
            // SAFETY: prefetching never faults and the addresses lie
            // inside the allocations.
            unsafe {
                if j < self.parent.capacity() {
                    _mm_prefetch(self.parent.as_ptr().add(j) as *const i8, _MM_HINT_T0);
                }
                if j < self.degree.capacity() {
                    _mm_prefetch(self.degree.as_ptr().add(j) as *const i8, _MM_HINT_T0);
                }
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        let _ = j;
    }

    #[inline]
    pub fn prefetch_degree(&self, v: Vertex) {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
            // SAFETY: as in `prefetch_edge`.
            unsafe {
                if (v as usize) < self.degree.capacity() {
                    _mm_prefetch(self.degree.as_ptr().add(v as usize) as *const i8, _MM_HINT_T0);
                }
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        let _ = v;
    }

    /// Parent sequence for `v_1..=v_t`.
    pub fn parents(&self) -> &[Vertex] {
        &self.parent[1..]
    }

    pub fn weights_maintained(&self) -> bool {
        self.theta.is_some()
    }

    pub fn theta_array(&self) -> Option<&[u64]> {
        self.theta.as_deref()
    }

    fn check_vertex(&self, i: u64) -> Result<()> {
        if i > self.t {
            Err(Error::VertexOutOfRange { vertex: i, t: self.t })
        } else {
            Ok(())
        }
    }

    /// `theta_t(i)`: read from the maintained array when present, otherwise
    /// summed over incident edges by age.
    pub fn theta_of(&self, i: u64) -> Result<u64> {
        self.check_vertex(i)?;
        Ok(match &self.theta {
            Some(w) => w[i as usize],
            None => self.theta_by_edge_age(i as Vertex),
        })
    }

    /// `sum_{j : i in e_j} (t + 1 - j)`; `O(t)`.
    pub fn theta_by_edge_age(&self, i: Vertex) -> u64 {
        let t = self.t;
        let mut sum = 0;
        if i >= 1 {
            sum += t + 1 - i as u64;
        }
        for j in (i as usize + 1)..=t as usize {
            if self.parent[j] == i {
                sum += t + 1 - j as u64;
            }
        }
        sum
    }

    /// Exact attachment law for the next vertex.
    pub fn attach_law(&self) -> AttachLaw {
        let weights = match &self.theta {
            Some(w) => w.clone(),
            None => self.edge_age_weights(),
        };
        AttachLaw { weights, denominator: self.t * (self.t + 1) }
    }

    /// All `theta_t(i)` from the edge-age identity in one `O(t)` pass.
    pub fn edge_age_weights(&self) -> Vec<u64> {
        let t = self.t;
        let mut w = vec![0u64; self.vertex_count()];
        for j in 1..=t as usize {
            let age = t + 1 - j as u64;
            w[j] += age;
            w[self.parent[j] as usize] += age;
        }
        w
    }

    /// Attach a new vertex `v_{t+1}` to `target` and advance time.
    ///
    /// # Panics
    /// If `target > t` or the horizon would exceed [`MAX_HORIZON`].
    pub fn attach(&mut self, target: Vertex) {
        assert!((target as u64) <= self.t, "target {target} not present at t = {}", self.t);
        assert!(self.t < MAX_HORIZON, "horizon limit reached");
        self.degree[target as usize] += 1;
        self.degree.push(1);
        self.parent.push(target);
        self.t += 1;
        if let Some(theta) = &mut self.theta {
            // theta_{t+1}(i) = theta_t(i) + d_{t+1}(i); the new vertex starts at 0.
            theta.push(0);
            for (w, &d) in theta.iter_mut().zip(&self.degree) {
                *w += d as u64;
            }
        }
    }
}
