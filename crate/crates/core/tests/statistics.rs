//! Sampling-law checks that need many draws.

use srpat_core::determin::mean_degree_exact;
use srpat_core::rng::replica_rng;
use srpat_core::sa::{hit_conditional_mean, martingale_increment};
use srpat_core::sampler::{sample_target_fast, sample_target_naive, step, SamplerKind};
use srpat_core::simulate::degree_path;
use srpat_core::TreeState;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn grown(t: u64, seed: u64) -> TreeState {
    let mut rng = replica_rng(seed, 0);
    let mut s = TreeState::with_capacity(t, true);
    while s.t() < t {
        step(&mut s, &mut rng, SamplerKind::Naive).unwrap();
    }
    s
}

/// Pearson statistic with cells of expected count below 5 pooled.
fn chi_square_p(counts: &[u64], weights: &[u64], n: u64) -> f64 {
    let total: u64 = weights.iter().sum();
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pool_obs, mut pool_exp) = (0.0, 0.0);
    for (&c, &w) in counts.iter().zip(weights) {
        let e = n as f64 * w as f64 / total as f64;
        if e < 5.0 {
            pool_obs += c as f64;
            pool_exp += e;
            continue;
        }
        stat += (c as f64 - e).powi(2) / e;
        cells += 1;
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp;
        cells += 1;
    }
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn fast_and_naive_samplers_pass_chi_square() {
    for (t, seed) in [(100u64, 11u64), (1000, 12)] {
        let s = grown(t, seed);
        let theta = s.theta_array().unwrap().to_vec();
        let n = 1_000_000u64;
        let mut rng = replica_rng(seed, 1);
        let mut fast = vec![0u64; theta.len()];
        let mut naive = vec![0u64; theta.len()];
        for _ in 0..n {
            fast[sample_target_fast(&s, &mut rng) as usize] += 1;
            naive[sample_target_naive(&s, &mut rng).unwrap() as usize] += 1;
        }
        let (pf, pn) = (chi_square_p(&fast, &theta, n), chi_square_p(&naive, &theta, n));
        assert!(pf > 1e-3, "fast sampler at t={t}: p = {pf}");
        assert!(pn > 1e-3, "naive sampler at t={t}: p = {pn}");
    }
}

#[test]
fn martingale_increment_is_centred() {
    // fixed prefix: grow to t = 30, then resample the next step many times
    let s = grown(30, 5);
    let t = s.t();
    let mut rng = replica_rng(5, 9);
    for i in [1u32, 3, 10] {
        let (d, th) = (s.degree(i) as u64, s.theta_of(i as u64).unwrap());
        let n = 10_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| martingale_increment(t, d, th, sample_target_fast(&s, &mut rng) == i))
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let sd = (draws.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        assert!(mean.abs() < 4.0 * sd / (n as f64).sqrt(), "vertex {i}: mean {mean}, sd {sd}");
        let p = th as f64 / (t * (t + 1)) as f64;
        assert!((hit_conditional_mean(t, d, th) - p / (d as f64 + 1.0)).abs() < 1e-15);
    }
}

#[test]
fn monte_carlo_mean_degree_matches_oracle() {
    let (t, reps) = (2000u64, 4000u64);
    for i in [1u32, 5] {
        let finals: Vec<f64> = (0..reps)
            .map(|r| {
                let mut rng = replica_rng(77, r);
                degree_path(t, i, &[t], &mut rng)[0] as f64
            })
            .collect();
        let mean = finals.iter().sum::<f64>() / reps as f64;
        let sd = (finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0)).sqrt();
        let se = sd / (reps as f64).sqrt();
        let exact = mean_degree_exact(i as u64, t);
        assert!((mean - exact).abs() < 4.0 * se, "i={i}: mc {mean} +- {se}, exact {exact}");
    }
}

#[test]
fn attach_frequency_at_t1_is_even() {
    let s = TreeState::new(false);
    let mut rng = replica_rng(3, 0);
    let n = 100_000;
    let zeros = (0..n).filter(|_| sample_target_fast(&s, &mut rng) == 0).count();
    let p = zeros as f64 / n as f64;
    assert!((p - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
}
