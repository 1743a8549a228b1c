//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a flat `Float64Array` of fixed-width rows so the
//! page can plot it without parsing.

use srpat_core::determin::{beta_trajectory, crossover, mean_degree_exact, mean_degree_upper_bound, DEFAULT_CROSSOVER_CAP};
use srpat_core::sampler::SamplerKind;
use srpat_core::simulate::{geometric_grid, simulate_replica, SimConfig};
use wasm_bindgen::prelude::*;

/// Largest horizon accepted from the page; keeps a click under a second.
pub const MAX_DEMO_T: u64 = 2_000_000;
pub const MAX_DEMO_VERTEX: u64 = 1_000;
pub const MAX_DEMO_REPLICAS: u32 = 64;

fn check(name: &str, value: u64, lo: u64, hi: u64) -> Result<(), String> {
    if value < lo || value > hi {
        return Err(format!("{name} must lie in {lo}..={hi}, got {value}"));
    }
    Ok(())
}

/// Rows `(t, beta_t, x_t)` on a geometric grid from `i` to `t_max`, plus
/// the crossover time (or 0 if it lies beyond `t_max`) as the last value.
pub fn beta_rows(i: u64, t_max: u64) -> Result<Vec<f64>, String> {
    check("i", i, 1, MAX_DEMO_VERTEX)?;
    check("t_max", t_max, i + 1, MAX_DEMO_T)?;
    let s = beta_trajectory(i, t_max).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for t in geometric_grid(i, t_max, 1.02) {
        let k = (t - i) as usize;
        out.extend([t as f64, s.values[k], s.fixed_points[k]]);
    }
    out.push(s.crossover.unwrap_or(0) as f64);
    Ok(out)
}

/// Rows `(i, T(i))` for `i = 1..=i_max`.
pub fn crossover_rows(i_max: u64) -> Result<Vec<f64>, String> {
    check("i_max", i_max, 1, MAX_DEMO_VERTEX)?;
    let vertices: Vec<u64> = (1..=i_max).collect();
    let rows = crossover(&vertices, DEFAULT_CROSSOVER_CAP).map_err(|e| e.to_string())?;
    Ok(rows.into_iter().flat_map(|(i, t)| [i as f64, t as f64]).collect())
}

/// Rows `(t, simulated mean degree, exact mean, upper bound)` for one
/// vertex, averaged over `replicas` independent trees.
pub fn growth_rows(vertex: u64, t_max: u64, seed: u64, replicas: u32) -> Result<Vec<f64>, String> {
    check("vertex", vertex, 1, MAX_DEMO_VERTEX)?;
    check("t_max", t_max, vertex.max(2), MAX_DEMO_T)?;
    check("replicas", replicas as u64, 1, MAX_DEMO_REPLICAS as u64)?;
    let mut config = SimConfig::new(t_max, vec![vertex as u32], SamplerKind::Fast, seed, replicas);
    config.snapshots = geometric_grid(vertex.max(2), t_max, 1.15);
    let mut sums = vec![0.0; config.snapshots.len()];
    for r in 0..replicas {
        let out = simulate_replica(&config, r).map_err(|e| e.to_string())?;
        for (s, rec) in sums.iter_mut().zip(&out.trajectories[0].records) {
            *s += rec.degree as f64;
        }
    }
    let mut rows = Vec::with_capacity(4 * sums.len());
    for (&t, s) in config.snapshots.iter().zip(sums) {
        rows.extend([
            t as f64,
            s / replicas as f64,
            mean_degree_exact(vertex, t),
            mean_degree_upper_bound(vertex, t),
        ]);
    }
    Ok(rows)
}

#[wasm_bindgen(js_name = betaCurve)]
pub fn beta_curve(i: u32, t_max: u32) -> Result<Vec<f64>, JsError> {
    beta_rows(i as u64, t_max as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = crossoverCurve)]
pub fn crossover_curve(i_max: u32) -> Result<Vec<f64>, JsError> {
    crossover_rows(i_max as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = degreeGrowth)]
pub fn degree_growth(vertex: u32, t_max: u32, seed: u32, replicas: u32) -> Result<Vec<f64>, JsError> {
    growth_rows(vertex as u64, t_max as u64, seed as u64, replicas).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use srpat_core::determin::PHI;

    #[test]
    fn beta_rows_are_triples_ending_in_crossover() {
        let rows = beta_rows(2, 10_000).unwrap();
        assert_eq!(rows.len() % 3, 1);
        assert_eq!(*rows.last().unwrap(), 6.0);
        assert_eq!(rows[0], 2.0);
        let last = &rows[rows.len() - 4..rows.len() - 1];
        assert_eq!(last[0], 10_000.0);
        assert!((last[1] - PHI).abs() < 1e-2);
    }

    #[test]
    fn crossover_rows_start_at_one() {
        let rows = crossover_rows(20).unwrap();
        assert_eq!(rows.len(), 40);
        assert_eq!(&rows[..2], &[1.0, 1.0]);
        assert_eq!(&rows[2..4], &[2.0, 6.0]);
    }

    #[test]
    fn growth_is_deterministic_and_bounded() {
        let a = growth_rows(1, 5_000, 7, 4).unwrap();
        assert_eq!(a, growth_rows(1, 5_000, 7, 4).unwrap());
        for row in a.chunks(4) {
            assert!(row[2] <= row[3] * (1.0 + 1e-12));
            assert!(row[1] >= 1.0);
        }
    }

    #[test]
    fn rejects_out_of_range_input() {
        assert!(beta_rows(0, 100).is_err());
        assert!(beta_rows(5, 5).is_err());
        assert!(crossover_rows(MAX_DEMO_VERTEX + 1).is_err());
        assert!(growth_rows(1, MAX_DEMO_T + 1, 0, 1).is_err());
        assert!(growth_rows(1, 100, 0, 0).is_err());
    }
}
