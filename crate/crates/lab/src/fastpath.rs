//! Double-precision maximal transform over all dyadic subcubes, for benchmarks only.

use std::time::Instant;

use dyvar_core::Shape;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::rng_for;

/// `max(f(x), max_{x ∈ Q} f_Q)`: averages bottom-up, then a top-down running maximum.
pub fn maximal_transform_f64(shape: Shape, values: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), shape.cells(), "value count must match the shape");
    let k = shape.k;
    let mut averages: Vec<Vec<f64>> = vec![values.to_vec()];
    let fan = (1usize << shape.d) as f64;
    for level in 0..k {
        let pm = shape.parent_map(level);
        let mut up = vec![0.0; shape.cubes_at_level(level + 1)];
        for (i, &p) in pm.iter().enumerate() {
            up[p] += averages[level as usize][i];
        }
        up.iter_mut().for_each(|v| *v /= fan);
        averages.push(up);
    }
    let mut running = averages[k as usize].clone();
    for level in (0..k).rev() {
        let pm = shape.parent_map(level);
        let avgs = &averages[level as usize];
        running = pm
            .iter()
            .zip(avgs)
            .map(|(&p, &a)| running[p].max(a))
            .collect();
    }
    running
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub d: usize,
    #[serde(rename = "K")]
    pub k: u32,
    pub cells: usize,
    pub runs: usize,
    /// Fastest observed run.
    pub seconds: f64,
}

fn random_values(shape: Shape, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed);
    (0..shape.cells()).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Times the fast path, repeating until at least `min_runs` runs and `budget` seconds.
pub fn bench(shape: Shape, min_runs: usize, budget: f64) -> BenchReport {
    let values = random_values(shape, 0x5eed);
    let mut best = f64::INFINITY;
    let mut runs = 0;
    let start = Instant::now();
    while runs < min_runs || start.elapsed().as_secs_f64() < budget {
        let t = Instant::now();
        let out = maximal_transform_f64(shape, &values);
        best = best.min(t.elapsed().as_secs_f64());
        std::hint::black_box(out);
        runs += 1;
    }
    BenchReport {
        d: shape.d,
        k: shape.k,
        cells: shape.cells(),
        runs,
        seconds: best,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub small: BenchReport,
    pub large: BenchReport,
    pub measured_ratio: f64,
    /// `N_large (K_large + 1) / (N_small (K_small + 1))`.
    pub model_ratio: f64,
    /// `measured / model` lies in `[1/tolerance, tolerance]`.
    pub within_tolerance: bool,
}

pub fn scaling_check(d: usize, k_small: u32, k_large: u32, tolerance: f64) -> dyvar_core::Result<ScalingReport> {
    let small = bench(Shape::new(d, k_small)?, 20, 0.3);
    let large = bench(Shape::new(d, k_large)?, 3, 0.3);
    let measured_ratio = large.seconds / small.seconds;
    let work = |b: &BenchReport| b.cells as f64 * f64::from(b.k + 1);
    let model_ratio = work(&large) / work(&small);
    let q = measured_ratio / model_ratio;
    Ok(ScalingReport {
        within_tolerance: q >= 1.0 / tolerance && q <= tolerance,
        small,
        large,
        measured_ratio,
        model_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyvar_core::{maximal_transform, CubeFamily, GridFunction};

    #[test]
    fn agrees_with_exact_path_on_integer_data() {
        for (d, k) in [(1, 4), (2, 3), (3, 2)] {
            let shape = Shape::new(d, k).unwrap();
            let mut rng = rng_for(d as u64 * 10 + k as u64);
            let ints: Vec<i64> = (0..shape.cells()).map(|_| rng.gen_range(-9..=9)).collect();
            let exact = maximal_transform(
                &GridFunction::from_integers(shape, &ints).unwrap(),
                &CubeFamily::all(),
            )
            .unwrap();
            let floats: Vec<f64> = ints.iter().map(|&v| v as f64).collect();
            let fast = maximal_transform_f64(shape, &floats);
            for (a, b) in fast.iter().zip(exact.values()) {
                assert_eq!(*a, dyvar_core::exact::to_f64(b));
            }
        }
    }
}
