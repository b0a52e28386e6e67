//! Seeded comparison of the enhanced crow search against classical crow
//! search and random search on standard test functions.

use std::convert::Infallible;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecsa::baseline::{classical_csa, random_search};
use crate::ecsa::{derive_run_seed, optimize, EcsaConfig, EcsaError};

/// Awareness probability of the classical crow search baseline.
pub const CLASSICAL_AWARENESS: f64 = 0.1;

/// Default benchmark budget. The decaying global step needs a few hundred
/// iterations before it stops jumping between Rastrigin basins.
pub const BENCH_POPULATION: usize = 30;
pub const BENCH_ITERATIONS: usize = 300;

/// `base` with the benchmark population and iteration budget.
pub fn bench_template(base: &EcsaConfig<f64>, population: usize, iterations: usize) -> EcsaConfig<f64> {
    EcsaConfig {
        population_size: population,
        max_iterations: iterations,
        ..base.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    Sphere,
    Rastrigin,
}

impl TestFunction {
    pub const ALL: [TestFunction; 2] = [TestFunction::Sphere, TestFunction::Rastrigin];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Sphere => "sphere",
            TestFunction::Rastrigin => "rastrigin",
        }
    }

    /// Conventional search box per coordinate.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            TestFunction::Sphere => (-5.0, 5.0),
            TestFunction::Rastrigin => (-5.12, 5.12),
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Sphere => sphere(x),
            TestFunction::Rastrigin => rastrigin(x),
        }
    }
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    let tau = std::f64::consts::TAU;
    10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (tau * v).cos()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ecsa,
    ClassicalCsa,
    RandomSearch,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ecsa, Algorithm::ClassicalCsa, Algorithm::RandomSearch];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ecsa => "ecsa",
            Algorithm::ClassicalCsa => "csa",
            Algorithm::RandomSearch => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRun {
    pub function: TestFunction,
    pub algorithm: Algorithm,
    pub run: usize,
    pub seed: u64,
    pub best_value: f64,
    pub evaluations: usize,
    pub fitness_history: Vec<f64>,
}

/// `runs` independent runs; run `r` uses `derive_run_seed(master_seed, r)`
/// whatever the algorithm, so algorithms are compared on equal seeds and
/// budgets. `template` supplies everything but the box and seed.
pub fn bench_runs(
    function: TestFunction,
    algorithm: Algorithm,
    template: &EcsaConfig<f64>,
    dim: usize,
    runs: usize,
    master_seed: u64,
) -> Result<Vec<BenchRun>, EcsaError> {
    let (lo, hi) = function.bounds();
    (0..runs)
        .into_par_iter()
        .map(|run| {
            let config = EcsaConfig {
                bounds: vec![(lo, hi); dim],
                seed: derive_run_seed(master_seed, run as u64),
                ..template.clone()
            };
            let objective = |x: &[f64]| Ok::<_, Infallible>(function.eval(x));
            let res = match algorithm {
                Algorithm::Ecsa => optimize(objective, &config)?,
                Algorithm::ClassicalCsa => classical_csa(objective, &config, CLASSICAL_AWARENESS)?,
                Algorithm::RandomSearch => random_search(objective, &config)?,
            };
            Ok(BenchRun {
                function,
                algorithm,
                run,
                seed: config.seed,
                best_value: res.best_error,
                evaluations: res.evaluations,
                fitness_history: res.fitness_history,
            })
        })
        .collect()
}

/// Median, averaging the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functions_at_optimum() {
        assert_eq!(sphere(&[0.0; 5]), 0.0);
        assert_eq!(rastrigin(&[0.0; 5]), 0.0);
        assert!((rastrigin(&[1.0]) - 1.0).abs() < 1e-12);
        assert_eq!(sphere(&[3.0, 4.0]), 25.0);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn equal_budgets_and_seeds() {
        let template = EcsaConfig {
            max_iterations: 5,
            ..EcsaConfig::default()
        };
        let a = bench_runs(TestFunction::Sphere, Algorithm::Ecsa, &template, 3, 4, 1).unwrap();
        let b = bench_runs(TestFunction::Sphere, Algorithm::RandomSearch, &template, 3, 4, 1).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.evaluations, y.evaluations);
        }
    }
}
