//! Reference optimizers used to judge the enhanced search: classical crow
//! search and uniform random search, both with the same evaluation budget
//! and seeding as [`super::optimize`].

use std::error::Error as StdError;

use rand::Rng;

use super::{
    clamp, random_positions, seeded_rng, uniform, EcsaConfig, EcsaError, Evaluator,
    OptimizationResult,
};
use crate::scalar::Real;

/// Classical crow search: crow `i` picks a random crow `j`; if `r >= AP` it
/// moves `u_i + r' * FL * (m_j - u_i)`, otherwise it relocates uniformly at
/// random. `AP` is fixed at `awareness`.
pub fn classical_csa<T, F, E>(
    objective: F,
    config: &EcsaConfig<T>,
    awareness: T,
) -> Result<OptimizationResult<T>, EcsaError>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T, E>,
    E: Into<Box<dyn StdError + Send + Sync>>,
{
    config.validate()?;
    let mut rng = seeded_rng(config.seed);
    let mut positions = random_positions(config, &mut rng);
    let n = positions.len();
    let mut eval = Evaluator {
        config,
        objective,
        evaluations: 0,
    };
    let mut memories = positions.clone();
    let mut memory_fit = Vec::with_capacity(n);
    let mut memory_err = Vec::with_capacity(n);
    for (i, p) in positions.iter().enumerate() {
        let (fit, err, _) = eval.evaluate(p, 0, i, &mut rng)?;
        memory_fit.push(fit);
        memory_err.push(err);
    }
    let best_of = |fits: &[T]| {
        fits.iter()
            .enumerate()
            .fold(0, |b, (i, &f)| if f < fits[b] { i } else { b })
    };
    let mut history = vec![memory_fit[best_of(&memory_fit)]];

    for itr in 0..config.max_iterations {
        for i in 0..n {
            let j = loop {
                let j = rng.gen_range(0..n);
                if j != i {
                    break j;
                }
            };
            positions[i] = if uniform::<T, _>(&mut rng) >= awareness {
                let r: T = uniform(&mut rng);
                positions[i]
                    .iter()
                    .zip(&memories[j])
                    .zip(&config.bounds)
                    .map(|((&u, &m), &b)| clamp(u + r * config.flight_length * (m - u), b))
                    .collect()
            } else {
                config
                    .bounds
                    .iter()
                    .map(|&(lo, hi)| lo + uniform::<T, _>(&mut rng) * (hi - lo))
                    .collect()
            };
        }
        for i in 0..n {
            let (fit, err, _) = eval.evaluate(&positions[i], itr + 1, i, &mut rng)?;
            if fit < memory_fit[i] {
                memories[i] = positions[i].clone();
                memory_fit[i] = fit;
                memory_err[i] = err;
            }
        }
        history.push(memory_fit[best_of(&memory_fit)]);
    }
    let b = best_of(&memory_fit);
    Ok(OptimizationResult {
        best_position: memories[b].clone(),
        best_bits: None,
        best_fitness: memory_fit[b],
        best_error: memory_err[b],
        fitness_history: history,
        seed: config.seed,
        iterations: config.max_iterations,
        evaluations: eval.evaluations,
    })
}

/// Uniform random sampling of the box with [`EcsaConfig::evaluation_budget`]
/// evaluations, reported in batches of one population per "iteration".
pub fn random_search<T, F, E>(objective: F, config: &EcsaConfig<T>) -> Result<OptimizationResult<T>, EcsaError>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T, E>,
    E: Into<Box<dyn StdError + Send + Sync>>,
{
    config.validate()?;
    let mut rng = seeded_rng(config.seed);
    let mut eval = Evaluator {
        config,
        objective,
        evaluations: 0,
    };
    let mut best: Option<(Vec<T>, T, T)> = None;
    let mut history = Vec::with_capacity(config.max_iterations + 1);
    for itr in 0..=config.max_iterations {
        for (i, p) in random_positions(config, &mut rng).into_iter().enumerate() {
            let (fit, err, _) = eval.evaluate(&p, itr, i, &mut rng)?;
            if best.as_ref().is_none_or(|b| fit < b.1) {
                best = Some((p, fit, err));
            }
        }
        history.push(best.as_ref().expect("population is non-empty").1);
    }
    let (best_position, best_fitness, best_error) = best.expect("population is non-empty");
    Ok(OptimizationResult {
        best_position,
        best_bits: None,
        best_fitness,
        best_error,
        fitness_history: history,
        seed: config.seed,
        iterations: config.max_iterations,
        evaluations: eval.evaluations,
    })
}
