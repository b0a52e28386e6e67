//! Enhanced crow search: a population optimizer with rank-dependent
//! awareness probability, ring-neighbourhood following and moves guided by
//! the global best.
//!
//! Per iteration each crow draws `r ~ U[0,1)`. When `r >= DAP(rank)` it
//! follows its neighbourhood: every coordinate moves towards the remembered
//! position of a neighbour drawn independently for that coordinate. Otherwise
//! it jumps to `best ± C1 * C2` with `C1` decaying from 2 towards 0 over the
//! run. Positions are clamped to the box after every move; memories only
//! change on improvement.

pub mod baseline;

use std::error::Error as StdError;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum EcsaError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("rank {rank} outside 1..={population}")]
    RankOutOfRange { rank: usize, population: usize },
    #[error("objective failed at iteration {iteration}, crow {crow}: {source}")]
    Objective {
        iteration: usize,
        crow: usize,
        #[source]
        source: Box<dyn StdError + Send + Sync>,
    },
    #[error("objective returned NaN at iteration {iteration}, crow {crow}")]
    NotANumber { iteration: usize, crow: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    #[default]
    Continuous,
    /// Positions are passed through a sigmoid threshold before evaluation and
    /// the fitness penalizes the selected-subset fraction.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
#[serde(default)]
pub struct EcsaConfig<T> {
    pub population_size: usize,
    pub max_iterations: usize,
    pub flight_length: T,
    pub ap_min: T,
    pub ap_max: T,
    /// Per-dimension `(lower, upper)` box.
    pub bounds: Vec<(T, T)>,
    /// Weight of the error term in the fitness.
    pub beta: T,
    pub seed: u64,
    pub mode: SearchMode,
    pub binary_threshold: T,
    /// Draw a fresh threshold per element instead of using `binary_threshold`.
    pub stochastic_threshold: bool,
    /// Neighbours on each side of a crow in the shuffled ring.
    pub neighborhood_reach: usize,
}

impl<T: Real> Default for EcsaConfig<T> {
    fn default() -> Self {
        Self {
            population_size: 10,
            max_iterations: 100,
            flight_length: T::lit(2.0),
            ap_min: T::lit(0.1),
            ap_max: T::lit(0.8),
            bounds: Vec::new(),
            beta: T::lit(0.9),
            seed: 0,
            mode: SearchMode::Continuous,
            binary_threshold: T::lit(0.5),
            stochastic_threshold: false,
            neighborhood_reach: 2,
        }
    }
}

impl<T: Real> EcsaConfig<T> {
    /// Default settings over a uniform box.
    pub fn with_box(dim: usize, lower: T, upper: T) -> Self {
        Self {
            bounds: vec![(lower, upper); dim],
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<(), EcsaError> {
        let fail = |m: &str| Err(EcsaError::InvalidConfig(m.to_string()));
        let unit = |x: T| x >= T::zero() && x <= T::one();
        if self.population_size < 2 {
            return fail("population size must be at least 2");
        }
        if self.max_iterations < 1 {
            return fail("at least one iteration is required");
        }
        if !(unit(self.ap_min) && unit(self.ap_max) && self.ap_min <= self.ap_max) {
            return fail("need 0 <= ap_min <= ap_max <= 1");
        }
        if !unit(self.beta) {
            return fail("beta must lie in [0, 1]");
        }
        if !unit(self.binary_threshold) {
            return fail("binary threshold must lie in [0, 1]");
        }
        if !self.flight_length.is_finite() {
            return fail("flight length must be finite");
        }
        if self.bounds.is_empty() {
            return fail("at least one dimension is required");
        }
        if self
            .bounds
            .iter()
            .any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi))
        {
            return fail("every bound needs finite lower < upper");
        }
        Ok(())
    }

    /// Objective evaluations consumed by one run.
    pub fn evaluation_budget(&self) -> usize {
        self.population_size * (self.max_iterations + 1)
    }
}

/// Deterministic RNG for a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed of the `run`-th independent run under a master seed.
pub fn derive_run_seed(master: u64, run: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(run + 1);
    rng.next_u64()
}

pub(crate) fn uniform<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.gen::<f64>())
}

pub(crate) fn clamp<T: Real>(x: T, (lo, hi): (T, T)) -> T {
    x.max(lo).min(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CrowPopulation<T> {
    pub positions: Vec<Vec<T>>,
    pub memories: Vec<Vec<T>>,
    /// Fitness of the current positions.
    pub fitnesses: Vec<T>,
    /// Fitness of the remembered positions.
    pub memory_fitnesses: Vec<T>,
    /// Objective value of the remembered positions.
    pub memory_errors: Vec<T>,
    /// 1-based ranks by current fitness; rank 1 is the best crow.
    pub ranks: Vec<usize>,
    pub iteration: usize,
}

impl<T: Real> CrowPopulation<T> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Index of the crow holding the best memory (lowest index on ties).
    pub fn best_index(&self) -> usize {
        self.memory_fitnesses
            .iter()
            .enumerate()
            .fold(0, |best, (i, &f)| if f < self.memory_fitnesses[best] { i } else { best })
    }

    fn rerank(&mut self) {
        self.ranks = ranks_of(&self.fitnesses);
    }
}

/// 1-based ranks by ascending value; ties keep index order.
pub fn ranks_of<T: Real>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

pub(crate) fn random_positions<T: Real, R: Rng + ?Sized>(
    config: &EcsaConfig<T>,
    rng: &mut R,
) -> Vec<Vec<T>> {
    (0..config.population_size)
        .map(|_| {
            config
                .bounds
                .iter()
                .map(|&(lo, hi)| clamp(lo + uniform::<T, _>(rng) * (hi - lo), (lo, hi)))
                .collect()
        })
        .collect()
}

/// Uniform random positions in the box, drawn from the config's seed.
/// Memories start at the positions; fitness fields are unset (infinite) until
/// evaluated.
pub fn init_population<T: Real>(config: &EcsaConfig<T>) -> Result<CrowPopulation<T>, EcsaError> {
    config.validate()?;
    let mut rng = seeded_rng(config.seed);
    Ok(unevaluated_population(random_positions(config, &mut rng)))
}

fn unevaluated_population<T: Real>(positions: Vec<Vec<T>>) -> CrowPopulation<T> {
    let n = positions.len();
    CrowPopulation {
        memories: positions.clone(),
        positions,
        fitnesses: vec![T::infinity(); n],
        memory_fitnesses: vec![T::infinity(); n],
        memory_errors: vec![T::infinity(); n],
        ranks: (1..=n).collect(),
        iteration: 0,
    }
}

/// `DAP = ap_min + (ap_max - ap_min) * rank / N_p`.
pub fn dynamic_awareness_probability<T: Real>(
    rank: usize,
    config: &EcsaConfig<T>,
) -> Result<T, EcsaError> {
    let n = config.population_size;
    if rank < 1 || rank > n {
        return Err(EcsaError::RankOutOfRange { rank, population: n });
    }
    let frac = T::from_usize_lossy(rank) / T::from_usize_lossy(n);
    Ok(config.ap_min + (config.ap_max - config.ap_min) * frac)
}

/// Ring neighbourhoods over a shuffled crow order: each crow sees `reach`
/// crows on either side, itself excluded.
pub fn ring_neighborhoods<R: Rng + ?Sized>(n: usize, reach: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = vec![Vec::new(); n];
    for (pos, &crow) in order.iter().enumerate() {
        let mut hood = Vec::with_capacity(2 * reach);
        for step in 1..=reach {
            for p in [(pos + step) % n, (pos + n - step % n) % n] {
                let other = order[p];
                if other != crow && !hood.contains(&other) {
                    hood.push(other);
                }
            }
        }
        out[crow] = hood;
    }
    out
}

/// Neighbourhood-following move: for every coordinate `s`,
/// `u_s + FL * (n_s - u_s)` where `n_s` is coordinate `s` of the position of a
/// neighbour drawn for that coordinate. Clamped to `bounds`.
pub fn local_neighborhood_update<T: Real, R: Rng + ?Sized>(
    crow_index: usize,
    population: &CrowPopulation<T>,
    neighborhood: &[usize],
    flight_length: T,
    bounds: &[(T, T)],
    rng: &mut R,
) -> Vec<T> {
    let current = &population.positions[crow_index];
    current
        .iter()
        .enumerate()
        .map(|(s, &u)| {
            let target = match neighborhood.choose(rng) {
                Some(&j) => population.positions[j][s],
                None => u,
            };
            clamp(u + flight_length * (target - u), bounds[s])
        })
        .collect()
}

/// `C1 = 2 exp(-(4 itr / max_itr)^2)`.
pub fn c1<T: Real>(itr: usize, max_itr: usize) -> T {
    let ratio = T::lit(4.0) * T::from_usize_lossy(itr) / T::from_usize_lossy(max_itr.max(1));
    T::lit(2.0) * (-(ratio * ratio)).exp()
}

/// Best-guided move: one direction draw per crow, then
/// `best_d ± C1 * C2_d` with independent `C2_d ~ U[0,1)`. Clamped to `bounds`.
pub fn global_update<T: Real, R: Rng + ?Sized>(
    best: &[T],
    itr: usize,
    max_itr: usize,
    bounds: &[(T, T)],
    rng: &mut R,
) -> Vec<T> {
    let step = c1::<T>(itr, max_itr);
    let sign = if rng.gen::<f64>() < 0.5 { T::one() } else { -T::one() };
    best.iter()
        .zip(bounds)
        .map(|(&b, &bound)| clamp(b + sign * step * uniform::<T, _>(rng), bound))
        .collect()
}

pub fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// How a continuous position becomes a bit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold<T> {
    Fixed(T),
    /// A fresh uniform threshold for every element.
    Stochastic,
}

/// Bit `d` is set when `sigmoid(u_d) >= sigma`.
pub fn binarize<T: Real, R: Rng + ?Sized>(
    position: &[T],
    threshold: Threshold<T>,
    rng: &mut R,
) -> Vec<bool> {
    position
        .iter()
        .map(|&u| {
            let sigma = match threshold {
                Threshold::Fixed(s) => s,
                Threshold::Stochastic => uniform(rng),
            };
            sigmoid(u) >= sigma
        })
        .collect()
}

/// `beta * err + (1 - beta) * penalty`, where the penalty is 1 for
/// continuous search and the selected-subset fraction in binary mode.
pub fn fitness<T: Real>(err: T, beta: T, subset_fraction: Option<T>) -> T {
    beta * err + (T::one() - beta) * subset_fraction.unwrap_or_else(T::one)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct OptimizationResult<T> {
    pub best_position: Vec<T>,
    /// The thresholded best position in binary mode.
    pub best_bits: Option<Vec<bool>>,
    pub best_fitness: T,
    /// Objective value at the best position.
    pub best_error: T,
    /// Global-best fitness after initialization and after every iteration.
    pub fitness_history: Vec<T>,
    pub seed: u64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Evaluates positions through the objective, applying the binary transform
/// when configured.
pub(crate) struct Evaluator<'a, T, F> {
    pub config: &'a EcsaConfig<T>,
    pub objective: F,
    pub evaluations: usize,
}

impl<T, F, E> Evaluator<'_, T, F>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T, E>,
    E: Into<Box<dyn StdError + Send + Sync>>,
{
    /// Returns `(fitness, error, bits)`.
    pub fn evaluate<R: Rng + ?Sized>(
        &mut self,
        position: &[T],
        iteration: usize,
        crow: usize,
        rng: &mut R,
    ) -> Result<(T, T, Option<Vec<bool>>), EcsaError> {
        self.evaluations += 1;
        let (err, bits, fraction) = match self.config.mode {
            SearchMode::Continuous => (self.call(position, iteration, crow)?, None, None),
            SearchMode::Binary => {
                let threshold = if self.config.stochastic_threshold {
                    Threshold::Stochastic
                } else {
                    Threshold::Fixed(self.config.binary_threshold)
                };
                let bits = binarize(position, threshold, rng);
                let as_real: Vec<T> = bits.iter().map(|&b| if b { T::one() } else { T::zero() }).collect();
                let chosen = bits.iter().filter(|&&b| b).count();
                let fraction = T::from_usize_lossy(chosen) / T::from_usize_lossy(bits.len());
                (self.call(&as_real, iteration, crow)?, Some(bits), Some(fraction))
            }
        };
        Ok((fitness(err, self.config.beta, fraction), err, bits))
    }

    fn call(&mut self, x: &[T], iteration: usize, crow: usize) -> Result<T, EcsaError> {
        let err = (self.objective)(x).map_err(|e| EcsaError::Objective {
            iteration,
            crow,
            source: e.into(),
        })?;
        if err.is_nan() {
            return Err(EcsaError::NotANumber { iteration, crow });
        }
        Ok(err)
    }
}

/// Minimizes `objective` over the configured box.
///
/// In binary mode the objective receives 0/1 vectors. Returning `Err` aborts
/// the run; `+inf` is accepted as a worst-possible value.
pub fn optimize<T, F, E>(objective: F, config: &EcsaConfig<T>) -> Result<OptimizationResult<T>, EcsaError>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T, E>,
    E: Into<Box<dyn StdError + Send + Sync>>,
{
    optimize_seeded_with(objective, config, &[])
}

/// Like [`optimize`], with `injected` positions replacing the first crows of
/// the random initial population (clamped to the box).
pub fn optimize_seeded_with<T, F, E>(
    objective: F,
    config: &EcsaConfig<T>,
    injected: &[Vec<T>],
) -> Result<OptimizationResult<T>, EcsaError>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T, E>,
    E: Into<Box<dyn StdError + Send + Sync>>,
{
    config.validate()?;
    let dim = config.dim();
    if injected.len() > config.population_size || injected.iter().any(|p| p.len() != dim) {
        return Err(EcsaError::InvalidConfig(
            "injected positions must fit the population and dimension".into(),
        ));
    }
    let mut rng = seeded_rng(config.seed);
    let mut positions = random_positions(config, &mut rng);
    for (slot, p) in positions.iter_mut().zip(injected) {
        *slot = p.iter().zip(&config.bounds).map(|(&x, &b)| clamp(x, b)).collect();
    }
    let mut pop = unevaluated_population(positions);
    let mut eval = Evaluator {
        config,
        objective,
        evaluations: 0,
    };
    let mut bits_of_memory: Vec<Option<Vec<bool>>> = vec![None; config.population_size];
    for i in 0..pop.len() {
        let (fit, err, bits) = eval.evaluate(&pop.positions[i], 0, i, &mut rng)?;
        pop.fitnesses[i] = fit;
        pop.memory_fitnesses[i] = fit;
        pop.memory_errors[i] = err;
        bits_of_memory[i] = bits;
    }
    pop.rerank();

    let mut history = Vec::with_capacity(config.max_iterations + 1);
    history.push(pop.memory_fitnesses[pop.best_index()]);
    let mut neighborhoods = ring_neighborhoods(pop.len(), config.neighborhood_reach, &mut rng);

    for itr in 0..config.max_iterations {
        pop.iteration = itr;
        let best = pop.memories[pop.best_index()].clone();
        let mut next = Vec::with_capacity(pop.len());
        for j in 0..pop.len() {
            let dap = dynamic_awareness_probability(pop.ranks[j], config)?;
            let moved = if uniform::<T, _>(&mut rng) >= dap {
                local_neighborhood_update(
                    j,
                    &pop,
                    &neighborhoods[j],
                    config.flight_length,
                    &config.bounds,
                    &mut rng,
                )
            } else {
                global_update(&best, itr, config.max_iterations, &config.bounds, &mut rng)
            };
            next.push(moved);
        }
        pop.positions = next;
        for j in 0..pop.len() {
            let (fit, err, bits) = eval.evaluate(&pop.positions[j], itr + 1, j, &mut rng)?;
            pop.fitnesses[j] = fit;
            if fit < pop.memory_fitnesses[j] {
                pop.memories[j] = pop.positions[j].clone();
                pop.memory_fitnesses[j] = fit;
                pop.memory_errors[j] = err;
                bits_of_memory[j] = bits;
            }
        }
        pop.rerank();
        history.push(pop.memory_fitnesses[pop.best_index()]);
        neighborhoods = ring_neighborhoods(pop.len(), config.neighborhood_reach, &mut rng);
    }

    let b = pop.best_index();
    Ok(OptimizationResult {
        best_position: pop.memories[b].clone(),
        best_bits: bits_of_memory[b].clone(),
        best_fitness: pop.memory_fitnesses[b],
        best_error: pop.memory_errors[b],
        fitness_history: history,
        seed: config.seed,
        iterations: config.max_iterations,
        evaluations: eval.evaluations,
    })
}
