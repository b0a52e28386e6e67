//! End-to-end risk evaluation: DEMATEL weights, an ECSA-tuned ANFIS for
//! per-factor potential scores, IF-TOPSIS ranking and the aggregate score.

use std::fmt::Display;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anfis::{
    apply_parameter_scaling, fit_consequents_least_squares, init_fis, rmse, AnfisError, AnfisModel, Sample,
};
use crate::data::catalog::numeric_column;
use crate::data::{
    map_ratings_to_features, ColumnSource, CriteriaCatalog, DataError, DatasetFormat, FeatureMapping,
    MappingConfig, ProjectRecord, RiskDirection, DEFAULT_CRITERIA,
};
use crate::dematel::{aggregate_responses, analyze, DematelResult, JudgmentMatrix};
use crate::ecsa::{derive_run_seed, optimize_seeded_with, seeded_rng, EcsaConfig};
use crate::fuzzy::{IntuitionisticFuzzyValue, LinguisticScale};
use crate::linalg::Matrix;
use crate::topsis::{evaluate, weighted_if_matrix, CriterionKind, IfDecisionMatrix};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage `{stage}`: {source}")]
    Data {
        stage: &'static str,
        #[source]
        source: DataError,
    },
    #[error("stage `{stage}`: {message}")]
    Numerical { stage: &'static str, message: String },
}

fn numerical<E: Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Numerical {
        stage,
        message: e.to_string(),
    }
}

fn data(stage: &'static str) -> impl Fn(DataError) -> PipelineError {
    move |source| PipelineError::Data { stage, source }
}

/// Range searched for the premise scaling coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CoefficientRange {
    /// `[10^-delta, 10^delta]`: magnitudes change, signs never do.
    Magnitude { delta: f64 },
    /// `[-bound, bound]`.
    Symmetric { bound: f64 },
}

impl Default for CoefficientRange {
    fn default() -> Self {
        CoefficientRange::Magnitude { delta: 1.0 }
    }
}

impl CoefficientRange {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            CoefficientRange::Magnitude { delta } => (10f64.powf(-delta), 10f64.powf(delta)),
            CoefficientRange::Symmetric { bound } => (-bound, bound),
        }
    }

    fn validate(&self) -> Result<(), PipelineError> {
        let ok = match *self {
            CoefficientRange::Magnitude { delta } => delta > 0.0 && delta.is_finite(),
            CoefficientRange::Symmetric { bound } => bound >= 1.0 && bound.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(PipelineError::Config(
                "coefficient range must contain 1 (delta > 0, bound >= 1)".into(),
            ))
        }
    }
}

/// Settings for one ANFIS tuning: the optimizer's `seed` and `bounds` are
/// replaced per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuningConfig {
    pub cluster_radius: f64,
    pub ecsa: EcsaConfig<f64>,
    pub range: CoefficientRange,
    pub runs: usize,
    pub seed: u64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            cluster_radius: 0.5,
            ecsa: EcsaConfig::default(),
            range: CoefficientRange::default(),
            runs: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Paths are resolved relative to the configuration file.
    pub dataset: Option<PathBuf>,
    pub dataset_format: Option<DatasetFormat>,
    pub judgments: Option<PathBuf>,
    /// Scale for linguistic judgments; the five-level default when absent.
    pub scale: Option<LinguisticScale<f64>>,
    /// Criterion codes, in judgment-matrix order.
    pub criteria: Vec<String>,
    pub mapping: MappingConfig,
    /// Column used as the risk-magnitude target, min-max scaled over the
    /// dataset.
    pub target: ColumnSource,
    pub cluster_radius: f64,
    pub ecsa: EcsaConfig<f64>,
    pub coefficient_range: CoefficientRange,
    pub runs: usize,
    pub split_fraction: f64,
    pub folds: usize,
    pub seed: u64,
    /// Per-criterion TOPSIS kinds; all benefit when absent.
    pub criteria_kinds: Option<Vec<CriterionKind>>,
    /// Explicit ANFIS inputs, one per criterion, replacing the default probes.
    pub factor_inputs: Option<Vec<Vec<f64>>>,
    /// Keep per-iteration fitness histories of the final tuning in the report.
    pub record_histories: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            dataset_format: None,
            judgments: None,
            scale: None,
            criteria: DEFAULT_CRITERIA.iter().map(|c| c.to_string()).collect(),
            mapping: MappingConfig::default(),
            target: ColumnSource::new("act_effort", true),
            // In thirteen normalized dimensions a radius of 0.5 makes every
            // training project its own rule.
            cluster_radius: 1.5,
            ecsa: EcsaConfig::default(),
            coefficient_range: CoefficientRange::default(),
            runs: 20,
            split_fraction: 0.7,
            folds: 3,
            seed: 0,
            criteria_kinds: None,
            factor_inputs: None,
            record_histories: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: &str| Err(PipelineError::Config(m.to_string()));
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return fail("split fraction must lie strictly between 0 and 1");
        }
        if self.folds < 2 {
            return fail("at least two folds are required");
        }
        if self.runs == 0 {
            return fail("at least one optimizer run is required");
        }
        if !(self.cluster_radius > 0.0 && self.cluster_radius.is_finite()) {
            return fail("cluster radius must be positive");
        }
        if self.criteria.is_empty() {
            return fail("no criteria selected");
        }
        if let Some(k) = &self.criteria_kinds {
            if k.len() != self.criteria.len() {
                return fail("criteria_kinds must have one entry per criterion");
            }
        }
        self.coefficient_range.validate()?;
        let mut probe = self.ecsa.clone();
        probe.bounds = vec![self.coefficient_range.bounds()];
        probe
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn tuning(&self, seed: u64) -> TuningConfig {
        TuningConfig {
            cluster_radius: self.cluster_radius,
            ecsa: self.ecsa.clone(),
            range: self.coefficient_range,
            runs: self.runs,
            seed,
        }
    }

    pub fn scale(&self) -> LinguisticScale<f64> {
        self.scale.clone().unwrap_or_else(LinguisticScale::dematel_default)
    }
}

/// Aggregates the respondents and runs DEMATEL.
pub fn derive_weights(respondent_matrices: &[JudgmentMatrix<f64>]) -> Result<DematelResult<f64>, PipelineError> {
    let s = aggregate_responses(respondent_matrices).map_err(numerical("dematel"))?;
    analyze(&s).map_err(numerical("dematel"))
}

fn shuffled<R: Clone>(records: &[R], seed: u64) -> Vec<R> {
    let mut out = records.to_vec();
    out.shuffle(&mut seeded_rng(seed));
    out
}

/// Seeded shuffle, then the first `floor(n * fraction)` records train.
pub fn split_train_test<R: Clone>(
    records: &[R],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<R>, Vec<R>), PipelineError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(PipelineError::Config(format!(
            "split fraction {fraction} outside (0, 1)"
        )));
    }
    if records.is_empty() {
        return Err(PipelineError::Data {
            stage: "split",
            source: DataError::Empty,
        });
    }
    // The small slack keeps products like 0.7 * 10 from flooring to 6.
    let n_train = (records.len() as f64 * fraction + 1e-9).floor() as usize;
    if n_train == 0 {
        return Err(PipelineError::Config(format!(
            "{} records leave no training data at fraction {fraction}",
            records.len()
        )));
    }
    let mut all = shuffled(records, seed);
    let test = all.split_off(n_train);
    Ok((all, test))
}

/// Seeded shuffle into `k` folds whose sizes differ by at most one; the
/// first `n mod k` folds hold the extra record.
pub fn cv_folds<R: Clone>(records: &[R], k: usize, seed: u64) -> Result<Vec<Vec<R>>, PipelineError> {
    if k < 2 {
        return Err(PipelineError::Config("at least two folds are required".into()));
    }
    if records.len() < k {
        return Err(PipelineError::Config(format!(
            "{} records cannot fill {k} folds",
            records.len()
        )));
    }
    let all = shuffled(records, seed);
    let (base, extra) = (all.len() / k, all.len() % k);
    let mut folds = Vec::with_capacity(k);
    let mut rest = all.as_slice();
    for i in 0..k {
        let (head, tail) = rest.split_at(base + usize::from(i < extra));
        folds.push(head.to_vec());
        rest = tail;
    }
    Ok(folds)
}

/// Rotation of folds into `(train, test)` pairs: fold `i` tests, the others
/// train.
pub fn fold_pairs<R: Clone>(folds: &[Vec<R>]) -> Vec<(Vec<R>, Vec<R>)> {
    (0..folds.len())
        .map(|i| {
            let train = folds
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, f)| f.iter().cloned())
                .collect();
            (train, folds[i].clone())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub run: usize,
    pub seed: u64,
    pub best_fitness: f64,
    pub train_rmse: f64,
    /// `None` when the tuned model cannot be evaluated on the test data.
    pub test_rmse: Option<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fitness_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningOutcome {
    pub base_model: AnfisModel<f64>,
    pub model: AnfisModel<f64>,
    pub coefficients: Vec<f64>,
    pub base_train_rmse: f64,
    pub train_rmse: f64,
    pub test_rmse: Option<f64>,
    pub selected_run: usize,
    pub runs: Vec<RunStats>,
}

/// Scales the premises of `base` and refits the consequents.
pub fn scaled_refit(
    base: &AnfisModel<f64>,
    coefficients: &[f64],
    train: &[Sample<f64>],
) -> Result<AnfisModel<f64>, AnfisError> {
    let (scaled, _) = apply_parameter_scaling(base, coefficients)?;
    Ok(fit_consequents_least_squares(&scaled, train)?.0)
}

fn scaled_rmse(base: &AnfisModel<f64>, u: &[f64], train: &[Sample<f64>]) -> Result<f64, AnfisError> {
    match scaled_refit(base, u, train).and_then(|m| rmse(&m, train)) {
        Ok(e) => Ok(e),
        Err(AnfisError::DegenerateActivation { .. } | AnfisError::Linalg(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

fn finite_rmse(model: &AnfisModel<f64>, data: &[Sample<f64>]) -> Option<f64> {
    rmse(model, data).ok().filter(|e| e.is_finite())
}

/// Builds the base model by subtractive clustering, then tunes it.
pub fn tune_anfis_with_ecsa(
    train: &[Sample<f64>],
    test: &[Sample<f64>],
    config: &TuningConfig,
) -> Result<TuningOutcome, PipelineError> {
    let base = init_fis(train, config.cluster_radius).map_err(numerical("anfis"))?;
    tune_from_base(&base, train, test, config)
}

/// Searches premise scaling coefficients with independent ECSA runs.
///
/// The objective is the training RMSE after scaling and a least-squares
/// consequent refit. Every run starts with the all-ones vector in its
/// population, so no run ends worse than `base` refit on `train`. The run
/// with the lowest test RMSE wins (training RMSE when `test` is empty);
/// ties go to the lower run index.
pub fn tune_from_base(
    base: &AnfisModel<f64>,
    train: &[Sample<f64>],
    test: &[Sample<f64>],
    config: &TuningConfig,
) -> Result<TuningOutcome, PipelineError> {
    if config.runs == 0 {
        return Err(PipelineError::Config("at least one optimizer run is required".into()));
    }
    let base = fit_consequents_least_squares(base, train)
        .map_err(numerical("anfis"))?
        .0;
    let base_train_rmse = rmse(&base, train).map_err(numerical("anfis"))?;
    let dim = base.parameter_count();
    let identity = vec![1.0; dim];
    let outcomes = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut ecsa = config.ecsa.clone();
            ecsa.bounds = vec![config.range.bounds(); dim];
            ecsa.seed = derive_run_seed(config.seed, run as u64);
            let res = optimize_seeded_with(|u: &[f64]| scaled_rmse(&base, u, train), &ecsa, std::slice::from_ref(&identity))
                .map_err(numerical("ecsa"))?;
            let model = scaled_refit(&base, &res.best_position, train).map_err(numerical("anfis"))?;
            let stats = RunStats {
                run,
                seed: res.seed,
                best_fitness: res.best_fitness,
                train_rmse: res.best_error,
                test_rmse: finite_rmse(&model, test),
                iterations: res.iterations,
                evaluations: res.evaluations,
                fitness_history: res.fitness_history,
            };
            Ok((stats, model, res.best_position))
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let score = |s: &RunStats| {
        if test.is_empty() {
            s.train_rmse
        } else {
            s.test_rmse.unwrap_or(f64::INFINITY)
        }
    };
    let selected = outcomes
        .iter()
        .enumerate()
        .fold(0, |best, (i, (s, _, _))| if score(s) < score(&outcomes[best].0) { i } else { best });
    let (stats, model, coefficients) = outcomes[selected].clone();
    Ok(TuningOutcome {
        base_model: base,
        model,
        coefficients,
        base_train_rmse,
        train_rmse: stats.train_rmse,
        test_rmse: stats.test_rmse,
        selected_run: selected,
        runs: outcomes.into_iter().map(|(s, _, _)| s).collect(),
    })
}

/// `f_i = forward(model, inputs_i)`.
pub fn potential_scores(model: &AnfisModel<f64>, factor_inputs: &[Vec<f64>]) -> Result<Vec<f64>, PipelineError> {
    factor_inputs
        .iter()
        .map(|x| model.forward(x).map_err(numerical("potential scores")))
        .collect()
}

/// One probe per criterion: the mean training input with that criterion's
/// coordinate pushed to its riskiest end (1 for increasing, 0 for decreasing
/// risk).
pub fn default_factor_probes(train_inputs: &[Vec<f64>], directions: &[RiskDirection]) -> Vec<Vec<f64>> {
    let n = train_inputs.len().max(1) as f64;
    let mean: Vec<f64> = (0..directions.len())
        .map(|d| train_inputs.iter().map(|x| x[d]).sum::<f64>() / n)
        .collect();
    directions
        .iter()
        .enumerate()
        .map(|(i, dir)| {
            let mut p = mean.clone();
            p[i] = match dir {
                RiskDirection::Increasing => 1.0,
                RiskDirection::Decreasing => 0.0,
            };
            p
        })
        .collect()
}

/// `P_out = sum_j w_j f_j`.
pub fn aggregate_risk(w: &[f64], f: &[f64]) -> Result<f64, PipelineError> {
    if w.len() != f.len() {
        return Err(PipelineError::Numerical {
            stage: "aggregate",
            message: format!("{} weights but {} scores", w.len(), f.len()),
        });
    }
    Ok(w.iter().zip(f).map(|(a, b)| a * b).sum())
}

/// Factor-by-criterion IF matrix. Cell `(i, j)` combines the factor's score
/// `f_i` (clamped to `[0, 1]`) with the influence of factor `i` on criterion
/// `j` from the total-relation matrix, scaled by its largest off-diagonal
/// entry (a factor fully relates to itself):
/// `mu = f_i * t_ij`, `nu = (1 - f_i) * (1 - t_ij)`.
pub fn factor_decision_matrix(
    f: &[f64],
    t: &Matrix<f64>,
    kinds: &[CriterionKind],
) -> Result<IfDecisionMatrix<f64>, PipelineError> {
    let n = f.len();
    if t.rows() != n || t.cols() != n || kinds.len() != n {
        return Err(PipelineError::Numerical {
            stage: "topsis",
            message: format!("{n} scores, {}x{} relations, {} kinds", t.rows(), t.cols(), kinds.len()),
        });
    }
    let peak = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| t[(i, j)])
        .fold(0.0, f64::max);
    let rows = (0..n)
        .map(|i| {
            let fi = f[i].clamp(0.0, 1.0);
            (0..n)
                .map(|j| {
                    let tij = if i == j {
                        1.0
                    } else if peak > 0.0 {
                        (t[(i, j)] / peak).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    IntuitionisticFuzzyValue::new(fi * tij, (1.0 - fi) * (1.0 - tij))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(numerical("topsis"))?;
    IfDecisionMatrix::new(rows, kinds.to_vec()).map_err(numerical("topsis"))
}

/// Min-max scaling of the target, optionally after a log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub log: bool,
    pub min: f64,
    pub max: f64,
}

impl TargetScaler {
    pub fn fit(values: &[f64], log: bool) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { log, min, max }
    }

    fn width(&self) -> f64 {
        if self.max > self.min {
            self.max - self.min
        } else {
            1.0
        }
    }

    /// Maps an already transformed value into `[0, 1]`.
    pub fn scale(&self, v: f64) -> f64 {
        (v - self.min) / self.width()
    }

    /// Back to original units.
    pub fn original(&self, y: f64) -> f64 {
        let v = self.min + y * self.width();
        if self.log {
            v.exp()
        } else {
            v
        }
    }
}

/// MAPE (percent) of a model after mapping predictions and targets back to
/// original units. `None` when undefined.
pub fn original_mape(model: &AnfisModel<f64>, data: &[Sample<f64>], scaler: &TargetScaler) -> Option<f64> {
    if data.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for (x, y) in data {
        let actual = scaler.original(*y);
        let pred = scaler.original(model.forward(x).ok()?);
        if actual == 0.0 {
            return None;
        }
        total += ((actual - pred) / actual).abs();
    }
    Some(100.0 * total / data.len() as f64).filter(|m| m.is_finite())
}

/// Feature vectors and scaled targets of `records`.
pub fn build_samples(
    records: &[ProjectRecord],
    mapping: &FeatureMapping,
    target: &ColumnSource,
) -> Result<(Vec<Sample<f64>>, TargetScaler), PipelineError> {
    let y = numeric_column(records, &target.column, target.log).map_err(data("features"))?;
    let scaler = TargetScaler::fit(&y, target.log);
    let samples = records
        .iter()
        .zip(y)
        .map(|(r, y)| Ok((map_ratings_to_features(r, mapping)?, scaler.scale(y))))
        .collect::<Result<Vec<_>, DataError>>()
        .map_err(data("features"))?;
    Ok((samples, scaler))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub rules: usize,
    pub base_train_rmse: f64,
    pub train_rmse: f64,
    pub test_rmse: Option<f64>,
    /// Percent, in original target units.
    pub test_mape: Option<f64>,
    pub selected_run: usize,
    pub runs: Vec<RunStats>,
}

impl FoldReport {
    fn new(
        fold: usize,
        outcome: TuningOutcome,
        train: &[Sample<f64>],
        test: &[Sample<f64>],
        scaler: &TargetScaler,
        keep_histories: bool,
    ) -> Self {
        let mut runs = outcome.runs;
        if !keep_histories {
            runs.iter_mut().for_each(|r| r.fitness_history.clear());
        }
        Self {
            fold,
            train_size: train.len(),
            test_size: test.len(),
            rules: outcome.model.rule_count(),
            base_train_rmse: outcome.base_train_rmse,
            train_rmse: outcome.train_rmse,
            test_rmse: outcome.test_rmse,
            test_mape: original_mape(&outcome.model, test, scaler),
            selected_run: outcome.selected_run,
            runs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningProtocol {
    pub records: usize,
    pub split_seed: u64,
    pub fold_seed: u64,
    /// Cross-validation over the whole dataset.
    pub folds: Vec<FoldReport>,
    /// Tuning on the train/test split; its model is the one reported.
    pub holdout: FoldReport,
    pub model: AnfisModel<f64>,
    pub coefficients: Vec<f64>,
    pub target: TargetScaler,
    #[serde(skip)]
    pub train_inputs: Vec<Vec<f64>>,
}

/// Cross-validated tuning followed by the final tuning on the seeded
/// train/test split. Sub-seeds derive from `config.seed`.
pub fn run_tuning_protocol(
    samples: &[Sample<f64>],
    scaler: &TargetScaler,
    config: &PipelineConfig,
) -> Result<TuningProtocol, PipelineError> {
    config.validate()?;
    let split_seed = config.seed;
    let fold_seed = derive_run_seed(config.seed, 1_000);
    let folds = cv_folds(samples, config.folds, fold_seed)?;
    let mut fold_reports = Vec::with_capacity(folds.len());
    for (i, (train, test)) in fold_pairs(&folds).into_iter().enumerate() {
        let tuning = config.tuning(derive_run_seed(config.seed, 2_000 + i as u64));
        let outcome = tune_anfis_with_ecsa(&train, &test, &tuning)?;
        log::info!(
            "fold {}: train RMSE {:.6} -> {:.6}",
            i + 1,
            outcome.base_train_rmse,
            outcome.train_rmse
        );
        fold_reports.push(FoldReport::new(i, outcome, &train, &test, scaler, false));
    }
    let (train, test) = split_train_test(samples, config.split_fraction, split_seed)?;
    let outcome = tune_anfis_with_ecsa(&train, &test, &config.tuning(derive_run_seed(config.seed, 3_000)))?;
    let model = outcome.model.clone();
    let coefficients = outcome.coefficients.clone();
    let holdout = FoldReport::new(folds.len(), outcome, &train, &test, scaler, config.record_histories);
    Ok(TuningProtocol {
        records: samples.len(),
        split_seed,
        fold_seed,
        folds: fold_reports,
        holdout,
        model,
        coefficients,
        target: *scaler,
        train_inputs: train.into_iter().map(|(x, _)| x).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub seed: u64,
    pub criteria: Vec<String>,
    pub weights: Vec<f64>,
    pub dematel: DematelResult<f64>,
    pub factor_inputs: Vec<Vec<f64>>,
    pub potential_scores: Vec<f64>,
    pub weighted_matrix: IfDecisionMatrix<f64>,
    pub closeness: Vec<f64>,
    /// Criterion indices, most critical first.
    pub ranking: Vec<usize>,
    /// True when IF-TOPSIS could not separate the factors.
    pub undiscriminating: bool,
    pub p_out: f64,
    pub tuning: TuningProtocol,
}

impl RiskReport {
    /// Checks the report's internal consistency.
    pub fn verify(&self) -> Result<(), String> {
        let n = self.criteria.len();
        if self.weights.len() != n || self.potential_scores.len() != n || self.closeness.len() != n {
            return Err("vector lengths disagree with the criteria".into());
        }
        let mut seen = vec![false; n];
        for &i in &self.ranking {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err("ranking is not a permutation".into());
            }
        }
        if self.ranking.len() != n {
            return Err("ranking is not a permutation".into());
        }
        let recomputed: f64 = self.weights.iter().zip(&self.potential_scores).map(|(w, f)| w * f).sum();
        if !((recomputed - self.p_out).abs() <= 1e-9) {
            return Err(format!("P_out {} does not match w.f = {recomputed}", self.p_out));
        }
        Ok(())
    }

    pub fn ranked_criteria(&self) -> Vec<&str> {
        self.ranking.iter().map(|&i| self.criteria[i].as_str()).collect()
    }
}

/// Runs every stage on loaded records and resolved judgments.
pub fn run_pipeline(
    dataset: &[ProjectRecord],
    respondent_matrices: &[JudgmentMatrix<f64>],
    config: &PipelineConfig,
) -> Result<RiskReport, PipelineError> {
    config.validate()?;
    let n = config.criteria.len();
    if respondent_matrices.is_empty() {
        return Err(PipelineError::Numerical {
            stage: "dematel",
            message: "no respondent matrices supplied".into(),
        });
    }
    if let Some(m) = respondent_matrices.iter().find(|m| m.len() != n) {
        return Err(PipelineError::Numerical {
            stage: "dematel",
            message: format!("judgments cover {} criteria, configuration selects {n}", m.len()),
        });
    }
    let dematel = derive_weights(respondent_matrices)?;

    let catalog = CriteriaCatalog::software_risk();
    let mapping = FeatureMapping::fit(dataset, &catalog, &config.mapping, &config.criteria).map_err(data("features"))?;
    let (samples, scaler) = build_samples(dataset, &mapping, &config.target)?;
    let tuning = run_tuning_protocol(&samples, &scaler, config)?;

    let factor_inputs = match &config.factor_inputs {
        Some(inputs) => {
            if inputs.len() != n || inputs.iter().any(|x| x.len() != n) {
                return Err(PipelineError::Config(format!(
                    "factor_inputs must hold {n} vectors of length {n}"
                )));
            }
            inputs.clone()
        }
        None => {
            let directions: Vec<RiskDirection> = config
                .criteria
                .iter()
                .map(|c| catalog.get(c).expect("validated by the mapping").direction)
                .collect();
            default_factor_probes(&tuning.train_inputs, &directions)
        }
    };
    let f = potential_scores(&tuning.model, &factor_inputs)?;

    let kinds = config
        .criteria_kinds
        .clone()
        .unwrap_or_else(|| vec![CriterionKind::Benefit; n]);
    let raw = factor_decision_matrix(&f, &dematel.t, &kinds)?;
    let lifted = dematel
        .weights
        .iter()
        .map(|&w| IntuitionisticFuzzyValue::from_crisp(w))
        .collect::<Result<Vec<_>, _>>()
        .map_err(numerical("topsis"))?;
    let weighted = weighted_if_matrix(&raw, &lifted).map_err(numerical("topsis"))?;
    let outcome = evaluate(&weighted).map_err(numerical("topsis"))?;
    let p_out = aggregate_risk(&dematel.weights, &f)?;

    let report = RiskReport {
        seed: config.seed,
        criteria: config.criteria.clone(),
        weights: dematel.weights.clone(),
        dematel,
        factor_inputs,
        potential_scores: f,
        weighted_matrix: weighted,
        closeness: outcome.closeness,
        ranking: outcome.ranking,
        undiscriminating: outcome.undiscriminating,
        p_out,
        tuning,
    };
    report.verify().map_err(|message| PipelineError::Numerical {
        stage: "report",
        message,
    })?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::TriangularFuzzyNumber;

    fn crisp(rows: &[&[f64]]) -> JudgmentMatrix<f64> {
        rows.iter()
            .map(|r| r.iter().map(|&v| TriangularFuzzyNumber::crisp(v).unwrap()).collect())
            .collect()
    }

    #[test]
    fn weights_examples() {
        let w = derive_weights(&[crisp(&[&[0.0, 2.0], &[1.0, 0.0]])]).unwrap().weights;
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        // Equal off-diagonal judgments give every row of Q sum one, so the
        // total-relation series diverges.
        let sym = crisp(&[&[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]);
        assert!(derive_weights(&[sym]).is_err());
        assert_eq!(derive_weights(&[crisp(&[&[0.0]])]).unwrap().weights, vec![1.0]);
        assert!(derive_weights(&[]).unwrap_err().to_string().contains("dematel"));
    }

    #[test]
    fn split_examples() {
        let recs: Vec<usize> = (0..93).collect();
        let (tr, te) = split_train_test(&recs, 0.7, 5).unwrap();
        assert_eq!((tr.len(), te.len()), (65, 28));
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, recs);
        assert_eq!(split_train_test(&recs, 0.7, 5).unwrap(), (tr, te));
        assert!(split_train_test(&recs, 1.0, 5).is_err());
        assert!(split_train_test::<usize>(&[], 0.5, 5).is_err());
        let ten: Vec<usize> = (0..10).collect();
        assert_eq!(split_train_test(&ten, 0.7, 1).unwrap().0.len(), 7);
    }

    #[test]
    fn fold_examples() {
        let sizes = |n: usize| {
            let recs: Vec<usize> = (0..n).collect();
            cv_folds(&recs, 3, 9).unwrap().iter().map(Vec::len).collect::<Vec<_>>()
        };
        assert_eq!(sizes(93), vec![31, 31, 31]);
        assert_eq!(sizes(94), vec![32, 31, 31]);
        assert!(cv_folds(&[1, 2], 3, 0).is_err());
        let folds = cv_folds(&(0..7).collect::<Vec<_>>(), 3, 2).unwrap();
        for (train, test) in fold_pairs(&folds) {
            assert_eq!(train.len() + test.len(), 7);
            assert!(test.iter().all(|x| !train.contains(x)));
        }
    }

    #[test]
    fn aggregate_examples() {
        assert!((aggregate_risk(&[0.5, 0.5], &[0.2, 0.4]).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(aggregate_risk(&[1.0, 0.0], &[0.7, 0.1]).unwrap(), 0.7);
        assert_eq!(aggregate_risk(&[0.3, 0.7], &[0.0, 0.0]).unwrap(), 0.0);
        assert!(aggregate_risk(&[1.0], &[]).is_err());
    }

    #[test]
    fn probes_and_scores() {
        let inputs = vec![vec![0.0, 0.4], vec![1.0, 0.8]];
        let p = default_factor_probes(&inputs, &[RiskDirection::Increasing, RiskDirection::Decreasing]);
        assert_eq!(p, vec![vec![1.0, 0.6000000000000001], vec![0.5, 0.0]]);
        let train: Vec<Sample<f64>> = (0..20)
            .map(|i| {
                let x = i as f64 / 19.0;
                (vec![x], 0.5 * x + 0.1)
            })
            .collect();
        let model = init_fis(&train, 0.5).unwrap();
        assert!(potential_scores(&model, &[]).unwrap().is_empty());
        let f = potential_scores(&model, &[vec![0.3], vec![0.3]]).unwrap();
        assert_eq!(f[0], f[1]);
        let at = potential_scores(&model, &[train[4].0.clone()]).unwrap();
        assert!((at[0] - train[4].1).abs() < 1e-6);
    }

    #[test]
    fn decision_matrix_cells() {
        let t = Matrix::from_rows(vec![vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        let m = factor_decision_matrix(&[0.5, 1.5], &t, &[CriterionKind::Benefit; 2]).unwrap();
        let c = m.get(0, 1);
        assert!((c.mu() - 0.5).abs() < 1e-15 && c.nu().abs() < 1e-15);
        let c = m.get(1, 0);
        assert!((c.mu() - 0.5).abs() < 1e-15 && c.nu().abs() < 1e-15);
        assert_eq!(m.get(1, 1).mu(), 1.0);
    }

    #[test]
    fn scaler_round_trip() {
        let s = TargetScaler::fit(&[1f64.ln(), 100f64.ln()], true);
        assert!((s.original(s.scale(10f64.ln())) - 10.0).abs() < 1e-12);
        assert!((s.original(1.0) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn tuning_is_never_worse_and_deterministic() {
        let train: Vec<Sample<f64>> = (0..30)
            .map(|i| {
                let x = i as f64 / 29.0;
                (vec![x], (3.0 * x).sin() * 0.5 + 0.5)
            })
            .collect();
        let cfg = TuningConfig {
            runs: 3,
            ecsa: EcsaConfig {
                max_iterations: 10,
                ..EcsaConfig::default()
            },
            seed: 4,
            ..TuningConfig::default()
        };
        let a = tune_anfis_with_ecsa(&train[..20], &train[20..], &cfg).unwrap();
        assert!(a.train_rmse <= a.base_train_rmse);
        assert_eq!(a.runs.len(), 3);
        let b = tune_anfis_with_ecsa(&train[..20], &train[20..], &cfg).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.runs, b.runs);
    }
}
