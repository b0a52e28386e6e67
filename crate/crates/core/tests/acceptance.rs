//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! verdicts are printed under `cargo test` without extra flags.

use std::convert::Infallible;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riskfuse::anfis::{fit_consequents_least_squares, init_fis, rmse, AnfisModel, AnfisRule, BellMembership, Sample};
use riskfuse::bench::{bench_runs, bench_template, median, Algorithm, TestFunction, BENCH_ITERATIONS, BENCH_POPULATION};
use riskfuse::data::{load_dataset, load_judgments, DatasetFormat};
use riskfuse::dematel::{analyze, DirectRelationMatrix, JudgmentMatrix};
use riskfuse::ecsa::{derive_run_seed, optimize, EcsaConfig};
use riskfuse::fuzzy::{IntuitionisticFuzzyValue, TriangularFuzzyNumber};
use riskfuse::linalg::Matrix;
use riskfuse::pipeline::{
    aggregate_risk, cv_folds, derive_weights, run_pipeline, split_train_test, tune_from_base, CoefficientRange,
    PipelineConfig, TuningConfig,
};
use riskfuse::topsis::{evaluate, CriterionKind, IfDecisionMatrix};
use riskfuse::RiskReport;

type Check = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn dematel_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = rng.gen_range(2..=8);
        let s = Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { rng.gen_range(0.0..4.0) });
        let res = analyze(&DirectRelationMatrix::new(s.clone(), 1).map_err(|e| e.to_string())?)
            .map_err(|e| format!("case {case}: {e}"))?;

        let max_row = s.row_sums().into_iter().fold(0.0, f64::max);
        let q = s.map(|x| x / max_row);
        let mut term = q.clone();
        let mut total = Matrix::zeros(n, n);
        for _ in 0..1_000_000 {
            for i in 0..n {
                for j in 0..n {
                    total[(i, j)] += term[(i, j)];
                }
            }
            if term.norm_inf() < 1e-15 {
                break;
            }
            term = term.matmul(&q).map_err(|e| e.to_string())?;
        }
        worst = worst.max(res.t.max_abs_diff(&total));
        let sum: f64 = res.weights.iter().sum();
        ensure((sum - 1.0).abs() <= 1e-9, || format!("case {case}: weights sum to {sum}"))?;
    }
    ensure(worst <= 1e-6, || format!("max entry deviation {worst:.3e}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("200 matrices, max deviation {worst:.2e}, {elapsed:.2?}"))
}

fn dematel_hand_trace() -> Check {
    let s = Matrix::from_rows(vec![vec![0.0, 2.0], vec![1.0, 0.0]]).map_err(|e| e.to_string())?;
    let res = analyze(&DirectRelationMatrix::new(s, 1).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let t = Matrix::from_rows(vec![vec![1.0, 2.0], vec![1.0, 1.0]]).map_err(|e| e.to_string())?;
    let dt = res.t.max_abs_diff(&t);
    let dw = max_abs_diff(&res.weights, &[0.5, 0.5]);
    ensure(dt <= 1e-12 && dw <= 1e-12, || format!("T off by {dt:.2e}, w off by {dw:.2e}"))?;
    Ok("T = [[1, 2], [1, 1]], w = [0.5, 0.5]".into())
}

fn bell(m: f64, l: f64, k: f64) -> BellMembership<f64> {
    BellMembership::new(m, l, k).expect("valid membership")
}

fn anfis_recovery() -> Check {
    let start = Instant::now();
    let rules = vec![
        AnfisRule {
            premises: vec![bell(0.2, 0.4, 2.0), bell(0.3, 0.5, 1.5)],
            consequent: vec![1.5, -2.0, 0.7],
        },
        AnfisRule {
            premises: vec![bell(0.8, 0.3, 2.5), bell(0.7, 0.4, 2.0)],
            consequent: vec![-0.5, 3.0, 1.2],
        },
    ];
    let truth = AnfisModel::with_unit_spans(2, rules).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data: Vec<Sample<f64>> = (0..60)
        .map(|_| {
            let x = vec![rng.gen::<f64>(), rng.gen::<f64>()];
            let y = truth.forward(&x).unwrap();
            (x, y)
        })
        .collect();
    let blank = truth.with_consequents(&[0.0; 6]).map_err(|e| e.to_string())?;
    let (fitted, _) = fit_consequents_least_squares(&blank, &data).map_err(|e| e.to_string())?;
    let err = rmse(&fitted, &data).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(err < 1e-8, || format!("training RMSE {err:.3e}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("training RMSE {err:.2e}, {elapsed:.2?}"))
}

fn random_model(rng: &mut ChaCha8Rng) -> AnfisModel<f64> {
    let dim = rng.gen_range(1..=4);
    let rules = (0..rng.gen_range(1..=5))
        .map(|_| AnfisRule {
            premises: (0..dim)
                .map(|_| bell(rng.gen(), rng.gen_range(0.05..1.0), rng.gen_range(0.5..4.0)))
                .collect(),
            consequent: (0..=dim).map(|_| rng.gen_range(-5.0..5.0)).collect(),
        })
        .collect();
    AnfisModel::with_unit_spans(dim, rules).expect("valid model")
}

fn anfis_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_sum = 0.0f64;
    for case in 0..1000 {
        let model = random_model(&mut rng);
        let x: Vec<f64> = (0..model.input_dim()).map(|_| rng.gen_range(-0.5..1.5)).collect();
        let act = model.activate(&x).map_err(|e| e.to_string())?;
        let sum: f64 = act.normalized.iter().sum();
        worst_sum = worst_sum.max((sum - 1.0).abs());
        ensure((sum - 1.0).abs() <= 1e-9, || format!("case {case}: strengths sum to {sum}"))?;
        let lo = act.consequents.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = act.consequents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let y = model.forward(&x).map_err(|e| e.to_string())?;
        ensure(y >= lo - 1e-9 && y <= hi + 1e-9, || format!("case {case}: {y} outside [{lo}, {hi}]"))?;
    }
    Ok(format!("1000 models, max strength-sum error {worst_sum:.2e}"))
}

fn anfis_gradient() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let model = random_model(&mut rng);
        let x: Vec<f64> = (0..model.input_dim()).map(|_| rng.gen()).collect();
        let grad = model.consequent_gradient(&x).map_err(|e| e.to_string())?;
        let params: Vec<f64> = model.rules().iter().flat_map(|r| r.consequent.clone()).collect();
        for (p, &g) in grad.iter().enumerate() {
            let h = 1e-5 * params[p].abs().max(1.0);
            let at = |delta: f64| {
                let mut shifted = params.clone();
                shifted[p] += delta;
                model.with_consequents(&shifted).unwrap().forward(&x).unwrap()
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            // Unit floor: sensitivities near zero are compared absolutely.
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1.0);
            worst = worst.max(rel);
            ensure(rel <= 1e-6, || format!("case {case} parameter {p}: {g} vs {fd}"))?;
        }
    }
    Ok(format!("100 models, max relative error {worst:.2e}"))
}

fn reference_template() -> EcsaConfig<f64> {
    EcsaConfig {
        population_size: 10,
        max_iterations: 100,
        beta: 0.9,
        ap_min: 0.1,
        ap_max: 0.8,
        ..EcsaConfig::default()
    }
}

fn medians(function: TestFunction, template: &EcsaConfig<f64>, algorithms: &[Algorithm]) -> Result<Vec<f64>, String> {
    algorithms
        .iter()
        .map(|&a| {
            let runs = bench_runs(function, a, template, 5, 20, 42).map_err(|e| e.to_string())?;
            Ok(median(&runs.iter().map(|r| r.best_value).collect::<Vec<_>>()))
        })
        .collect()
}

fn ecsa_sphere() -> Check {
    let start = Instant::now();
    let m = medians(TestFunction::Sphere, &reference_template(), &[Algorithm::Ecsa, Algorithm::RandomSearch])?;
    let elapsed = start.elapsed();
    ensure(m[0] < 1e-2, || format!("ECSA median {:.3e}", m[0]))?;
    ensure(m[0] < m[1], || format!("ECSA {:.3e} not below random {:.3e}", m[0], m[1]))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("median {:.2e} vs random {:.2e}, {elapsed:.2?}", m[0], m[1]))
}

fn ecsa_determinism() -> Check {
    for function in TestFunction::ALL {
        let (lo, hi) = function.bounds();
        for run in 0..20u64 {
            let config = EcsaConfig {
                bounds: vec![(lo, hi); 5],
                seed: derive_run_seed(9, run),
                ..reference_template()
            };
            let objective = |x: &[f64]| Ok::<_, Infallible>(function.eval(x));
            let a = optimize(objective, &config).map_err(|e| e.to_string())?;
            let b = optimize(objective, &config).map_err(|e| e.to_string())?;
            ensure(a.fitness_history.windows(2).all(|w| w[1] <= w[0]), || {
                format!("{} run {run}: history increases", function.name())
            })?;
            let same_bits = a.best_position.iter().zip(&b.best_position).all(|(x, y)| x.to_bits() == y.to_bits())
                && a.fitness_history.iter().zip(&b.fitness_history).all(|(x, y)| x.to_bits() == y.to_bits())
                && a == b;
            ensure(same_bits, || format!("{} run {run}: repeated run differs", function.name()))?;
        }
    }
    Ok("40 runs monotone and bit-identical on repeat".into())
}

fn ecsa_vs_csa() -> Check {
    let template = bench_template(&reference_template(), BENCH_POPULATION, BENCH_ITERATIONS);
    let mut parts = Vec::new();
    for function in TestFunction::ALL {
        let m = medians(function, &template, &[Algorithm::Ecsa, Algorithm::ClassicalCsa])?;
        ensure(m[0] <= m[1], || format!("{}: ECSA {:.3e} above CSA {:.3e}", function.name(), m[0], m[1]))?;
        parts.push(format!("{} {:.2e} <= {:.2e}", function.name(), m[0], m[1]));
    }
    Ok(parts.join(", "))
}

fn random_ifv(rng: &mut ChaCha8Rng) -> IntuitionisticFuzzyValue<f64> {
    let mu: f64 = rng.gen();
    let nu = rng.gen::<f64>() * (1.0 - mu);
    IntuitionisticFuzzyValue::new(mu, nu).expect("valid value")
}

/// Straight-line closeness: product weighting, ideals, normalized Euclidean
/// separations and relative closeness.
fn oracle_closeness(
    raw: &[Vec<(f64, f64)>],
    weights: &[(f64, f64)],
    cost: &[bool],
) -> Vec<f64> {
    let rows: Vec<Vec<(f64, f64)>> = raw
        .iter()
        .map(|r| {
            r.iter()
                .zip(weights)
                .map(|(&(a_mu, a_nu), &(w_mu, w_nu))| (a_mu * w_mu, a_nu + w_nu - a_nu * w_nu))
                .collect()
        })
        .collect();
    let m = weights.len();
    let mut best = Vec::new();
    let mut worst = Vec::new();
    for j in 0..m {
        let mus = rows.iter().map(|r| r[j].0);
        let nus = rows.iter().map(|r| r[j].1);
        let hi_mu = mus.clone().fold(f64::NEG_INFINITY, f64::max);
        let lo_mu = mus.fold(f64::INFINITY, f64::min);
        let hi_nu = nus.clone().fold(f64::NEG_INFINITY, f64::max);
        let lo_nu = nus.fold(f64::INFINITY, f64::min);
        if cost[j] {
            best.push((lo_mu, hi_nu));
            worst.push((hi_mu, lo_nu));
        } else {
            best.push((hi_mu, lo_nu));
            worst.push((lo_mu, hi_nu));
        }
    }
    let dist = |row: &[(f64, f64)], ideal: &[(f64, f64)]| {
        let mut acc = 0.0;
        for (&(mu, nu), &(imu, inu)) in row.iter().zip(ideal) {
            let pi = 1.0 - mu - nu;
            let ipi = 1.0 - imu - inu;
            acc += (mu - imu).powi(2) + (nu - inu).powi(2) + (pi - ipi).powi(2);
        }
        (acc / (2.0 * m as f64)).sqrt()
    };
    rows.iter()
        .map(|r| {
            let vp = dist(r, &best);
            let vn = dist(r, &worst);
            if vp + vn == 0.0 {
                0.5
            } else {
                vn / (vp + vn)
            }
        })
        .collect()
}

fn oracle_ranking(xi: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xi.len()).collect();
    idx.sort_by(|&a, &b| xi[b].partial_cmp(&xi[a]).unwrap().then(a.cmp(&b)));
    idx
}

fn topsis_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..500 {
        let alts = rng.gen_range(1..=3);
        let crit = rng.gen_range(1..=3);
        let raw: Vec<Vec<IntuitionisticFuzzyValue<f64>>> =
            (0..alts).map(|_| (0..crit).map(|_| random_ifv(&mut rng)).collect()).collect();
        let weights: Vec<IntuitionisticFuzzyValue<f64>> = (0..crit).map(|_| random_ifv(&mut rng)).collect();
        let cost: Vec<bool> = (0..crit).map(|_| rng.gen_bool(0.3)).collect();
        let kinds = cost
            .iter()
            .map(|&c| if c { CriterionKind::Cost } else { CriterionKind::Benefit })
            .collect();
        let matrix = IfDecisionMatrix::new(raw.clone(), kinds).map_err(|e| e.to_string())?;
        let weighted = riskfuse::topsis::weighted_if_matrix(&matrix, &weights).map_err(|e| e.to_string())?;
        let out = evaluate(&weighted).map_err(|e| format!("case {case}: {e}"))?;
        ensure(out.closeness.iter().all(|x| (0.0..=1.0).contains(x)), || {
            format!("case {case}: closeness {:?}", out.closeness)
        })?;
        let pairs = |v: &[IntuitionisticFuzzyValue<f64>]| v.iter().map(|x| (x.mu(), x.nu())).collect::<Vec<_>>();
        let raw_pairs: Vec<Vec<(f64, f64)>> = raw.iter().map(|r| pairs(r)).collect();
        let xi = oracle_closeness(&raw_pairs, &pairs(&weights), &cost);
        let expected = oracle_ranking(&xi);
        ensure(out.ranking == expected, || {
            format!("case {case}: ranking {:?} vs oracle {:?}", out.ranking, expected)
        })?;
    }
    Ok("500 matrices agree with the oracle".into())
}

fn synthetic_fixture(f: fn(f64, f64) -> f64, seed: u64) -> Vec<Sample<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..60)
        .map(|_| {
            let (a, b) = (rng.gen::<f64>(), rng.gen::<f64>());
            (vec![a, b], f(a, b))
        })
        .collect()
}

fn doubled_widths(model: &AnfisModel<f64>) -> AnfisModel<f64> {
    let rules = model
        .rules()
        .iter()
        .map(|r| AnfisRule {
            premises: r.premises.iter().map(|mf| bell(mf.m, 2.0 * mf.l, mf.k)).collect(),
            consequent: r.consequent.clone(),
        })
        .collect();
    AnfisModel::new(model.input_dim(), rules, model.input_normalization().to_vec()).expect("valid model")
}

fn tuned_never_worse() -> Check {
    let fixtures: [(fn(f64, f64) -> f64, u64); 3] = [
        (|a, b| (6.0 * a).sin() + b * b, 21),
        (|a, b| (-4.0 * ((a - 0.5).powi(2) + (b - 0.5).powi(2))).exp(), 22),
        (|a, b| a * b + 0.5 * (3.0 * b).cos(), 23),
    ];
    let config = TuningConfig {
        cluster_radius: 0.5,
        ecsa: EcsaConfig {
            max_iterations: 30,
            ..EcsaConfig::default()
        },
        range: CoefficientRange::default(),
        runs: 4,
        seed: 5,
    };
    let mut best_gain = 0.0f64;
    let mut parts = Vec::new();
    for (i, (f, seed)) in fixtures.into_iter().enumerate() {
        let train = synthetic_fixture(f, seed);
        let base = init_fis(&train, config.cluster_radius).map_err(|e| e.to_string())?;
        let perturbed = doubled_widths(&base);
        let out = tune_from_base(&perturbed, &train, &[], &config).map_err(|e| e.to_string())?;
        ensure(out.train_rmse <= out.base_train_rmse, || {
            format!("fixture {i}: tuned {} above base {}", out.train_rmse, out.base_train_rmse)
        })?;
        let gain = 1.0 - out.train_rmse / out.base_train_rmse;
        best_gain = best_gain.max(gain);
        parts.push(format!("{:.3e} -> {:.3e}", out.base_train_rmse, out.train_rmse));
    }
    ensure(best_gain >= 0.05, || format!("best improvement {:.1}%", 100.0 * best_gain))?;
    Ok(format!("{}; best gain {:.1}%", parts.join(", "), 100.0 * best_gain))
}

fn nasa_protocol() -> Check {
    let records = load_dataset(&fixture("nasa93.arff"), DatasetFormat::Arff).map_err(|e| e.to_string())?;
    ensure(records.len() == 93, || format!("{} records", records.len()))?;
    let (train, test) = split_train_test(&records, 0.7, 7).map_err(|e| e.to_string())?;
    ensure(train.len() == 65 && test.len() == 28, || format!("split {}/{}", train.len(), test.len()))?;
    let folds = cv_folds(&records, 3, 7).map_err(|e| e.to_string())?;
    let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
    ensure(sizes == [31, 31, 31], || format!("folds {sizes:?}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    let mut slowest = Duration::ZERO;
    for name in ["first.json", "second.json"] {
        let out = dir.path().join(name);
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_riskfuse"))
            .arg("--config")
            .arg(fixture("config.json"))
            .arg("--seed")
            .arg("7")
            .arg("--out")
            .arg(&out)
            .arg("pipeline")
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("pipeline exited with {status}"))?;
        slowest = slowest.max(start.elapsed());
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(slowest < Duration::from_secs(300), || format!("a run took {slowest:?}"))?;
    ensure(outputs[0] == outputs[1], || "repeated pipeline runs differ".into())?;
    let report: RiskReport = serde_json::from_slice(&outputs[0]).map_err(|e| e.to_string())?;
    report.verify()?;
    let recomputed = aggregate_risk(&report.weights, &report.potential_scores).map_err(|e| e.to_string())?;
    ensure((recomputed - report.p_out).abs() <= 1e-9, || format!("P_out {} vs {recomputed}", report.p_out))?;
    let mut sorted = report.ranking.clone();
    sorted.sort_unstable();
    ensure(sorted == (0..report.criteria.len()).collect::<Vec<_>>(), || "ranking is not a permutation".into())?;
    Ok(format!(
        "93 records, 65/28, 31/31/31, two identical runs, slowest {slowest:.1?}, P_out {:.6}",
        report.p_out
    ))
}

fn tripled(matrices: &[JudgmentMatrix<f64>]) -> Result<Vec<JudgmentMatrix<f64>>, String> {
    matrices
        .iter()
        .map(|m| {
            m.iter()
                .map(|row| row.iter().map(|t: &TriangularFuzzyNumber<f64>| t.scaled(3.0)).collect())
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()
        .map_err(|e: riskfuse::fuzzy::FuzzyError| e.to_string())
}

fn scale_invariance() -> Check {
    let judgments = load_judgments(&fixture("judgments.json")).map_err(|e| e.to_string())?;
    let config = PipelineConfig {
        runs: 2,
        ecsa: EcsaConfig {
            max_iterations: 5,
            ..EcsaConfig::default()
        },
        seed: 7,
        record_histories: false,
        ..PipelineConfig::default()
    };
    let base = judgments.resolve(&config.scale()).map_err(|e| e.to_string())?;
    let scaled = tripled(&base)?;
    let wa = derive_weights(&base).map_err(|e| e.to_string())?.weights;
    let wb = derive_weights(&scaled).map_err(|e| e.to_string())?.weights;
    let dw = max_abs_diff(&wa, &wb);
    ensure(dw <= 1e-9, || format!("weights moved by {dw:.3e}"))?;

    let records = load_dataset(&fixture("nasa93.arff"), DatasetFormat::Arff).map_err(|e| e.to_string())?;
    let a = run_pipeline(&records, &base, &config).map_err(|e| e.to_string())?;
    let b = run_pipeline(&records, &scaled, &config).map_err(|e| e.to_string())?;
    ensure(a.ranking == b.ranking, || "ranking changed".into())?;
    let dp = (a.p_out - b.p_out).abs();
    ensure(dp <= 1e-9, || format!("P_out moved by {dp:.3e}"))?;
    Ok(format!("weights within {dw:.1e}, ranking unchanged, P_out within {dp:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("DEMATEL oracle equivalence", dematel_oracle),
        ("DEMATEL hand trace", dematel_hand_trace),
        ("ANFIS exact recovery", anfis_recovery),
        ("ANFIS structural invariants", anfis_invariants),
        ("ANFIS gradient check", anfis_gradient),
        ("ECSA sphere at reference scale", ecsa_sphere),
        ("ECSA monotonicity and determinism", ecsa_determinism),
        ("ECSA vs classical CSA", ecsa_vs_csa),
        ("IF-TOPSIS brute-force equivalence", topsis_oracle),
        ("tuned never worse", tuned_never_worse),
        ("NASA-93 protocol", nasa_protocol),
        ("scale invariance", scale_invariance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
