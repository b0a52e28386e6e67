use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use riskfuse::bench::{bench_runs, bench_template, median, Algorithm, TestFunction, BENCH_ITERATIONS, BENCH_POPULATION};
use riskfuse::data::report::report_json;
use riskfuse::data::{
    emit_report, load_dataset, load_judgments, CriteriaCatalog, DataError, DatasetFormat, FeatureMapping,
    ProjectRecord, ReportFormat,
};
use riskfuse::dematel::JudgmentMatrix;
use riskfuse::ecsa::EcsaError;
use riskfuse::pipeline::{build_samples, derive_weights, run_pipeline, run_tuning_protocol, PipelineConfig, PipelineError};
use riskfuse::topsis::{evaluate, IfDecisionMatrix};

#[derive(Parser)]
#[command(name = "riskfuse", version, about = "Software project risk evaluation")]
struct Cli {
    /// Master seed; overrides the configuration file.
    #[arg(long, global = true, env = "RISKFUSE_SEED")]
    seed: Option<u64>,
    /// JSON pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (CSV reports use it as the stem of three files).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// DEMATEL criterion weights from a judgment file.
    Weights {
        #[arg(long)]
        judgments: Option<PathBuf>,
    },
    /// Cross-validated ECSA tuning of the ANFIS risk model.
    Tune {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// IF-TOPSIS ranking of an already weighted decision matrix.
    Rank {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// The full evaluation.
    Pipeline {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        judgments: Option<PathBuf>,
    },
    /// Per-run statistics of ECSA, classical CSA and random search on the
    /// sphere and Rastrigin functions.
    BenchEcsa {
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 5)]
        dim: usize,
        #[arg(long, default_value_t = BENCH_POPULATION)]
        population: usize,
        #[arg(long, default_value_t = BENCH_ITERATIONS)]
        iterations: usize,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(_) => Failure::Usage(e.to_string()),
            PipelineError::Data { .. } => Failure::Data(e.to_string()),
            PipelineError::Numerical { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<EcsaError> for Failure {
    fn from(e: EcsaError) -> Self {
        match e {
            EcsaError::InvalidConfig(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// Configuration with its file paths made relative to the file's directory.
fn load_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut config = match &cli.config {
        None => PipelineConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            let mut c: PipelineConfig = serde_json::from_str(&text)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new(""));
            c.dataset = c.dataset.map(|p| base.join(p));
            c.judgments = c.judgments.map(|p| base.join(p));
            c
        }
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn require(path: Option<PathBuf>, what: &str) -> Result<PathBuf, Failure> {
    path.ok_or_else(|| Failure::Usage(format!("no {what} given (flag or configuration file)")))
}

fn read_records(path: &Path, config: &PipelineConfig) -> Result<Vec<ProjectRecord>, Failure> {
    let format = config
        .dataset_format
        .or_else(|| DatasetFormat::from_path(path))
        .ok_or_else(|| Failure::Usage(format!("cannot tell the format of {}", path.display())))?;
    let records = load_dataset(path, format)?;
    if records.is_empty() {
        return Err(DataError::Empty.into());
    }
    Ok(records)
}

fn read_judgments(path: &Path, config: &PipelineConfig) -> Result<(Vec<String>, Vec<JudgmentMatrix<f64>>), Failure> {
    let file = load_judgments(path)?;
    let matrices = file.resolve(&config.scale())?;
    Ok((file.criteria, matrices))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::Data(e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = load_config(&cli)?;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Weights { judgments } => {
            let path = require(judgments.clone().or(config.judgments.clone()), "judgment file")?;
            let (criteria, matrices) = read_judgments(&path, &config)?;
            let result = derive_weights(&matrices)?;
            println!("w = {}", list(&result.weights));
            if out.is_some() {
                let text = match cli.format {
                    Format::Json => json(&serde_json::json!({ "criteria": criteria, "dematel": result })),
                    Format::Csv => csv_table(
                        &["criterion", "weight", "prominence", "relation"],
                        criteria.iter().enumerate().map(|(i, c)| {
                            vec![
                                c.clone(),
                                result.weights[i].to_string(),
                                result.prominence[i].to_string(),
                                result.relation[i].to_string(),
                            ]
                        }),
                    )?,
                };
                write_output(out, &text)?;
            }
        }
        Command::Tune { dataset } => {
            let path = require(dataset.clone().or(config.dataset.clone()), "dataset")?;
            let records = read_records(&path, &config)?;
            let mapping = FeatureMapping::fit(&records, &CriteriaCatalog::software_risk(), &config.mapping, &config.criteria)?;
            let (samples, scaler) = build_samples(&records, &mapping, &config.target)?;
            let protocol = run_tuning_protocol(&samples, &scaler, &config)?;
            let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6}"));
            for f in protocol.folds.iter().chain(std::iter::once(&protocol.holdout)) {
                let label = if f.fold == protocol.folds.len() {
                    "holdout".to_string()
                } else {
                    format!("fold {}", f.fold + 1)
                };
                println!(
                    "{label}: train={} test={} rules={} base_rmse={:.6} tuned_rmse={:.6} test_rmse={} test_mape={}%",
                    f.train_size,
                    f.test_size,
                    f.rules,
                    f.base_train_rmse,
                    f.train_rmse,
                    fmt(f.test_rmse),
                    fmt(f.test_mape)
                );
            }
            if out.is_some() {
                let text = match cli.format {
                    Format::Json => json(&protocol),
                    Format::Csv => csv_table(
                        &["fold", "train_size", "test_size", "rules", "base_train_rmse", "train_rmse", "test_rmse", "test_mape"],
                        protocol.folds.iter().chain(std::iter::once(&protocol.holdout)).map(|f| {
                            vec![
                                f.fold.to_string(),
                                f.train_size.to_string(),
                                f.test_size.to_string(),
                                f.rules.to_string(),
                                f.base_train_rmse.to_string(),
                                f.train_rmse.to_string(),
                                f.test_rmse.map(|v| v.to_string()).unwrap_or_default(),
                                f.test_mape.map(|v| v.to_string()).unwrap_or_default(),
                            ]
                        }),
                    )?,
                };
                write_output(out, &text)?;
            }
        }
        Command::Rank { matrix } => {
            let text = fs::read_to_string(matrix).map_err(|e| Failure::Data(format!("{}: {e}", matrix.display())))?;
            let m: IfDecisionMatrix<f64> =
                serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", matrix.display())))?;
            let outcome = evaluate(&m).map_err(|e| Failure::Numerical(e.to_string()))?;
            println!("ranking = {:?}", outcome.ranking);
            println!("closeness = {}", list(&outcome.closeness));
            if out.is_some() {
                let text = match cli.format {
                    Format::Json => json(&outcome),
                    Format::Csv => csv_table(
                        &["rank", "alternative", "closeness"],
                        outcome.ranking.iter().enumerate().map(|(r, &i)| {
                            vec![(r + 1).to_string(), i.to_string(), outcome.closeness[i].to_string()]
                        }),
                    )?,
                };
                write_output(out, &text)?;
            }
        }
        Command::Pipeline { dataset, judgments } => {
            let data_path = require(dataset.clone().or(config.dataset.clone()), "dataset")?;
            let judgment_path = require(judgments.clone().or(config.judgments.clone()), "judgment file")?;
            let records = read_records(&data_path, &config)?;
            let (criteria, matrices) = read_judgments(&judgment_path, &config)?;
            let same = criteria.len() == config.criteria.len()
                && criteria.iter().zip(&config.criteria).all(|(a, b)| a.eq_ignore_ascii_case(b));
            if !same {
                return Err(Failure::Data(format!(
                    "judgment criteria {criteria:?} differ from configured criteria {:?}",
                    config.criteria
                )));
            }
            let report = run_pipeline(&records, &matrices, &config)?;
            eprintln!("P_out = {}", report.p_out);
            eprintln!("ranking = {}", report.ranked_criteria().join(" > "));
            match (out, cli.format) {
                (Some(path), Format::Json) => {
                    emit_report(&report, ReportFormat::Json, path)?;
                }
                (Some(path), Format::Csv) => {
                    emit_report(&report, ReportFormat::Csv, path)?;
                }
                (None, Format::Json) => println!("{}", report_json(&report)?),
                (None, Format::Csv) => return Err(Failure::Usage("CSV reports need --out".into())),
            }
        }
        Command::BenchEcsa { runs, dim, population, iterations } => {
            if *runs == 0 || *dim == 0 || *population < 2 || *iterations == 0 {
                return Err(Failure::Usage(
                    "runs, dim and iterations must be positive and population at least 2".into(),
                ));
            }
            let template = bench_template(&config.ecsa, *population, *iterations);
            let mut rows = Vec::new();
            for function in TestFunction::ALL {
                for algorithm in Algorithm::ALL {
                    let results = bench_runs(function, algorithm, &template, *dim, *runs, config.seed)?;
                    let best: Vec<f64> = results.iter().map(|r| r.best_value).collect();
                    eprintln!("{:<9} {:<6} median best = {:.6e}", function.name(), algorithm.name(), median(&best));
                    rows.extend(results.into_iter().map(|r| {
                        vec![
                            function.name().to_string(),
                            algorithm.name().to_string(),
                            r.run.to_string(),
                            r.seed.to_string(),
                            r.best_value.to_string(),
                            r.evaluations.to_string(),
                        ]
                    }));
                }
            }
            let text = csv_table(&["function", "algorithm", "run", "seed", "best_value", "evaluations"], rows)?;
            write_output(out, &text)?;
        }
    }
    if let Some(path) = out {
        log::info!("wrote {}", path.display());
    }
    std::io::stdout().flush().map_err(|e| Failure::Data(e.to_string()))
}
