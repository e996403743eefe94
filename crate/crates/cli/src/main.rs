//! Command-line front end: fit and apply models on CSV data, run the
//! simulation harness, and render boxplot summaries.
//!
//! Exit codes: 0 success, 2 usage or data error, 3 numerical failure.

mod model_file;
mod plot;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use csdsvm::{
    censored_empirical_risk, fit, predict, BandwidthRule, CensoringCase, CensoringModel, Dataset,
    ExperimentConfig, KernelKind, KernelSpec, SimSetting,
};
use model_file::{data_digest, CensoringDescriptor, ModelFile, TrainingMeta};

#[derive(Parser)]
#[command(name = "csdsvm", version, about = "Failure time expectation estimation from current status data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ToggleArg {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model from a CSV file with header z1,...,zd,c,delta.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        kernel: KernelArg,
        /// RBF width; only valid with --kernel rbf.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        lambda: f64,
        /// Censoring model: "uniform:<tau>" or "kde[:beta=<b>,floor=<f>]".
        #[arg(long)]
        censoring: String,
        #[arg(long, value_enum, default_value = "on")]
        intercept: ToggleArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict on a CSV file with header z1,...,zd.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a simulation study and write the result table.
    Simulate {
        #[arg(long)]
        setting: String,
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum)]
        method: KernelArg,
        #[arg(long = "censoring-case")]
        censoring_case: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render boxplots from a simulation result table.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<csdsvm::Error> for CliError {
    fn from(e: csdsvm::Error) -> Self {
        match e {
            csdsvm::Error::Numerical { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit { data, kernel, sigma, lambda, censoring, intercept, out } => {
            cmd_fit(&data, kernel, sigma, lambda, &censoring, intercept, &out)
        }
        Command::Predict { model, data, out } => cmd_predict(&model, &data, &out),
        Command::Simulate { setting, sizes, reps, seed, method, censoring_case, out } => {
            cmd_simulate(&setting, &sizes, reps, seed, method, &censoring_case, &out)
        }
        Command::Plot { input, out } => cmd_plot(&input, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical error: {msg}");
            ExitCode::from(3)
        }
    }
}

/// Write via a sibling temp file and rename, so readers never observe a
/// partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn parse_field(field: &str, line: usize, column: &str) -> CliResult<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        CliError::Usage(format!("line {line}: cannot parse column {column} value {field:?}"))
    })
}

struct TrainingCsv {
    covariates: Vec<Vec<f64>>,
    times: Vec<f64>,
    status: Vec<u8>,
    digest: String,
}

/// Read a training CSV with header z1,...,zd,c,delta.
fn read_training_csv(path: &Path) -> CliResult<TrainingCsv> {
    let raw = fs::read(path)?;
    let digest = data_digest(&raw);
    let mut reader = csv::Reader::from_reader(raw.as_slice());
    let headers: Vec<String> =
        reader.headers().map_err(|e| CliError::Usage(e.to_string()))?.iter().map(str::to_string).collect();
    if !headers.iter().any(|h| h == "delta") {
        return usage("missing column \"delta\" in training CSV header");
    }
    if !headers.iter().any(|h| h == "c") {
        return usage("missing column \"c\" in training CSV header");
    }
    let d = headers.len() - 2;
    if d == 0 {
        return usage("training CSV needs at least one covariate column z1");
    }
    for (i, h) in headers[..d].iter().enumerate() {
        let expected = format!("z{}", i + 1);
        if *h != expected {
            return usage(format!("expected column {expected} at position {}, found {h:?}", i + 1));
        }
    }
    if headers[d] != "c" || headers[d + 1] != "delta" {
        return usage("training CSV header must end with columns c,delta");
    }

    let mut covariates = Vec::new();
    let mut times = Vec::new();
    let mut status = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2; // header is line 1
        let record = record.map_err(|e| CliError::Usage(format!("line {line}: {e}")))?;
        if record.len() != headers.len() {
            return usage(format!("line {line}: expected {} fields, found {}", headers.len(), record.len()));
        }
        let mut z = Vec::with_capacity(d);
        for j in 0..d {
            z.push(parse_field(&record[j], line, &headers[j])?);
        }
        times.push(parse_field(&record[d], line, "c")?);
        let delta = parse_field(&record[d + 1], line, "delta")?;
        if delta != 0.0 && delta != 1.0 {
            return usage(format!("line {line}: delta must be 0 or 1, found {delta}"));
        }
        status.push(delta as u8);
        covariates.push(z);
    }
    if covariates.is_empty() {
        return usage("training CSV contains no data rows");
    }
    Ok(TrainingCsv { covariates, times, status, digest })
}

fn parse_censoring_spec(spec: &str, times: &[f64]) -> CliResult<(CensoringModel, f64)> {
    if let Some(tau) = spec.strip_prefix("uniform:") {
        let tau: f64 = tau
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid tau in censoring spec {spec:?}")))?;
        return Ok((CensoringModel::known_uniform(tau, csdsvm::censoring::DEFAULT_FLOOR)?, tau));
    }
    if spec == "kde" || spec.starts_with("kde:") {
        let mut beta = csdsvm::censoring::DEFAULT_BETA;
        let mut floor = csdsvm::censoring::DEFAULT_FLOOR;
        if let Some(rest) = spec.strip_prefix("kde:") {
            for part in rest.split(',') {
                match part.split_once('=') {
                    Some(("beta", v)) => {
                        beta = v.parse().map_err(|_| {
                            CliError::Usage(format!("invalid beta in censoring spec {spec:?}"))
                        })?;
                    }
                    Some(("floor", v)) => {
                        floor = v.parse().map_err(|_| {
                            CliError::Usage(format!("invalid floor in censoring spec {spec:?}"))
                        })?;
                    }
                    _ => return usage(format!("unknown censoring option {part:?}")),
                }
            }
        }
        let model = CensoringModel::fit_kde(times, BandwidthRule::SilvermanBeta { beta }, floor)?;
        // Horizon taken from the observed monitoring times.
        let tau = times.iter().cloned().fold(f64::MIN, f64::max);
        return Ok((model, tau));
    }
    usage(format!("censoring spec must be \"uniform:<tau>\" or \"kde[:beta=..,floor=..]\", got {spec:?}"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    data_path: &Path,
    kernel: KernelArg,
    sigma: Option<f64>,
    lambda: f64,
    censoring: &str,
    intercept: ToggleArg,
    out: &Path,
) -> CliResult<()> {
    let spec = match (kernel, sigma) {
        (KernelArg::Linear, None) => KernelSpec::Linear,
        (KernelArg::Linear, Some(_)) => {
            return usage("--sigma is only valid with --kernel rbf");
        }
        (KernelArg::Rbf, Some(s)) => KernelSpec::rbf(s)?,
        (KernelArg::Rbf, None) => return usage("--kernel rbf requires --sigma"),
    };
    let csv_data = read_training_csv(data_path)?;
    let (cens, tau) = parse_censoring_spec(censoring, &csv_data.times)?;
    let dataset = Dataset::new(csv_data.covariates, csv_data.times, csv_data.status, tau)?;
    let with_intercept = matches!(intercept, ToggleArg::On);
    let model = fit(&dataset, &spec, lambda, &cens, with_intercept)?;
    let preds = predict(&model, dataset.covariates())?;
    let train_risk = censored_empirical_risk(&preds, &dataset, &cens, false)?;

    let descriptor = CensoringDescriptor::from_model(&cens)
        .ok_or_else(|| CliError::Usage("censoring model is not serializable".into()))?;
    let meta = TrainingMeta { n: dataset.len(), d: dataset.dim(), tau, data_digest: csv_data.digest };
    let file = ModelFile::new(&model, descriptor, meta);
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    write_atomic(out, json.as_bytes())?;
    println!("n: {}", dataset.len());
    println!("d: {}", dataset.dim());
    println!("training censored risk: {train_risk}");
    Ok(())
}

fn load_model(path: &Path) -> CliResult<ModelFile> {
    let raw = fs::read(path)?;
    let file: ModelFile = serde_json::from_slice(&raw)
        .map_err(|e| CliError::Usage(format!("cannot parse model file: {e}")))?;
    if file.format_version != model_file::FORMAT_VERSION {
        return usage(format!("unsupported model format version {}", file.format_version));
    }
    // Validate the stored censoring parameters even though prediction
    // does not use them.
    file.censoring
        .to_model()
        .map_err(|e| CliError::Usage(format!("invalid censoring in model file: {e}")))?;
    Ok(file)
}

fn cmd_predict(model_path: &Path, data_path: &Path, out: &Path) -> CliResult<()> {
    let file = load_model(model_path)?;
    let raw = fs::read(data_path)?;
    let mut reader = csv::Reader::from_reader(raw.as_slice());
    let headers: Vec<String> =
        reader.headers().map_err(|e| CliError::Usage(e.to_string()))?.iter().map(str::to_string).collect();
    let d = file.meta.d;
    if headers.len() != d {
        return usage(format!("model expects {d} covariate columns, input has {}", headers.len()));
    }
    for (i, h) in headers.iter().enumerate() {
        let expected = format!("z{}", i + 1);
        if *h != expected {
            return usage(format!("expected column {expected}, found {h:?}"));
        }
    }
    let mut query = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2;
        let record = record.map_err(|e| CliError::Usage(format!("line {line}: {e}")))?;
        let mut z = Vec::with_capacity(d);
        for j in 0..d {
            z.push(parse_field(&record[j], line, &headers[j])?);
        }
        query.push(z);
    }
    let model = file.to_fitted();
    let preds = predict(&model, &query)?;

    let mut out_text = String::new();
    out_text.push_str(&headers.join(","));
    out_text.push_str(",prediction\n");
    for (z, p) in query.iter().zip(&preds) {
        for v in z {
            out_text.push_str(&v.to_string());
            out_text.push(',');
        }
        out_text.push_str(&p.to_string());
        out_text.push('\n');
    }
    write_atomic(out, out_text.as_bytes())?;
    Ok(())
}

fn cmd_simulate(
    setting: &str,
    sizes: &[usize],
    reps: usize,
    seed: u64,
    method: KernelArg,
    censoring_case: &str,
    out: &Path,
) -> CliResult<()> {
    let setting = SimSetting::parse(setting)
        .ok_or_else(|| CliError::Usage(format!("unknown setting {setting:?}")))?;
    let case = CensoringCase::parse(censoring_case)
        .ok_or_else(|| CliError::Usage(format!("unknown censoring case {censoring_case:?}")))?;
    let kernel = match method {
        KernelArg::Linear => KernelKind::Linear,
        KernelArg::Rbf => KernelKind::Rbf,
    };
    let config = ExperimentConfig::new(kernel, case);
    let result = csdsvm::run_experiment(setting, sizes, reps, &config, seed)?;
    let mut csv_bytes = Vec::new();
    result.write_csv(&mut csv_bytes)?;
    write_atomic(out, &csv_bytes)?;
    for (n, median) in result.median_risk_by_size() {
        println!("n={n}: median risk {median}");
    }
    println!("bayes risk: {}", result.bayes_risk);
    for failure in &result.failures {
        eprintln!("warning: {failure}");
    }
    if result.flagged {
        eprintln!("warning: more than 5% of repetitions failed");
    }
    Ok(())
}

fn cmd_plot(input: &Path, out: &Path) -> CliResult<()> {
    let raw = fs::read(input)?;
    let mut reader = csv::Reader::from_reader(raw.as_slice());
    let headers: Vec<String> =
        reader.headers().map_err(|e| CliError::Usage(e.to_string()))?.iter().map(str::to_string).collect();
    let col = |name: &str| -> CliResult<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("missing column {name:?} in results CSV")))
    };
    let (c_method, c_n, c_risk, c_bayes) = (col("method")?, col("n")?, col("risk")?, col("bayes_risk")?);

    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    let mut bayes = None;
    for (row_idx, record) in reader.records().enumerate() {
        let line = row_idx + 2;
        let record = record.map_err(|e| CliError::Usage(format!("line {line}: {e}")))?;
        let method = record[c_method].to_string();
        let n: usize = record[c_n]
            .parse()
            .map_err(|_| CliError::Usage(format!("line {line}: bad n value")))?;
        let risk = parse_field(&record[c_risk], line, "risk")?;
        bayes = Some(parse_field(&record[c_bayes], line, "bayes_risk")?);
        groups.entry((method, n)).or_default().push(risk);
    }
    let Some(bayes) = bayes else {
        return usage("results CSV contains no data rows");
    };
    let stats: Vec<plot::GroupStats> = groups
        .iter()
        .map(|((method, n), risks)| plot::group_stats(method, *n, risks))
        .collect();
    write_atomic(out, plot::render_svg(&stats, bayes).as_bytes())?;
    Ok(())
}
