//! Subcommands of the `heterogen` binary.
//!
//! Every command that writes files writes them atomically (temporary file in
//! the output directory, then rename) and finishes with a `manifest.json`
//! listing the configuration, seeds and outputs.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use heterogen::calibrate::{generate_with_target_using, CalibrationReference};
use heterogen::experiments::{self, ExperimentConfig, ExperimentKind};
use heterogen::heterophily::{expected_heterophily_trace, HeterophilyReport};
use heterogen::io::{self as hio, FeatureFormat};
use heterogen::signal::{validate_dimension, PolyFilter};
use heterogen::{dataset, Error, GraphSample, Graphon};

pub const MANIFEST_SCHEMA: &str = "heterogen/1";

/// Exit code for configuration, parse and shape errors.
pub const EXIT_CONFIG: i32 = 1;
/// Exit code for filesystem errors.
pub const EXIT_IO: i32 = 2;
/// Exit code for numerical failures.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "heterogen", version, about = "Graphon graphs with controllable feature heterophily")]
pub struct Cli {
    /// Suppress progress messages.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph and filtered features and write them to a directory.
    Generate(GenerateArgs),
    /// Measure the heterophily of an edge list and a feature file.
    Measure(MeasureArgs),
    /// Print the limiting heterophily of a graphon and a filter.
    Limit(LimitArgs),
    /// Choose the filter gain for a heterophily target and verify it on a sample.
    Calibrate(CalibrateArgs),
    /// Run a concentration or convergence study.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = ["csv", "bin"])]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Edge list CSV (`u,v`).
    #[arg(long)]
    pub graph: PathBuf,
    /// Feature file; `.bin` is read as binary, anything else as CSV.
    #[arg(long)]
    pub features: PathBuf,
    /// Filter JSON (inline or path); adds the exact `mu_n` to the report.
    #[arg(long)]
    pub filter: Option<String>,
    /// Graphon JSON (inline or path); with `--filter`, adds the graphon limit.
    #[arg(long)]
    pub graphon: Option<String>,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    /// Graphon JSON, inline or a path.
    #[arg(long)]
    pub graphon: String,
    /// Filter JSON, inline or a path.
    #[arg(long)]
    pub filter: String,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Also write the verification dataset here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = ["csv", "bin"])]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_parser = ["concentration", "convergence"])]
    pub kind: String,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `base_seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write a log–log SVG of the deviations.
    #[arg(long)]
    pub plot: bool,
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => EXIT_IO,
            Error::Csv(c) if c.is_io_error() => EXIT_IO,
            Error::EigenCapExceeded { .. }
            | Error::UnreachableTarget { .. }
            | Error::InternalConsistency(_)
            | Error::MissingLatents => EXIT_NUMERIC,
            _ => EXIT_CONFIG,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn json_arg(arg: &str) -> CliResult<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        read_text(Path::new(arg))
    }
}

fn parse_config<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<(T, Value)> {
    let text = read_text(path)?;
    let echo: Value =
        serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let parsed = serde_json::from_value(echo.clone())
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    Ok((parsed, echo))
}

/// Writes `path` through a temporary file in the same directory.
fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> heterogen::Result<()>) -> CliResult<u64> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w)?;
        w.flush().map_err(|e| io_error(path, e))?;
    }
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    let bytes = fs::metadata(path).map_err(|e| io_error(path, e))?.len();
    Ok(bytes)
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: u64,
}

/// Self-description written next to every set of outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub command: String,
    pub library_version: String,
    pub config: Value,
    pub seeds: Value,
    pub outputs: Vec<OutputFile>,
    pub duration_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<Value>,
}

struct OutputSet {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl OutputSet {
    fn new(dir: &Path) -> CliResult<Self> {
        ensure_dir(dir)?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, write: impl FnOnce(&mut dyn Write) -> heterogen::Result<()>) -> CliResult<()> {
        let bytes = write_atomic(&self.dir.join(name), write)?;
        self.files.push(OutputFile {
            file: name.to_string(),
            bytes,
        });
        Ok(())
    }

    fn finish(
        self,
        command: &str,
        config: Value,
        seeds: Value,
        started: Instant,
        report: Option<Value>,
    ) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            schema: MANIFEST_SCHEMA.to_string(),
            command: command.to_string(),
            library_version: heterogen::VERSION.to_string(),
            config,
            seeds,
            outputs: self.files,
            duration_secs: started.elapsed().as_secs_f64(),
            report,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_atomic(&self.dir.join("manifest.json"), |w| {
            w.write_all(text.as_bytes())?;
            w.write_all(b"\n")?;
            Ok(())
        })?;
        Ok(manifest)
    }
}

fn write_dataset(out: &mut OutputSet, data: &dataset::Dataset, format: FeatureFormat) -> CliResult<()> {
    out.write("edges.csv", |w| hio::write_edges(&data.sample, w))?;
    let name = format!("features.{}", format.extension());
    out.write(&name, |w| hio::write_features(&data.features, format, w))?;
    let latents = data.sample.latents().unwrap_or_default();
    out.write("latents.csv", |w| hio::write_latents(latents, w))?;
    Ok(())
}

fn feature_format(flag: Option<&str>, config: Option<&str>) -> CliResult<FeatureFormat> {
    flag.or(config)
        .unwrap_or("csv")
        .parse()
        .map_err(|e: Error| config_error(e.to_string()))
}

fn default_alpha() -> f64 {
    2.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub graphon: Graphon,
    pub filter: PolyFilter,
    pub n: usize,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub format: Option<String>,
}

pub fn cmd_generate(args: &GenerateArgs) -> CliResult<RunManifest> {
    let started = Instant::now();
    let (cfg, echo): (GenerateConfig, Value) = parse_config(&args.config)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let d = cfg.d.unwrap_or(cfg.n);
    let format = feature_format(args.format.as_deref(), cfg.format.as_deref())?;
    if cfg.n > 0 && d > 0 {
        validate_dimension(cfg.n, d, cfg.alpha)?;
    }
    info!("sampling n = {}, d = {d}, seed = {seed}", cfg.n);
    let data = dataset::generate(&cfg.graphon, &cfg.filter, cfg.n, d, seed)?;
    let report = HeterophilyReport::measure(&data.sample, &data.features)?
        .with_feature_seed(data.feature_seed)
        .with_limit(cfg.graphon.limit_heterophily(&cfg.filter));

    let mut out = OutputSet::new(&args.out)?;
    write_dataset(&mut out, &data, format)?;
    let seeds = serde_json::json!({ "seed": seed, "graph": data.graph_seed, "features": data.feature_seed });
    let report = serde_json::to_value(&report).expect("report serializes");
    out.finish("generate", echo, seeds, started, Some(report))
}

pub fn cmd_measure(args: &MeasureArgs) -> CliResult<HeterophilyReport> {
    let features = hio::read_features_file(&args.features)?;
    let file = fs::File::open(&args.graph).map_err(|e| io_error(&args.graph, e))?;
    let edges = hio::read_edges(file)?;
    let sample = GraphSample::from_edges(features.n(), edges)?;
    let mut report = HeterophilyReport::measure(&sample, &features)?;
    if let Some(filter) = &args.filter {
        let filter = PolyFilter::from_json(&json_arg(filter)?)?;
        report = report.with_mu(expected_heterophily_trace(&sample, &filter)?);
        if let Some(graphon) = &args.graphon {
            let graphon = Graphon::from_json(&json_arg(graphon)?)?;
            report = report.with_limit(graphon.limit_heterophily(&filter));
        }
    } else if args.graphon.is_some() {
        return Err(config_error("--graphon needs --filter"));
    }
    Ok(report)
}

pub fn cmd_limit(args: &LimitArgs) -> CliResult<f64> {
    let graphon = Graphon::from_json(&json_arg(&args.graphon)?)?;
    let filter = PolyFilter::from_json(&json_arg(&args.filter)?)?;
    Ok(graphon.limit_heterophily(&filter))
}

fn default_verification_n() -> usize {
    1000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    pub graphon: Graphon,
    pub filter: PolyFilter,
    pub target_h: f64,
    #[serde(default = "default_verification_n")]
    pub n: usize,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub reference: CalibrationReference,
    #[serde(default)]
    pub format: Option<String>,
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> CliResult<heterogen::CalibrationResult> {
    let started = Instant::now();
    let (cfg, echo): (CalibrateConfig, Value) = parse_config(&args.config)?;
    let seed = args.seed.unwrap_or(cfg.seed);
    let d = cfg.d.unwrap_or(cfg.n);
    let format = feature_format(args.format.as_deref(), cfg.format.as_deref())?;
    let (data, result) =
        generate_with_target_using(&cfg.graphon, &cfg.filter, cfg.target_h, cfg.n, d, seed, cfg.reference)?;
    info!(
        "gain {} gives limit {}; verification sample measures {:?}",
        result.gain, result.h_limit_achieved, result.h_empirical_check
    );
    if let Some(dir) = &args.out {
        let mut out = OutputSet::new(dir)?;
        write_dataset(&mut out, &data, format)?;
        out.write("calibration.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &result)?;
            Ok(())
        })?;
        let seeds = serde_json::json!({ "seed": seed, "graph": data.graph_seed, "features": data.feature_seed });
        let report = serde_json::to_value(&result).expect("calibration serializes");
        out.finish("calibrate", echo, seeds, started, Some(report))?;
    }
    Ok(result)
}

pub fn cmd_experiment(args: &ExperimentArgs) -> CliResult<RunManifest> {
    let started = Instant::now();
    let kind: ExperimentKind = args.kind.parse()?;
    let (mut cfg, echo): (ExperimentConfig, Value) = parse_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    cfg.validate()?;
    info!("running {kind:?} over sizes {:?} with {} trials", cfg.sizes, cfg.trials);
    let rows = experiments::run(kind, &cfg)?;
    let mut out = OutputSet::new(&args.out)?;
    let csv = experiments::rows_to_csv(&rows);
    out.write("results.csv", |w| Ok(w.write_all(csv.as_bytes())?))?;
    if args.plot {
        let svg = experiments::rows_to_svg(&rows, &format!("{} of feature heterophily", args.kind));
        out.write("plot.svg", |w| Ok(w.write_all(svg.as_bytes())?))?;
    }
    let seeds = serde_json::json!({ "base_seed": cfg.base_seed });
    let report = serde_json::to_value(&rows).expect("rows serialize");
    out.finish("experiment", echo, seeds, started, Some(report))
}

/// Runs one parsed invocation, printing its result to stdout.
pub fn run(cli: &Cli) -> CliResult<()> {
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    let print = |out: &mut dyn Write, text: &str| -> CliResult<()> {
        writeln!(out, "{text}").map_err(|e| io_error(Path::new("<stdout>"), e))
    };
    match &cli.command {
        Command::Generate(args) => {
            let manifest = cmd_generate(args)?;
            if !cli.quiet {
                print(&mut stdout, &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
            }
        }
        Command::Measure(args) => print(&mut stdout, &cmd_measure(args)?.to_json())?,
        Command::Limit(args) => print(&mut stdout, &cmd_limit(args)?.to_string())?,
        Command::Calibrate(args) => {
            let result = cmd_calibrate(args)?;
            print(&mut stdout, &serde_json::to_string_pretty(&result).expect("result serializes"))?;
        }
        Command::Experiment(args) => {
            let manifest = cmd_experiment(args)?;
            if !cli.quiet {
                print(&mut stdout, &serde_json::to_string_pretty(&manifest.outputs).expect("outputs serialize"))?;
            }
        }
    }
    Ok(())
}
