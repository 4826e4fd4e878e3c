//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, invalid
//! parameters or config values), 2 on data errors (unreadable or malformed
//! input files).

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::compression::{compress_pmf, ClampRange};
use crate::distributions::{gen_gaussian_pmf, gen_uniform_pmf, GaussianParams, RngSeed, ScorePmf};
use crate::error::Error;
use crate::fmt::sig6;
use crate::harness::{
    run_experiment, run_experiment_with_threads, validate_k_set, winner_position, write_report,
    ExperimentConfig, Model, ReportFormat, SchemeTag,
};
use crate::ingestion::{
    analyze_dataset, parse_ratings_csv, write_dataset_report, write_item_details,
};
use crate::theory::{floor_error_continuous, rounding_error_continuous, two_point_spec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ratescale",
    about = "Rating-scale compression error analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print one generated score distribution as `score,mass` CSV.
    Gen(GenArgs),
    /// Compress one distribution read from a `score,mass` CSV file.
    Analyze(AnalyzeArgs),
    /// Evaluate the closed-form errors for a continuous distribution.
    Theory(TheoryArgs),
    /// Run a Monte Carlo victory-count experiment from a JSON config.
    Simulate(SimulateArgs),
    /// Analyze a per-item rating dataset.
    Dataset(DatasetArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Generative model: uniform or gaussian.
    #[arg(long, value_parser = parse_model)]
    model: Model,
    /// Number of score levels.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian mean.
    #[arg(long)]
    mu: Option<f64>,
    /// Gaussian standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Gaussian draws per distribution.
    #[arg(long)]
    sample_count: Option<u64>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// CSV file with header `score,mass` and 0-based scores.
    #[arg(long)]
    pmf: PathBuf,
    /// Comma-separated, strictly increasing k values.
    #[arg(long, value_parser = parse_k_list)]
    k: KList,
    #[arg(long, default_value = "floor", value_parser = parse_scheme)]
    scheme: SchemeTag,
    /// Clamp the regions of the largest k, as `lo:hi`.
    #[arg(long, value_parser = parse_range)]
    clamp: Option<(usize, usize)>,
}

#[derive(Debug, Args)]
struct TheoryArgs {
    /// Distribution family; only `two-point` is available.
    #[arg(long, value_parser = ["two-point"])]
    spec: String,
    #[arg(long, allow_negative_numbers = true)]
    x1: f64,
    /// Probability mass at x1.
    #[arg(long)]
    p1: f64,
    #[arg(long, allow_negative_numbers = true)]
    x2: f64,
    /// Upper end of the support (0, n).
    #[arg(long, default_value_t = 100.0)]
    n: f64,
    #[arg(long, value_parser = parse_k_list)]
    k: KList,
    #[arg(long, default_value = "floor", value_parser = parse_scheme)]
    scheme: SchemeTag,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,
    /// Worker threads (defaults to all cores; results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Ratings CSV (`item_id,rating` or `item_id,rating,count`).
    #[arg(long = "in")]
    input: PathBuf,
    /// Inclusive rating scale as `min:max`, e.g. `1:5`.
    #[arg(long, value_parser = parse_scale, allow_hyphen_values = true)]
    scale: (i64, i64),
    #[arg(long, value_parser = parse_k_list)]
    k: KList,
    #[arg(long, default_value = "floor", value_parser = parse_scheme)]
    scheme: SchemeTag,
    /// Rating value that marks a missing rating, e.g. -1.
    #[arg(long, allow_negative_numbers = true)]
    missing: Option<i64>,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-item rows `item_id,k,error,winner_flag` to this file.
    #[arg(long)]
    details: Option<PathBuf>,
}

#[derive(Debug, Clone)]
struct KList(Vec<usize>);

fn parse_k_list(s: &str) -> Result<KList, String> {
    let ks = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{p}` is not a k value"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err("k values must be strictly increasing without duplicates".to_string());
    }
    Ok(KList(ks))
}

fn parse_model(s: &str) -> Result<Model, String> {
    match s {
        "uniform" => Ok(Model::Uniform),
        "gaussian" => Ok(Model::Gaussian),
        _ => Err("expected uniform or gaussian".to_string()),
    }
}

fn parse_scheme(s: &str) -> Result<SchemeTag, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}` is not of the form lo:hi"))?;
    let parse = |p: &str| {
        p.trim()
            .parse::<T>()
            .map_err(|_| format!("`{p}` is not an integer"))
    };
    Ok((parse(a)?, parse(b)?))
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    parse_pair(s)
}

fn parse_scale(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = parse_pair(s)?;
    if lo >= hi {
        return Err(format!("scale `{s}` needs min < max"));
    }
    Ok((lo, hi))
}

/// Failure of one CLI run, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn data(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_DATA,
            message: e.to_string(),
        }
    }

    /// Invalid parameters are the caller's fault; everything else is data.
    fn classify(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Self::usage(e),
            _ => Self::data(e),
        }
    }
}

type CliResult = Result<(), Failure>;

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn dispatch<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return EXIT_OK;
            }
            let rendered = e.render().to_string();
            let line = rendered.lines().next().unwrap_or("usage error");
            let _ = writeln!(stderr, "{line}");
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Gen(args) => gen(args, stdout),
        Command::Analyze(args) => analyze(args, stdout),
        Command::Theory(args) => theory(args, stdout),
        Command::Simulate(args) => simulate(args, stdout),
        Command::Dataset(args) => dataset(args, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message.replace('\n', " "));
            f.code
        }
    }
}

fn io_err(e: std::io::Error) -> Failure {
    Failure::data(e)
}

fn gen(args: GenArgs, out: &mut dyn Write) -> CliResult {
    let mut rng = RngSeed(args.seed).stream(0);
    let pmf = match args.model {
        Model::Uniform => gen_uniform_pmf(args.n, &mut rng),
        Model::Gaussian => {
            let defaults = GaussianParams::default();
            let params = GaussianParams {
                sample_count: args.sample_count.unwrap_or(defaults.sample_count),
                mu: args.mu.unwrap_or(defaults.mu),
                sigma: args.sigma.unwrap_or(defaults.sigma),
            };
            gen_gaussian_pmf(args.n, &params, &mut rng)
        }
    }
    .map_err(Failure::classify)?;
    writeln!(out, "score,mass").map_err(io_err)?;
    for (s, m) in pmf.mass().iter().enumerate() {
        writeln!(out, "{s},{}", sig6(*m)).map_err(io_err)?;
    }
    Ok(())
}

/// Absolute slack on the mass total of a pmf file, whose masses are
/// typically printed to six significant digits. Within it, masses are
/// renormalized.
const PMF_FILE_TOLERANCE: f64 = 1e-4;

fn read_pmf_file(path: &PathBuf) -> Result<ScorePmf, Failure> {
    let file = File::open(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let header = reader.headers().map_err(Failure::data)?.clone();
    if header.iter().map(str::trim).collect::<Vec<_>>() != ["score", "mass"] {
        return Err(Failure::data(format!(
            "{}: line 1: expected header `score,mass`",
            path.display()
        )));
    }
    let mut entries: Vec<(usize, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(Failure::data)?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str| Failure::data(format!("{}: line {line}: {what}", path.display()));
        let score: usize = record
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| bad("score is not a non-negative integer"))?;
        let mass: f64 = record
            .get(1)
            .and_then(|s| s.trim().parse().ok())
            .filter(|m: &f64| m.is_finite() && *m >= 0.0)
            .ok_or_else(|| bad("mass is not a non-negative number"))?;
        entries.push((score, mass));
    }
    let n = entries.iter().map(|(s, _)| s + 1).max().unwrap_or(0);
    let mut mass = vec![0.0; n];
    for (s, m) in entries {
        mass[s] += m;
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > PMF_FILE_TOLERANCE {
        return Err(Failure::data(format!(
            "{}: masses sum to {total}, expected 1",
            path.display()
        )));
    }
    ScorePmf::from_weights(&mass).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn analyze(args: AnalyzeArgs, out: &mut dyn Write) -> CliResult {
    let pmf = read_pmf_file(&args.pmf)?;
    let n = pmf.n();
    validate_k_set(&args.k.0, n).map_err(Failure::usage)?;
    let scheme = args.scheme.scheme();
    let a_f = pmf.mean();
    writeln!(out, "a_f={}", sig6(a_f)).map_err(io_err)?;
    let clamp_k = *args.k.0.last().expect("validated non-empty");
    let mut errors = Vec::with_capacity(args.k.0.len());
    for &k in &args.k.0 {
        let mut compressed = compress_pmf(&pmf, k, &scheme).map_err(Failure::classify)?;
        if let (Some((lo, hi)), true) = (args.clamp, k == clamp_k) {
            compressed = crate::compression::clamp_regions(&compressed, ClampRange::new(lo, hi))
                .map_err(Failure::usage)?;
        }
        let a_k = compressed.mean();
        let e = scheme.error(a_f, a_k, n, k).map_err(Failure::classify)?;
        writeln!(out, "a_{k}={}", sig6(a_k)).map_err(io_err)?;
        writeln!(out, "e_{k}={}", sig6(e)).map_err(io_err)?;
        errors.push(e);
    }
    let best = winner_position(&errors).map_err(Failure::usage)?;
    writeln!(out, "best_k={}", args.k.0[best]).map_err(io_err)?;
    Ok(())
}

fn theory(args: TheoryArgs, out: &mut dyn Write) -> CliResult {
    let spec = two_point_spec(args.x1, args.p1, args.x2, args.n).map_err(Failure::usage)?;
    for &k in &args.k.0 {
        let e = match args.scheme {
            SchemeTag::Floor => floor_error_continuous(&spec, k),
            SchemeTag::Rounding => rounding_error_continuous(&spec, k),
        }
        .map_err(Failure::usage)?;
        writeln!(out, "e_{k}={}", sig6(e)).map_err(io_err)?;
    }
    Ok(())
}

fn read_text(path: &PathBuf) -> Result<String, Failure> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    Ok(text)
}

/// Writes `body` to `--out` when given, else to stdout.
fn emit(
    out_path: &Option<PathBuf>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> crate::error::Result<()>,
) -> CliResult {
    match out_path {
        Some(path) => {
            let mut file = File::create(path)
                .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
            body(&mut file).map_err(Failure::data)
        }
        None => body(stdout).map_err(Failure::data),
    }
}

fn simulate(args: SimulateArgs, stdout: &mut dyn Write) -> CliResult {
    let text = read_text(&args.config)?;
    let config = ExperimentConfig::from_json(&text).map_err(|e| match e {
        Error::Json(ref j) if j.is_syntax() || j.is_eof() => {
            Failure::data(format!("{}: {e}", args.config.display()))
        }
        Error::Json(_) | Error::InvalidParameter(_) => {
            Failure::usage(format!("{}: {e}", args.config.display()))
        }
        other => Failure::data(other),
    })?;
    let report = match args.threads {
        Some(0) => return Err(Failure::usage("--threads must be at least 1")),
        Some(t) => run_experiment_with_threads(&config, t),
        None => run_experiment(&config),
    }
    .map_err(Failure::classify)?;
    emit(&args.out, stdout, |w| write_report(&report, args.format, w))
}

fn dataset(args: DatasetArgs, stdout: &mut dyn Write) -> CliResult {
    let (lo, hi) = args.scale;
    let file = File::open(&args.input)
        .map_err(|e| Failure::data(format!("{}: {e}", args.input.display())))?;
    let data = parse_ratings_csv(BufReader::new(file), lo, hi, args.missing)
        .map_err(|e| Failure::data(format!("{}: {e}", args.input.display())))?;
    let report = analyze_dataset(&data, &args.k.0, args.scheme).map_err(Failure::classify)?;
    if let Some(path) = &args.details {
        let mut file =
            File::create(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
        write_item_details(&report, &mut file).map_err(Failure::data)?;
    }
    emit(&args.out, stdout, |w| {
        write_dataset_report(&report, args.format, false, w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("ratescale").chain(args.iter().copied());
        let code = dispatch(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn k_list_parsing() {
        assert_eq!(parse_k_list("2,3,10").unwrap().0, vec![2, 3, 10]);
        assert!(parse_k_list("3,2").is_err());
        assert!(parse_k_list("2,2").is_err());
        assert!(parse_k_list("2,x").is_err());
    }

    #[test]
    fn scale_parsing() {
        assert_eq!(parse_scale("1:5").unwrap(), (1, 5));
        assert_eq!(parse_scale("0:19").unwrap(), (0, 19));
        assert!(parse_scale("5:1").is_err());
        assert!(parse_scale("15").is_err());
    }

    #[test]
    fn theory_prints_closed_forms() {
        let (code, out, _) = run(&[
            "theory",
            "--spec",
            "two-point",
            "--x1",
            "30",
            "--p1",
            "0.5",
            "--x2",
            "60",
            "--n",
            "100",
            "--k",
            "2,3",
            "--scheme",
            "floor",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "e_2=5.00000\ne_3=20.0000\n");
    }

    #[test]
    fn duplicate_k_is_a_usage_error() {
        let (code, _, err) = run(&[
            "theory",
            "--spec",
            "two-point",
            "--x1",
            "30",
            "--p1",
            "0.5",
            "--x2",
            "60",
            "--k",
            "2,2",
        ]);
        assert_eq!(code, EXIT_USAGE);
        assert_eq!(err.lines().count(), 1);
        assert!(err.contains("--k"));
    }

    #[test]
    fn unknown_flag_is_rejected() {
        let (code, _, err) = run(&["gen", "--model", "uniform", "--bogus"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--bogus"));
    }

    #[test]
    fn gen_is_deterministic() {
        let a = run(&["gen", "--model", "gaussian", "--n", "100", "--seed", "3"]);
        let b = run(&["gen", "--model", "gaussian", "--n", "100", "--seed", "3"]);
        assert_eq!(a.0, 0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.1.lines().count(), 101);
    }
}
