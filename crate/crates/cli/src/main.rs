//! `bubblegof` command-line tool.
//!
//! Exit codes: 0 success, 2 malformed input, 3 invalid parameters.

mod input;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bubblegof::curves::bubble_value;
use bubblegof::gkdist::{GkConfig, GkDist, TableCache};
use bubblegof::psort::{partial_bubble_sort, Sample, SortLevel};
use bubblegof::simlab::{
    example1_hidden_sort, example2_queue, null_statistic_distribution, power_csv, rep_rng, sub_seed,
    QueueConfig, SimConfig,
};
use bubblegof::testkit::{bubble_sort_test, ks_test, parse_distribution, ww_runs_test, DistributionSpec, TestReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Param(String),
    #[error("{0}")]
    Output(String),
    #[error(transparent)]
    Core(#[from] bubblegof::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Output(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Param(_) | CliError::Core(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "bubblegof", version, about = "Goodness-of-fit tests based on partial bubble sorting")]
struct Cli {
    /// Base seed for every random draw (default 0); echoed in test reports.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo runs (1 = sequential, 0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the bubble sort test on one numeric column.
    Test(TestArgs),
    /// Evaluate the null distribution.
    Dist(DistArgs),
    /// Tabulate quantiles of the null distribution.
    Table(TableArgs),
    /// Simulate the finite-sample null law of the statistic.
    Simulate(SimulateArgs),
    /// Run a power study.
    Power(PowerArgs),
    /// Emit partially sorted samples and the limiting curve for plotting.
    Sortviz(SortvizArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct TestArgs {
    /// CSV file with one numeric column, or `-` for stdin.
    input: String,
    /// Null distribution, e.g. `normal(0,1)` or `empirical(path.csv)`.
    #[arg(long, default_value = "uniform(0,1)")]
    f0: String,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Also run the Kolmogorov–Smirnov test.
    #[arg(long)]
    ks: bool,
    /// Also run the Wald–Wolfowitz runs test.
    #[arg(long)]
    ww: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("query").required(true))]
struct DistArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long, group = "query")]
    cdf: Option<f64>,
    #[arg(long, group = "query")]
    quantile: Option<f64>,
    #[arg(long, group = "query")]
    pvalue: Option<f64>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0])]
    betas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.95, 0.99])]
    probs: Vec<f64>,
    /// Output file, or `-` for stdout.
    #[arg(long, short, default_value = "-")]
    output: PathBuf,
    /// Cache directory (defaults to $BUBBLEGOF_CACHE_DIR or the user cache).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Compute without reading or writing the cache.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    beta: Vec<f64>,
    #[arg(long, default_value_t = 30_000)]
    reps: usize,
    #[arg(long, default_value = "uniform(0,1)")]
    f0: String,
    /// Number of evaluation points per beta.
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, short, default_value = "-")]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    /// Data sorted by the magnitude of a correlated hidden column.
    Example1,
    /// Service times from a min-or-max scheduling queue.
    Example2,
}

#[derive(Debug, Args)]
struct PowerArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// Correlations (example1) or log-arrival spreads (example2).
    #[arg(long, value_delimiter = ',', required = true)]
    params: Vec<f64>,
    /// Sample size (example1) or number of jobs (example2).
    #[arg(long)]
    n: Option<usize>,
    /// Sorting levels; defaults to 0.05, 0.10, ..., 1.
    #[arg(long, value_delimiter = ',')]
    betas: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, short, default_value = "-")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SortvizArgs {
    /// Sample to sort; drawn from `--f0` when absent.
    #[arg(long)]
    input: Option<String>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value = "normal(0,1)")]
    f0: String,
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0])]
    beta: Vec<f64>,
    /// Points on each limiting curve.
    #[arg(long, default_value_t = 200)]
    curve_points: usize,
    #[arg(long, short, default_value = "-")]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bubblegof: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (seed, workers) = (cli.seed.unwrap_or(0), cli.workers);
    match cli.command {
        Command::Test(a) => cmd_test(a, cli.seed),
        Command::Dist(a) => cmd_dist(a),
        Command::Table(a) => cmd_table(a),
        Command::Simulate(a) => cmd_simulate(a, seed, workers),
        Command::Power(a) => cmd_power(a, seed, workers),
        Command::Sortviz(a) => cmd_sortviz(a, seed),
    }
}

fn distribution(spec: &str) -> Result<DistributionSpec> {
    parse_distribution(spec).map_err(CliError::from)
}

fn check_beta(beta: f64) -> Result<()> {
    SortLevel::new(beta).map(|_| ()).map_err(CliError::from)
}

fn cmd_test(a: TestArgs, seed: Option<u64>) -> Result<()> {
    check_beta(a.beta)?;
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Param(format!("alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let f0 = distribution(&a.f0)?;
    let sample = Sample::new(input::read_column(&a.input)?)?;
    let mut reports = vec![bubble_sort_test(&sample, &f0, a.beta, a.alpha)?];
    if a.ks {
        reports.push(ks_test(&sample, &f0, a.alpha)?);
    }
    if a.ww {
        reports.push(ww_runs_test(&sample, a.alpha)?);
    }
    let reports: Vec<TestReport> = reports.into_iter().map(|r| r.with_seed(seed)).collect();
    for r in &reports {
        for w in &r.warnings {
            eprintln!("warning: {w}");
        }
    }
    let text = match a.format {
        Format::Json => reports
            .iter()
            .map(|r| serde_json::to_string(r).expect("report serializes") + "\n")
            .collect(),
        Format::Csv => reports_csv(&reports),
    };
    print!("{text}");
    Ok(())
}

fn reports_csv(reports: &[TestReport]) -> String {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["test_name", "n", "beta", "statistic", "p_value", "alpha", "reject", "seed", "f0"])
        .expect("in-memory write");
    for r in reports {
        w.write_record([
            r.test_name.clone(),
            r.n.to_string(),
            opt(r.beta.map(|b| b.to_string())),
            r.statistic.to_string(),
            r.p_value.to_string(),
            r.alpha.to_string(),
            r.reject.to_string(),
            opt(r.seed.map(|s| s.to_string())),
            opt(r.f0.clone()),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8")
}

/// `%.{digits}g` formatting.
fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{e}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cmd_dist(a: DistArgs) -> Result<()> {
    let dist = GkDist::new(a.beta)?;
    let value = if let Some(x) = a.cdf {
        dist.cdf(x)?
    } else if let Some(p) = a.quantile {
        dist.quantile(p)?
    } else if let Some(d) = a.pvalue {
        dist.pvalue(d)?
    } else {
        unreachable!("clap requires one query")
    };
    println!("{}", significant(value, 10));
    Ok(())
}

fn cmd_table(a: TableArgs) -> Result<()> {
    let config = GkConfig::default();
    let table = if a.no_cache {
        bubblegof::gkdist::tabulate(&a.betas, &a.probs, config)?
    } else {
        let cache = a.cache_dir.map(TableCache::new).unwrap_or_else(TableCache::from_env);
        cache.tabulate(&a.betas, &a.probs, config)?
    };
    input::write_output(&a.output, table.to_csv_string().as_bytes())
}

fn cmd_simulate(a: SimulateArgs, seed: u64, workers: usize) -> Result<()> {
    if a.points < 2 {
        return Err(CliError::Param("need at least two evaluation points".into()));
    }
    let f0 = distribution(&a.f0)?;
    let mut cfg = SimConfig::new(a.n, a.beta.clone(), a.reps);
    cfg.base_seed = seed;
    cfg.workers = workers;
    let results = null_statistic_distribution(&cfg, &f0)?;
    let mut out = String::from("beta,x,empirical_cdf,gk_cdf,sup_distance\n");
    for res in &results {
        let dist = GkDist::new(res.beta)?;
        let top = res.statistics.values().last().copied().unwrap_or(0.0);
        let upper = top.max(dist.quantile(0.999)?);
        for i in 0..a.points {
            let x = upper * i as f64 / (a.points - 1) as f64;
            writeln!(
                out,
                "{},{},{},{},{}",
                res.beta,
                x,
                res.statistics.eval(x),
                dist.cdf(x)?,
                res.sup_distance
            )
            .expect("string write");
        }
    }
    input::write_output(&a.output, out.as_bytes())
}

fn default_betas() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 20.0).collect()
}

fn cmd_power(a: PowerArgs, seed: u64, workers: usize) -> Result<()> {
    let betas = if a.betas.is_empty() { default_betas() } else { a.betas };
    let mut results = Vec::with_capacity(a.params.len());
    for (i, &param) in a.params.iter().enumerate() {
        let mut cfg = SimConfig::new(0, betas.clone(), a.reps);
        cfg.alpha = a.alpha;
        cfg.workers = workers;
        cfg.base_seed = sub_seed(seed, i as u64);
        let res = match a.experiment {
            Experiment::Example1 => {
                cfg.n = a.n.unwrap_or(1000);
                example1_hidden_sort(&cfg, param)?
            }
            Experiment::Example2 => {
                let q = QueueConfig::new(a.n.unwrap_or(100), param)?;
                cfg.n = q.n_jobs;
                example2_queue(&cfg, &q)?
            }
        };
        results.push(res);
    }
    input::write_output(&a.output, power_csv(&results).as_bytes())
}

fn cmd_sortviz(a: SortvizArgs, seed: u64) -> Result<()> {
    for &b in &a.beta {
        check_beta(b)?;
    }
    let f0 = distribution(&a.f0)?;
    let data = match &a.input {
        Some(path) => input::read_column(path)?,
        None => {
            if a.n == 0 {
                return Err(CliError::Param("sample size must be positive".into()));
            }
            let mut rng = rep_rng(seed, 0);
            (0..a.n).map(|_| f0.sample(&mut rng)).collect()
        }
    };
    let n = data.len();
    let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = String::from("series,beta,index,value\n");
    for &beta in &a.beta {
        let k = SortLevel::new(beta)?.iterations(n);
        for (i, v) in partial_bubble_sort(&data, k).iter().enumerate() {
            writeln!(out, "sample,{beta},{},{v}", i + 1).expect("string write");
        }
        for j in 0..a.curve_points {
            let x = if a.curve_points == 1 {
                hi
            } else {
                lo + (hi - lo) * j as f64 / (a.curve_points - 1) as f64
            };
            let idx = n as f64 * bubble_value(f0.cdf(x), beta);
            writeln!(out, "curve,{beta},{idx},{x}").expect("string write");
        }
    }
    input::write_output(&a.output, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(1.6276236115189502, 10), "1.627623612");
        assert_eq!(significant(0.0, 10), "0");
        assert_eq!(significant(0.5, 10), "0.5");
        assert_eq!(significant(1.5528071606e-8, 10), "1.552807161e-8");
        assert_eq!(significant(123456.0, 10), "123456");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Input("x".into()).exit_code(), 2);
        assert_eq!(CliError::Param("x".into()).exit_code(), 3);
        assert_eq!(CliError::Core(bubblegof::Error::EmptySample).exit_code(), 2);
    }
}
