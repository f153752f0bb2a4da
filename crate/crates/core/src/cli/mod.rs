//! Command-line front end.
//!
//! Every subcommand writes either CSV (fixed headers) or a single JSON
//! document to stdout. Failures print one JSON error record on stderr and
//! exit with 2 (input or configuration) or 3 (numerical).

mod ingest;
mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use ingest::{
    ingest_csv, ingest_reader, write_dataset_csv, InterceptPolicy, ResponseColumn, INTERCEPT_NAME,
};
pub use output::Format;

use crate::bayes_factor::{appendix_oracle_log_bf, log_bf, BfMethod};
use crate::error::{Error, Result};
use crate::evaluation::{
    consistency_sim, error_curve, ConsistencyConfig, Scenario, TYPE1_TABLE_GRID,
};
use crate::linear::{beta_ratio, Dataset, ModelSpec};
use crate::parallel::Exec;
use crate::selection::{mh_search, posterior_table, Method, Scheme, SearchConfig, ENUMERATION_CAP};
use output::{
    BfOutput, BfRecord, ConsistencyOutput, ErrorRateRecord, ErrorsOutput, SearchOutput,
    SearchRecord, SelectOutput, SelectRecord,
};

/// Seed used when neither `--seed` nor `INTRINSIC_SELECT_SEED` is given.
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const SEED_ENV: &str = "INTRINSIC_SELECT_SEED";

/// The oracle is O(n³) per integrand evaluation; `bf` skips it above this size.
pub const ORACLE_MAX_N: usize = 200;

#[derive(Debug, Parser)]
#[command(
    name = "intrinsic-select",
    version,
    about = "Objective Bayesian variable selection for linear regression with intrinsic priors"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Random seed (decimal or 0x-prefixed hex).
    #[arg(long, env = SEED_ENV, default_value = "0x5EED", value_parser = parse_seed, global = true)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Posterior probabilities of every model (stochastic search above the enumeration cap).
    Select(SelectArgs),
    /// Bayes factors of one nested pair under every method.
    Bf(BfArgs),
    /// Metropolis–Hastings search over the model space.
    Search(SearchArgs),
    /// Exact Type I error of the decision rule on a (j, n) grid.
    Errors(ErrorsArgs),
    /// Type I error and power curves over a range of n.
    Power(PowerArgs),
    /// Simulated posterior of the true model across sample sizes.
    Consistency(ConsistencyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Intrinsic,
    Schwarz,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Intrinsic => Method::Intrinsic,
            MethodArg::Schwarz => Method::Schwarz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Vsa,
    Vsb,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Vsa => Scheme::Vsa,
            SchemeArg::Vsb => Scheme::Vsb,
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row and numeric cells.
    #[arg(long)]
    pub input: PathBuf,

    /// Response column, by header name or 0-based index.
    #[arg(long, default_value = "y")]
    pub response: ResponseColumn,

    /// Fail instead of prepending an intercept when no all-ones column exists.
    #[arg(long)]
    pub no_intercept_guard: bool,
}

impl DataArgs {
    fn load(&self) -> Result<Dataset> {
        let policy = if self.no_intercept_guard {
            InterceptPolicy::Require
        } else {
            InterceptPolicy::Prepend
        };
        ingest_csv(&self.input, &self.response, policy)
    }
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Intrinsic)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Vsb)]
    pub scheme: SchemeArg,
    /// Print only the best `top` models.
    #[arg(long)]
    pub top: Option<usize>,
    /// Chain length used when the model space is too large to enumerate.
    #[arg(long, default_value_t = 10_000)]
    pub chain_length: usize,
}

#[derive(Debug, Args)]
pub struct BfArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Inner model covariates (names or design indices, comma separated); intercept implied.
    #[arg(long, value_delimiter = ',')]
    pub inner: Vec<String>,
    /// Outer model covariates; defaults to every covariate.
    #[arg(long, value_delimiter = ',')]
    pub outer: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Intrinsic)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Vsb)]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 10_000)]
    pub chain_length: usize,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct ErrorsArgs {
    /// Model sizes; with `--n` omitted too, the published grid is used.
    #[arg(long, value_delimiter = ',')]
    pub j: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Restrict to one method (default: both).
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long, default_value_t = 5)]
    pub j: usize,
    #[arg(long, default_value_t = 6)]
    pub n_min: usize,
    #[arg(long, default_value_t = 40)]
    pub n_max: usize,
    #[arg(long, default_value_t = 10.0)]
    pub lambda: f64,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    /// Two-group slope design with the slope active.
    Slope,
    /// Same design, intercept-only truth.
    Null,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[arg(long, value_enum, default_value_t = ScenarioArg::Slope)]
    pub scenario: ScenarioArg,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// True intercept and slope.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0])]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [20usize, 50, 100, 500])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Intrinsic)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Vsb)]
    pub scheme: SchemeArg,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse::<u64>(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

fn methods(choice: Option<MethodArg>) -> Vec<Method> {
    match choice {
        Some(m) => vec![m.into()],
        None => vec![Method::Intrinsic, Method::Schwarz],
    }
}

/// Resolve a covariate list against the dataset's column names.
fn resolve_model(dataset: &Dataset, items: &[String]) -> Result<ModelSpec> {
    let names = dataset.column_names();
    let mut idx = vec![0usize];
    for item in items.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let i = match names.iter().position(|n| n == item) {
            Some(i) => i,
            None => item
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("unknown column '{item}'")))?,
        };
        if i >= dataset.k() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: dataset.k(),
            });
        }
        idx.push(i);
    }
    idx.sort_unstable();
    idx.dedup();
    ModelSpec::new(idx)
}

/// Execute a parsed command, writing its output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let format = cli.format;
    match &cli.command {
        Command::Select(a) => {
            let ds = a.data.load()?;
            if ds.k() > ENUMERATION_CAP {
                let cfg = SearchConfig {
                    chain_length: a.chain_length,
                    seed: cli.seed,
                    top: a.top.unwrap_or(10),
                };
                return run_search(&ds, &cfg, a.method.into(), a.scheme.into(), format, out);
            }
            let table = posterior_table(&ds, a.method.into(), a.scheme.into(), Exec::default())?;
            let limit = a.top.unwrap_or(table.rows.len());
            let rows = table
                .rows
                .iter()
                .take(limit)
                .enumerate()
                .map(|(r, row)| SelectRecord::new(r + 1, &ds, row))
                .collect();
            SelectOutput {
                command: "select",
                scheme: table.scheme,
                method: table.method,
                n: ds.n(),
                k: ds.k(),
                rows,
            }
            .write(format, out)
        }
        Command::Bf(a) => {
            let ds = a.data.load()?;
            let inner = resolve_model(&ds, &a.inner)?;
            let outer = match &a.outer {
                Some(items) => resolve_model(&ds, items)?,
                None => ModelSpec::full(ds.k()),
            };
            let b = beta_ratio(&ds, &inner, &outer)?;
            let mut results = Vec::new();
            for m in [
                BfMethod::IntrinsicQuadrature,
                BfMethod::IntrinsicAsymptotic,
                BfMethod::Schwarz,
            ] {
                results.push(BfRecord::from(log_bf(&b, m)?));
            }
            if ds.n() <= ORACLE_MAX_N {
                results.push(BfRecord::from(appendix_oracle_log_bf(&ds, &inner, &outer)?));
            }
            BfOutput {
                command: "bf",
                n: b.n,
                i: b.i,
                j: b.j,
                inner: ds.model_names(&inner).iter().map(|s| s.to_string()).collect(),
                outer: ds.model_names(&outer).iter().map(|s| s.to_string()).collect(),
                b: b.value,
                results,
            }
            .write(format, out)
        }
        Command::Search(a) => {
            let ds = a.data.load()?;
            let cfg = SearchConfig {
                chain_length: a.chain_length,
                seed: cli.seed,
                top: a.top,
            };
            run_search(&ds, &cfg, a.method.into(), a.scheme.into(), format, out)
        }
        Command::Errors(a) => {
            let cells: Vec<(usize, usize)> = if a.j.is_empty() && a.n.is_empty() {
                let mut cells: Vec<(usize, usize)> = TYPE1_TABLE_GRID
                    .iter()
                    .flat_map(|(n, js)| js.iter().map(move |&j| (j, *n)))
                    .collect();
                cells.sort_unstable();
                cells
            } else if a.j.is_empty() || a.n.is_empty() {
                return Err(Error::Config("give both --j and --n, or neither".into()));
            } else {
                a.j.iter()
                    .flat_map(|&j| a.n.iter().map(move |&n| (j, n)))
                    .collect()
            };
            let mut rows = Vec::new();
            for (j, n) in cells {
                for m in methods(a.method) {
                    let c = error_curve(j, &[n], None, m, Exec::Sequential)?;
                    rows.push(ErrorRateRecord::new(j, m, None, &c.rows[0]));
                }
            }
            ErrorsOutput {
                command: "errors",
                rows,
            }
            .write(format, out)
        }
        Command::Power(a) => {
            if a.n_min > a.n_max {
                return Err(Error::Config(format!(
                    "--n-min {} exceeds --n-max {}",
                    a.n_min, a.n_max
                )));
            }
            let ns: Vec<usize> = (a.n_min..=a.n_max).collect();
            let curves = methods(a.method)
                .into_iter()
                .map(|m| error_curve(a.j, &ns, Some(a.lambda), m, Exec::default()))
                .collect::<Result<Vec<_>>>()?;
            let mut rows = Vec::new();
            for i in 0..ns.len() {
                for c in &curves {
                    rows.push(ErrorRateRecord::new(a.j, c.method, Some(a.lambda), &c.rows[i]));
                }
            }
            ErrorsOutput {
                command: "power",
                rows,
            }
            .write(format, out)
        }
        Command::Consistency(a) => {
            let scenario = match a.scenario {
                ScenarioArg::Slope => {
                    let alpha: [f64; 2] = a.alpha.as_slice().try_into().map_err(|_| {
                        Error::Config(format!("--alpha needs 2 values, got {}", a.alpha.len()))
                    })?;
                    Scenario::slope(a.delta, alpha, a.sigma)
                }
                ScenarioArg::Null => {
                    let intercept = *a.alpha.first().ok_or_else(|| {
                        Error::Config("--alpha needs an intercept value".into())
                    })?;
                    Scenario::slope_null(a.delta, intercept, a.sigma)
                }
            };
            let cfg = ConsistencyConfig {
                replicates: a.replicates,
                seed: cli.seed,
                method: a.method.into(),
                scheme: a.scheme.into(),
            };
            let rows = consistency_sim(&scenario, &a.n, &cfg, Exec::default())?;
            ConsistencyOutput {
                command: "consistency",
                scenario,
                method: cfg.method,
                scheme: cfg.scheme,
                replicates: cfg.replicates,
                seed: cfg.seed,
                rows,
            }
            .write(format, out)
        }
    }
}

fn run_search(
    ds: &Dataset,
    cfg: &SearchConfig,
    method: Method,
    scheme: Scheme,
    format: Format,
    out: &mut dyn Write,
) -> Result<()> {
    let trace = mh_search(ds, cfg, method, scheme)?;
    let top = trace
        .best_by_score
        .iter()
        .enumerate()
        .map(|(r, s)| SearchRecord {
            rank: r + 1,
            model: ds.model_names(&s.model).iter().map(|x| x.to_string()).collect(),
            indices: s.model.indices().to_vec(),
            log_score: s.log_score,
            visits: trace.visits_of(&s.model),
        })
        .collect();
    SearchOutput {
        command: "search",
        method,
        scheme,
        seed: trace.seed,
        chain_length: trace.chain_length,
        acceptance_rate: trace.acceptance_rate,
        distinct_scored: trace.distinct_scored,
        top,
    }
    .write(format, out)
}

/// Exit status for a failure.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

/// Parse `args`, run, and report failures on `err`. Returns the exit status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let message = e.render().to_string();
            let message = message.lines().next().unwrap_or("invalid arguments");
            output::write_error(err, "config", message.trim_start_matches("error: "), 2);
            return 2;
        }
    };
    match run(&cli, out).and_then(|_| out.flush().map_err(Error::from)) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            output::write_error(err, e.kind(), &e.to_string(), code);
            code
        }
    }
}
