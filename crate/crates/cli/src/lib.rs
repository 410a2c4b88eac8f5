//! Command-line harness: argument parsing, experiment dispatch and output.
//!
//! Every command builds an [`output::Document`] that echoes the resolved
//! configuration (defaults included) ahead of its records, so a payload
//! carries everything needed to reproduce it.

pub mod output;
pub mod summary;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wavefactor::fit::{fit_records, fit_with_burn_in, DEFAULT_BURN_IN};
use wavefactor::grover::{
    classical_sorted_search, grover_trials, hybrid_factorized_search, mean_random_search_queries, optimal_queries,
};
use wavefactor::qft::{complexity_table, dft_bruteforce, fft_classical, qft_factorized, ComplexityRow, MAX_TABLE_QUBITS};
use wavefactor::shor::{run_shor, ShorConfig, DEFAULT_MAX_RETRIES};
use wavefactor::walk::{
    classical_walk_spread, quantum_walk_spread, scaling_experiment, spatial_search, SearchOptions, SpreadRecord,
};
use wavefactor::{Coin, Error, Lattice, QuantumRegister};

pub use output::{Document, Format, Value};

#[derive(Debug, Clone, Parser)]
#[command(name = "wavefactor", version, about = "Seeded experiments for the Fourier, factoring, search and walk simulators")]
pub struct Cli {
    /// Base seed; trial k of a run draws from substream k.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file, replaced atomically; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Defaults to json for `shor`, csv otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Compare the three Fourier transforms, or tabulate their costs.
    Qft(QftArgs),
    /// Factor a small modulus by simulated period finding.
    Shor(ShorArgs),
    /// Amplitude-amplified search for one marked item.
    Grover(GroverArgs),
    /// Coined quantum walks: spreading, spatial search, scaling sweeps.
    Walk(WalkArgs),
    /// Query counts of the classical and quantum search strategies.
    Baseline(BaselineArgs),
    /// Join experiment outputs into one comparison table.
    Summary(SummaryArgs),
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("qft_mode").required(true).args(["compare", "table"])))]
pub struct QftArgs {
    /// Run all three transforms on one seeded random state.
    #[arg(long)]
    pub compare: bool,
    /// Emit the operation-count table for n = 1..=max_n.
    #[arg(long)]
    pub table: bool,
    /// Qubit count for --compare.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub max_n: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ShorArgs {
    #[arg(long)]
    pub modulus: u64,
    /// Total attempts, each with a fresh random base.
    #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
    pub retries: u32,
    /// Transform the joint register and measure both registers at the end.
    #[arg(long)]
    pub deferred_measurement: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GroverArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub target: usize,
    /// Iteration count, or `auto` for the optimal schedule.
    #[arg(long, default_value = "auto")]
    pub queries: String,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkMode {
    Spread,
    Search,
    Scaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoinArg {
    Hadamard,
    Grover,
}

impl From<CoinArg> for Coin {
    fn from(c: CoinArg) -> Self {
        match c {
            CoinArg::Hadamard => Coin::Hadamard,
            CoinArg::Grover => Coin::Grover,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Walker {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    #[arg(long, value_enum)]
    pub mode: WalkMode,
    /// Lattice dimension (spread and search).
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Lattice side length (spread and search).
    #[arg(long)]
    pub side: Option<usize>,
    /// Steps; search and scaling default to 2N + 16 per lattice.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Defaults to hadamard for one-dimensional spreading, grover otherwise.
    #[arg(long, value_enum)]
    pub coin: Option<CoinArg>,
    #[arg(long, value_enum, default_value_t = Walker::Quantum)]
    pub walker: Walker,
    /// Walkers averaged by the classical spread.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Marked site index (search).
    #[arg(long, default_value_t = 0)]
    pub marked: usize,
    /// Disable the marked-site sign flip (search).
    #[arg(long)]
    pub no_perturbation: bool,
    /// Dimensions swept by the scaling mode.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    pub dims: Vec<usize>,
    /// Side lengths for every swept dimension; defaults to a per-dimension
    /// list (64..512, 8..64, 4..10).
    #[arg(long, value_delimiter = ',')]
    pub sides: Option<Vec<usize>>,
    /// Fits ignore sizes below this (t for spreading, N for scaling).
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: f64,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    /// Database sizes; each must be a power of the branching factor.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [256usize])]
    pub sizes: Vec<usize>,
    /// Marked item, used by every strategy except the averaged random one.
    #[arg(long, default_value_t = 0)]
    pub target: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 4)]
    pub branching: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SummaryArgs {
    /// Directory holding fourier.csv, search.csv and walk_scaling.csv.
    #[arg(long, default_value = ".")]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    pub burn_in: f64,
}

/// Machine-readable failure; serialised as `{"error": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self { kind, message: message.into(), missing: Vec::new() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new("validation", message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new("io", message)
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            "resource_limit" => 3,
            "probabilistic_failure" => 4,
            "io" | "state_corruption" => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::ResourceLimit(_) => "resource_limit",
            Error::Validation(_) => "validation",
            Error::Index(_) => "index",
            Error::Usage(_) => "usage",
            Error::Domain(_) => "domain",
            Error::StateCorruption(_) => "state_corruption",
            Error::ProbabilisticFailure(_) => "probabilistic_failure",
        };
        Self::new(kind, e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

impl Cli {
    pub fn resolved_format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            Command::Shor(_) => Format::Json,
            _ => Format::Csv,
        })
    }
}

/// Runs the experiment described by `cli` and returns its document.
pub fn run(cli: &Cli) -> CliResult<Document> {
    let mut doc = match &cli.command {
        Command::Qft(a) => qft(a, cli.seed)?,
        Command::Shor(a) => shor(a, cli.seed)?,
        Command::Grover(a) => grover(a, cli.seed)?,
        Command::Walk(a) => walk(a, cli.seed)?,
        Command::Baseline(a) => baseline(a, cli.seed)?,
        Command::Summary(a) => summary::summary_table(&a.input, a.burn_in)?,
    };
    let format = cli.resolved_format();
    doc.config.insert(0, ("seed", cli.seed.into()));
    doc.config.insert(1, ("format", if format == Format::Csv { "csv" } else { "json" }.into()));
    Ok(doc)
}

/// Runs, renders and writes. A failed run writes nothing.
pub fn execute(cli: &Cli) -> CliResult<Document> {
    let doc = run(cli)?;
    let format = cli.resolved_format();
    let payload = doc.render(format);
    match &cli.out {
        None => {
            use std::io::Write;
            std::io::stdout()
                .lock()
                .write_all(payload.as_bytes())
                .map_err(|e| CliError::io(format!("cannot write stdout: {e}")))?;
        }
        Some(path) => {
            let mut files = vec![(path.clone(), payload)];
            if format == Format::Csv && !doc.summary.is_empty() {
                let mut sidecar = serde_json::to_string_pretty(&doc.summary_json()).expect("json serialisation");
                sidecar.push('\n');
                files.push((output::sidecar_path(path), sidecar));
            }
            output::write_atomic(&files)?;
        }
    }
    Ok(doc)
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError::new("usage", e.render().to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match execute(&cli) {
        Ok(doc) => {
            for w in &doc.warnings {
                eprintln!("warning: {w}");
            }
            0
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}

fn enum_name<T: Serialize>(v: T) -> Value {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => Value::Text(s),
        _ => Value::Null,
    }
}

fn max_deviation(a: &[wavefactor::Amplitude], b: &[wavefactor::Amplitude]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn qft(args: &QftArgs, seed: u64) -> CliResult<Document> {
    let mut doc = Document::new("qft");
    if args.table {
        doc.config.push(("mode", "table".into()));
        doc.config.push(("max_n", args.max_n.into()));
        if args.max_n > MAX_TABLE_QUBITS {
            return Err(Error::ResourceLimit(format!("--max-n {} exceeds {MAX_TABLE_QUBITS}", args.max_n)).into());
        }
        let rows = complexity_table(1..=args.max_n)?;
        doc.columns = ComplexityRow::CSV_HEADER.split(',').collect();
        doc.rows = rows
            .iter()
            .map(|r| vec![r.n.into(), r.naive_ops.into(), r.fft_ops.into(), r.qft_gates.into()])
            .collect();
        return Ok(doc);
    }

    doc.config.push(("mode", "compare".into()));
    doc.config.push(("n", args.n.into()));
    if args.n == 0 {
        return Err(CliError::validation("--n must be at least 1"));
    }
    if args.n > MAX_TABLE_QUBITS {
        return Err(Error::ResourceLimit(format!("--n {} exceeds {MAX_TABLE_QUBITS} for the brute-force transform", args.n)).into());
    }
    let mut reg = QuantumRegister::random(args.n, seed)?;
    let input = reg.amplitudes().to_vec();
    let naive = dft_bruteforce(&input)?;
    let fast = fft_classical(&input)?;
    qft_factorized(&mut reg)?;
    let dev_fft = max_deviation(&naive.values, &fast.values);
    let dev_qft = max_deviation(&naive.values, reg.amplitudes());
    doc.summary.push(("max_deviation", dev_fft.max(dev_qft).into()));
    doc.columns = vec!["n", "max_dev_fft", "max_dev_qft", "naive_ops", "fft_ops", "qft_gates"];
    doc.rows.push(vec![
        args.n.into(),
        dev_fft.into(),
        dev_qft.into(),
        naive.operations.into(),
        fast.operations.into(),
        reg.counts().gates().into(),
    ]);
    Ok(doc)
}

fn shor(args: &ShorArgs, seed: u64) -> CliResult<Document> {
    let mut doc = Document::new("shor");
    doc.config.push(("modulus", args.modulus.into()));
    doc.config.push(("retries", args.retries.into()));
    doc.config.push(("deferred_measurement", args.deferred_measurement.into()));
    if args.retries == 0 {
        return Err(CliError::validation("--retries must be at least 1"));
    }
    let config = ShorConfig { max_retries: args.retries, measure_f_first: !args.deferred_measurement };
    let run = run_shor(args.modulus, seed, config)?;
    let Some((p, q)) = run.factors else {
        return Err(Error::ProbabilisticFailure(format!(
            "no factor of {} after {} attempts; bases {:?}, samples {:?}",
            args.modulus, run.attempts, run.a_values_tried, run.y_samples
        ))
        .into());
    };
    doc.columns = vec!["M", "a_values_tried", "y_samples", "r", "factors", "oracle_calls", "attempts", "route"];
    doc.rows.push(vec![
        run.modulus.into(),
        Value::List(run.a_values_tried.clone()),
        Value::List(run.y_samples.clone()),
        run.period.into(),
        Value::List(vec![p, q]),
        run.oracle_calls.into(),
        run.attempts.into(),
        run.route.map_or(Value::Null, enum_name),
    ]);
    Ok(doc)
}

fn grover(args: &GroverArgs, seed: u64) -> CliResult<Document> {
    let mut doc = Document::new("grover");
    doc.config.push(("n", args.n.into()));
    doc.config.push(("target", args.target.into()));
    doc.config.push(("queries", args.queries.clone().into()));
    doc.config.push(("trials", args.trials.into()));
    let q = match args.queries.as_str() {
        "auto" => optimal_queries(args.n as u64)?.q_star,
        s => s
            .parse::<u64>()
            .map_err(|_| CliError::validation(format!("--queries must be a count or `auto`, got `{s}`")))?,
    };
    let t = grover_trials(args.n, args.target, q, args.trials, seed)?;
    doc.columns = vec!["N", "Q", "predicted_success", "empirical_success", "oracle_calls"];
    doc.rows.push(vec![
        args.n.into(),
        q.into(),
        t.predicted_success.into(),
        t.empirical_success.into(),
        t.oracle_calls.into(),
    ]);
    Ok(doc)
}

fn default_sides(d: usize) -> Vec<usize> {
    match d {
        1 => vec![64, 128, 256, 512],
        2 => vec![8, 16, 32, 64],
        3 => vec![4, 6, 8, 10],
        _ => vec![2, 3, 4],
    }
}

fn auto_steps(lattice: &Lattice) -> usize {
    2 * lattice.sites() + 16
}

fn walk(args: &WalkArgs, seed: u64) -> CliResult<Document> {
    let mut doc = Document::new("walk");
    let mode = args.mode;
    doc.config.push(("mode", enum_name(mode)));
    if mode == WalkMode::Scaling {
        return walk_scaling(args, seed, doc);
    }

    let side = args.side.ok_or_else(|| CliError::validation("--side is required for spread and search"))?;
    let coin = args.coin.unwrap_or(if mode == WalkMode::Spread && args.d == 1 {
        CoinArg::Hadamard
    } else {
        CoinArg::Grover
    });
    let lattice = Lattice::new(args.d, side)?;
    doc.config.push(("d", args.d.into()));
    doc.config.push(("side", side.into()));

    if mode == WalkMode::Spread {
        let steps = args.steps.unwrap_or(256);
        doc.config.push(("steps", steps.into()));
        doc.config.push(("walker", enum_name(args.walker)));
        let records: Vec<SpreadRecord> = match args.walker {
            Walker::Quantum => {
                doc.config.push(("coin", enum_name(coin)));
                quantum_walk_spread(args.d, side, steps, coin.into())?
            }
            Walker::Classical => {
                doc.config.push(("trials", args.trials.into()));
                classical_walk_spread(args.d, side, steps, args.trials, seed)?
            }
        };
        doc.config.push(("burn_in", args.burn_in.into()));
        let wrapped_from = records.iter().find(|r| r.wrapped).map(|r| r.t);
        if let Some(t) = wrapped_from {
            doc.warnings.push(format!("walker may wrap around the lattice from t = {t} (L = {side})"));
        }
        let points: Vec<(f64, f64)> = records.iter().map(|r| (r.t as f64, r.sigma)).collect();
        let fit = fit_with_burn_in(&points, args.burn_in).ok();
        doc.summary.push(("exponent", fit.map(|f| f.exponent).into()));
        doc.summary.push(("r_squared", fit.map(|f| f.r_squared).into()));
        doc.summary.push(("wrapped_from", wrapped_from.into()));
        doc.columns = vec!["t", "sigma"];
        doc.rows = records.iter().map(|r| vec![r.t.into(), r.sigma.into()]).collect();
        return Ok(doc);
    }

    let steps = args.steps.unwrap_or_else(|| auto_steps(&lattice));
    doc.config.push(("steps", steps.into()));
    doc.config.push(("coin", enum_name(coin)));
    doc.config.push(("marked", args.marked.into()));
    doc.config.push(("perturbation", (!args.no_perturbation).into()));
    let options = SearchOptions { coin: coin.into(), perturbation: !args.no_perturbation };
    let trace = spatial_search(lattice, args.marked, steps, options)?;
    if trace.t_peak.is_none() {
        doc.warnings.push(format!("no local maximum of the marked probability within {steps} steps"));
    }
    doc.summary.push(("N", lattice.sites().into()));
    doc.summary.push(("T_peak", trace.t_peak.into()));
    doc.summary.push(("p_peak", trace.p_peak.into()));
    doc.summary.push(("T_eff", trace.effective_cost().into()));
    doc.columns = vec!["t", "p_marked"];
    doc.rows = trace.probabilities.iter().enumerate().map(|(t, p)| vec![t.into(), (*p).into()]).collect();
    Ok(doc)
}

fn walk_scaling(args: &WalkArgs, seed: u64, mut doc: Document) -> CliResult<Document> {
    doc.config.push(("dims", Value::List(args.dims.iter().map(|&d| d as u64).collect())));
    doc.config.push((
        "sides",
        match &args.sides {
            Some(s) => Value::List(s.iter().map(|&l| l as u64).collect()),
            None => "default".into(),
        },
    ));
    doc.config.push(("steps", args.steps.map_or(Value::from("auto"), Value::from)));
    doc.config.push(("burn_in", args.burn_in.into()));
    doc.columns = vec!["d", "L", "N", "t_max", "T_peak", "p_peak", "T_eff"];
    for &d in &args.dims {
        let sides = args.sides.clone().unwrap_or_else(|| default_sides(d));
        let mut records = Vec::new();
        for &side in &sides {
            let lattice = Lattice::new(d, side)?;
            let t_max = args.steps.unwrap_or_else(|| auto_steps(&lattice));
            let point = scaling_experiment(d, &[side], t_max)?[0];
            if point.t_peak.is_none() {
                doc.warnings.push(format!("d = {d}, L = {side}: no peak within {t_max} steps"));
            }
            records.extend(point.record(seed));
            doc.rows.push(vec![
                d.into(),
                side.into(),
                point.n.into(),
                t_max.into(),
                point.t_peak.into(),
                point.p_peak.into(),
                point.t_eff.into(),
            ]);
        }
        let fit = fit_records(&records, args.burn_in).ok();
        let key: &'static str = match d {
            1 => "exponent_d1",
            2 => "exponent_d2",
            3 => "exponent_d3",
            _ => "exponent_other",
        };
        doc.summary.push((key, fit.map(|f| f.exponent).into()));
    }
    Ok(doc)
}

fn baseline(args: &BaselineArgs, seed: u64) -> CliResult<Document> {
    let mut doc = Document::new("baseline");
    doc.config.push(("n", Value::List(args.sizes.iter().map(|&n| n as u64).collect())));
    doc.config.push(("target", args.target.into()));
    doc.config.push(("trials", args.trials.into()));
    doc.config.push(("branching", args.branching.into()));
    if args.sizes.is_empty() {
        return Err(CliError::validation("--n needs at least one size"));
    }
    doc.columns = vec!["N", "random", "sorted", "grover", "hybrid", "grover_success", "hybrid_found"];
    for &n in &args.sizes {
        let random = mean_random_search_queries(n, args.trials, seed)?;
        let sorted = classical_sorted_search(n, args.target)?;
        let schedule = optimal_queries(n as u64)?;
        let hybrid = hybrid_factorized_search(n, args.branching, args.target)?;
        doc.rows.push(vec![
            n.into(),
            random.into(),
            sorted.queries.into(),
            schedule.q_star.into(),
            hybrid.total_queries.into(),
            schedule.predicted_success.into(),
            (hybrid.found == args.target).into(),
        ]);
    }
    Ok(doc)
}
