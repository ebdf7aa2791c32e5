//! `ncpt` command line: simulation, order-effect estimation, per-order
//! detection errors, detection problems, axiom checks and state existence.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 bad input,
//! 3 not enough data.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ncpt_core::decentralized_sim::{read_records_csv, simulate_chunked, write_records_csv, SimConfig};
use ncpt_core::detection::{
    build_pvm_model, classical_min_error, holevo_conditions_check, min_error_over_orders,
    solve_pvm_detection, state_exists_for_povm, DetectionProblem, DetectionSolution, Povm, RiskPair,
    StateExistenceProblem, StateVerdict,
};
use ncpt_core::empirics::{
    all_orders, conditional_table, ordered_distribution, order_effect_report, CountTable,
    OrderedDistribution, DEFAULT_Z_THRESHOLD,
};
use ncpt_core::event_state::ModelSpec;
use ncpt_core::report::{read_distributions_csv, write_conditional_csv, write_order_errors_csv};
use ncpt_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ncpt", version, about = "Order effects and detection with noncommutative probability models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate sequential observers and a coordinator; writes run records and counts.
    Simulate(SimulateArgs),
    /// Conditional tables and order-effect z statistics from a count table.
    Estimate(EstimateArgs),
    /// Minimum error for each collection order.
    Orders(OrdersArgs),
    /// Classical and projection-valued detection for one problem.
    Detect(DetectArgs),
    /// Axiom checks for an event-state model.
    Axioms(AxiomsArgs),
    /// Does a state produce the target distribution under a measurement?
    StateExists(StateExistsArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config (JSON). Defaults to the built-in three-observer setup.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<u64>,
    /// Output directory for records.csv and counts.json.
    #[arg(long, default_value = "ncpt-out")]
    pub out: PathBuf,
    /// Skip the per-run CSV.
    #[arg(long)]
    pub counts_only: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Count table JSON, or a run-record CSV.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "ncpt-out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
    pub z_threshold: f64,
    /// The observer pair and the target, as `a,b,target`.
    #[arg(long, default_value = "1,2,3", value_parser = parse_triple)]
    pub observers: [usize; 3],
}

#[derive(Debug, Args)]
pub struct OrdersArgs {
    /// Count table JSON, run-record CSV, a JSON list of ordered
    /// distributions, or a side-by-side distribution CSV.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "0.5,0.5", value_parser = parse_priors)]
    pub priors: [f64; 2],
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Detection problem JSON: `{"priors": [..], "p0": [..], "p1": [..]}`.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the priors in the file.
    #[arg(long, value_parser = parse_priors)]
    pub priors: Option<[f64; 2]>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    /// Model spec JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Seed for the random probe states.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StateExistsArgs {
    /// `{"povm": {"elements": [..]}, "target": [..]}`
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_priors(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b] if a >= 0.0 && b >= 0.0 && (a + b - 1.0).abs() <= 1e-10 => Ok([a, b]),
        _ => Err(format!("expected two non-negative priors summing to 1, got {s:?}")),
    }
}

fn parse_triple(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, c] if a != b && b != c && a != c && a * b * c > 0 => Ok([a, b, c]),
        _ => Err(format!("expected three distinct observer ids, got {s:?}")),
    }
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DegenerateSpec(_)
            | Error::InsufficientData(_)
            | Error::ZeroDenominator(_)
            | Error::EmptyTable { .. } => EXIT_DATA,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Count table from JSON, or tallied from a run-record CSV.
fn read_counts(path: &Path) -> Result<CountTable, Failure> {
    let table = if is_csv(path) {
        let records = read_records_csv(File::open(path)?)?;
        CountTable::from_records(&records)
    } else {
        read_json(path)?
    };
    table.validate()?;
    Ok(table)
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::input(e.to_string()))?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => say(&text),
    }
    Ok(())
}

/// Line on standard output; a closed pipe is not an error.
fn say(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn cmd_simulate(args: &SimulateArgs) -> CmdResult {
    let mut config: SimConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    config.validate()?;
    fs::create_dir_all(&args.out)?;
    let mut records_out = if args.counts_only {
        None
    } else {
        Some(create(&args.out.join("records.csv"))?)
    };
    let mut counts = CountTable::default();
    let mut first = true;
    simulate_chunked(&config, |chunk| {
        if let Some(w) = records_out.as_mut() {
            write_records_csv(chunk, &mut *w, first)?;
        }
        first = false;
        for r in chunk {
            counts.add_record(r);
        }
        Ok(())
    })?;
    if let Some(mut w) = records_out {
        w.flush()?;
    }
    write_json(&counts, Some(&args.out.join("counts.json")))?;

    let observers = config.observers.len();
    let mut summary = format!("runs={} seed={}", config.runs, config.seed);
    for h in [0u8, 1] {
        let total = counts.total(h);
        summary.push_str(&format!(" | h={h} n={total}"));
        for id in 1..=observers {
            let ones = counts.count_where(h, |s| s.iter().any(|&(i, d)| i == id && d == 1))?;
            let rate = if total > 0 { ones as f64 / total as f64 } else { f64::NAN };
            summary.push_str(&format!(" P[D{id}=1]={rate:.6}"));
        }
    }
    say(&summary);
    Ok(EXIT_OK)
}

fn cmd_estimate(args: &EstimateArgs) -> CmdResult {
    let table = read_counts(&args.config)?;
    let [a, b, c] = args.observers;
    fs::create_dir_all(&args.out)?;
    for h in [0u8, 1] {
        let rows = conditional_table(&table, h, a, b, c)?;
        let mut w = create(&args.out.join(format!("conditional_h{h}.csv")))?;
        write_conditional_csv(&rows, c, &mut w)?;
        w.flush()?;
    }
    let report = order_effect_report(&table, a, b, c, args.z_threshold)?;
    write_json(&report, Some(&args.out.join("order_effects.json")))?;
    let max_z = report
        .entries
        .iter()
        .filter_map(|e| e.z)
        .map(f64::abs)
        .fold(0.0, f64::max);
    say(&format!(
        "order effect significant: {} (max |z| = {max_z:.4}, threshold {}, {} empty branches)",
        report.any_significant, report.z_threshold, report.zero_denominators
    ));
    if report.zero_denominators > 0 {
        eprintln!("warning: {} branches have no runs", report.zero_denominators);
        return Ok(EXIT_DATA);
    }
    Ok(EXIT_OK)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OrdersInput {
    Distributions(Vec<OrderedDistribution>),
    Counts(CountTable),
}

fn distributions_from_counts(table: &CountTable) -> Result<Vec<OrderedDistribution>, Failure> {
    let n = table
        .entries(0)?
        .into_iter()
        .chain(table.entries(1)?)
        .map(|(s, _)| s.len())
        .max()
        .ok_or_else(|| Failure::from(Error::InsufficientData("count table is empty".into())))?;
    Ok(all_orders(n)
        .iter()
        .map(|o| ordered_distribution(table, o))
        .collect::<Result<_, _>>()?)
}

fn cmd_orders(args: &OrdersArgs) -> CmdResult {
    let dists = if is_csv(&args.config) {
        let text = fs::read_to_string(&args.config)?;
        if text.starts_with('h') {
            distributions_from_counts(&read_counts(&args.config)?)?
        } else {
            read_distributions_csv(text.as_bytes())?
        }
    } else {
        match read_json::<OrdersInput>(&args.config)? {
            OrdersInput::Distributions(d) => d,
            OrdersInput::Counts(t) => {
                t.validate()?;
                distributions_from_counts(&t)?
            }
        }
    };
    let table = min_error_over_orders(&dists, args.priors)?;
    match &args.out {
        Some(p) => {
            let mut w = create(p)?;
            write_order_errors_csv(&table, &mut w)?;
            w.flush()?;
            say(&format!("optimal order: {} (error {})", table.best_order(), table.rows[table.best].error));
        }
        None => write_order_errors_csv(&table, std::io::stdout().lock())?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DetectOutput {
    problem: DetectionProblem,
    classical: DetectionSolution,
    pvm: DetectionSolution,
    holevo_conditions: bool,
}

fn cmd_detect(args: &DetectArgs) -> CmdResult {
    let mut problem: DetectionProblem = read_json(&args.config)?;
    if let Some(p) = args.priors {
        problem.priors = p;
    }
    problem.validate()?;
    let classical = classical_min_error(&problem);
    let (rho0, rho1, f) = build_pvm_model(&problem)?;
    let risks = RiskPair::from_states(problem.priors, &rho0, &rho1)?;
    let pvm = solve_pvm_detection(&risks, &f)?;
    let holevo_conditions = holevo_conditions_check(&risks, &pvm.pi0, &pvm.pi1);
    let agree = (classical.error - pvm.error).abs() <= 1e-9;
    write_json(
        &DetectOutput {
            problem,
            classical,
            pvm,
            holevo_conditions,
        },
        args.out.as_deref(),
    )?;
    Ok(if holevo_conditions && agree { EXIT_OK } else { EXIT_PROPERTY })
}

fn cmd_axioms(args: &AxiomsArgs) -> CmdResult {
    let spec: ModelSpec = read_json(&args.config)?;
    let report = spec.run(args.seed)?;
    write_json(&report, args.out.as_deref())?;
    if report.all_passed {
        Ok(EXIT_OK)
    } else {
        for f in report.failures() {
            eprintln!("failed: {} [{}] deviation {:e}", f.axiom, f.instance, f.max_deviation);
        }
        Ok(EXIT_PROPERTY)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateExistsInput {
    povm: Povm,
    target: Vec<f64>,
}

#[derive(Serialize)]
struct StateExistsOutput {
    target: Vec<f64>,
    #[serde(flatten)]
    verdict: StateVerdict,
}

fn cmd_state_exists(args: &StateExistsArgs) -> CmdResult {
    let input: StateExistsInput = read_json(&args.config)?;
    let problem = StateExistenceProblem::new(input.povm, input.target)?;
    let verdict = state_exists_for_povm(&problem);
    write_json(
        &StateExistsOutput {
            target: problem.target.clone(),
            verdict,
        },
        args.out.as_deref(),
    )?;
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Orders(a) => cmd_orders(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Axioms(a) => cmd_axioms(a),
        Command::StateExists(a) => cmd_state_exists(a),
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priors_parse() {
        assert_eq!(parse_priors("0.4,0.6").unwrap(), [0.4, 0.6]);
        assert!(parse_priors("0.4,0.7").is_err());
        assert!(parse_priors("1").is_err());
        assert!(parse_priors("x,y").is_err());
    }

    #[test]
    fn triples_parse() {
        assert_eq!(parse_triple("2,1,3").unwrap(), [2, 1, 3]);
        assert!(parse_triple("1,1,3").is_err());
        assert!(parse_triple("0,1,3").is_err());
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        assert_eq!(Failure::from(Error::DegenerateSpec("x".into())).code, EXIT_DATA);
        assert_eq!(Failure::from(Error::InsufficientData("x".into())).code, EXIT_DATA);
        assert_eq!(Failure::from(Error::NotAPvm("x".into())).code, EXIT_INPUT);
    }

    #[test]
    fn help_exits_cleanly() {
        assert_eq!(run(["ncpt", "--help"]), EXIT_OK);
        assert_eq!(run(["ncpt", "bogus"]), EXIT_INPUT);
    }
}
