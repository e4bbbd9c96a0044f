//! `hrc`: command-line workbench for most-stable HRC matchings.

use std::fmt::{self, Write as _};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hrc_core::experiment::{run_experiment, summarize, to_csv, ExperimentKind, ExperimentSpec, SummaryTable};
use hrc_core::generate::{random_instance, vc3_reduce, CubicGraph, GenParams};
use hrc_core::ip::{assignment_to_matching, build_ip, export_lp, parse_assignment, verify_assignment, Stage};
use hrc_core::preprocess::{satisfy_iteratively, TraceStep};
use hrc_core::search::{brute_force_oracle, ORACLE_LIMIT};
use hrc_core::{
    blocking_pairs, parse_instance, parse_matching, serialize_instance, serialize_matching,
    solve_most_stable, Agent, Instance, Solution, SolveError, SolveOptions, StabilityMode,
};

macro_rules! out {
    ($o:expr, $($t:tt)*) => {{
        let _ = write!($o, $($t)*);
    }};
}

macro_rules! outln {
    ($o:expr, $($t:tt)*) => {{
        let _ = writeln!($o, $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "hrc", version, about = "Most-stable matchings for Hospitals/Residents with Couples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum blocking pairs, then maximum size.
    Solve(SolveArgs),
    /// Brute-force optimum for small instances.
    Oracle(OracleArgs),
    /// List the blocking pairs of a matching.
    Check {
        instance: PathBuf,
        matching: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Def1)]
        mode: Mode,
    },
    /// Apply forced assignments; print the trace and the reduced instance.
    Presolve { instance: PathBuf },
    /// Random instance on standard output.
    Gen(GenArgs),
    /// Build the cubic vertex cover gadget for a graph.
    ReduceVc3 {
        /// Edge list: `n m`, then one `u v` line per edge (zero-based).
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Write the integer program in LP format.
    ExportIp {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = StageArg::Minbp)]
        stage: StageArg,
        /// Blocking pair budget for the maxsize stage.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Check a `name value` assignment against the integer program.
    VerifyIp { instance: PathBuf, assignment: PathBuf },
    /// Run a seeded sweep; CSV rows plus a summary table.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Def1,
    Willaccept,
}

impl From<Mode> for StabilityMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Def1 => StabilityMode::Def1,
            Mode::Willaccept => StabilityMode::WillAccept,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Minbp,
    Maxsize,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Def1)]
    mode: Mode,
    /// Print `none` when every matching has more blocking pairs.
    #[arg(long)]
    max_bp: Option<usize>,
    /// Seconds before returning the best matching found so far.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    no_presolve: bool,
    /// Use exhaustive enumeration instead of the search.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Def1)]
    mode: Mode,
    #[arg(long, default_value_t = ORACLE_LIMIT)]
    limit: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    residents: usize,
    #[arg(long)]
    couples: usize,
    #[arg(long)]
    hospitals: usize,
    #[arg(long)]
    posts: usize,
    #[arg(long)]
    min_len: usize,
    #[arg(long)]
    max_len: usize,
    #[arg(long, default_value_t = 6.0)]
    skew: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// exp1, exp2, exp3 or exp4.
    #[arg(default_value = "exp1")]
    name: String,
    /// Published repetitions and ranges instead of the desk defaults.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    reps: Option<usize>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<usize>>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-instance limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    TimeLimit(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::TimeLimit(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::TimeLimit(m) => f.write_str(m),
        }
    }
}

fn input<E: fmt::Display>(path: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(input(path))
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    parse_instance(&read(path)?).map_err(input(path))
}

fn seconds(s: f64) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(s).map_err(|e| CliError::Usage(format!("bad time limit {s}: {e}")))
}

fn solve_error(e: SolveError) -> CliError {
    match e {
        SolveError::OracleLimit { .. } => CliError::Usage(format!("oracle limit exceeded: {e}")),
        _ => CliError::Input(e.to_string()),
    }
}

fn print_solution(inst: &Instance, sol: &Solution, out: &mut String) {
    outln!(out, "bp {}", sol.bp_count());
    outln!(out, "size {}", sol.size);
    outln!(out, "optimal {}", sol.optimal);
    outln!(out, "nodes {}", sol.stats.nodes);
    outln!(out, "time_ms {:.3}", sol.stats.elapsed.as_secs_f64() * 1000.0);
    for b in &sol.blocking_pairs {
        outln!(out, "blocking {}", b.describe(inst));
    }
    outln!(out, "matching");
    out!(out, "{}", serialize_matching(inst, &sol.matching));
}

fn solve(args: SolveArgs, out: &mut String) -> Result<(), CliError> {
    let inst = load_instance(&args.instance)?;
    let mode = args.mode.into();
    let sol = if args.oracle {
        brute_force_oracle(&inst, mode, ORACLE_LIMIT).map_err(solve_error)?
    } else {
        let opts = SolveOptions {
            mode,
            presolve: !args.no_presolve,
            time_limit: args.time_limit.map(seconds).transpose()?,
            ..Default::default()
        };
        solve_most_stable(&inst, &opts).map_err(solve_error)?
    };
    if let Some(k) = args.max_bp {
        if sol.optimal && sol.bp_count() > k {
            outln!(out, "none");
            outln!(out, "min_bp {}", sol.bp_count());
            return Ok(());
        }
    }
    print_solution(&inst, &sol, out);
    if sol.optimal {
        Ok(())
    } else {
        Err(CliError::TimeLimit("time limit reached; best matching found so far printed".into()))
    }
}

fn oracle(args: OracleArgs, out: &mut String) -> Result<(), CliError> {
    let inst = load_instance(&args.instance)?;
    let sol = brute_force_oracle(&inst, args.mode.into(), args.limit).map_err(solve_error)?;
    print_solution(&inst, &sol, out);
    Ok(())
}

fn check(instance: &Path, matching: &Path, mode: Mode, out: &mut String) -> Result<(), CliError> {
    let inst = load_instance(instance)?;
    let m = parse_matching(&inst, &read(matching)?).map_err(input(matching))?;
    let bps = blocking_pairs(&inst, &m, mode.into());
    let noun = if bps.len() == 1 { "pair" } else { "pairs" };
    if bps.is_empty() {
        outln!(out, "0 blocking pairs: stable");
    } else {
        let list: Vec<String> = bps.iter().map(|b| b.describe(&inst)).collect();
        outln!(out, "{} blocking {noun}: {}", bps.len(), list.join("; "));
    }
    Ok(())
}

fn agent_name(inst: &Instance, a: Agent) -> String {
    match a {
        Agent::Couple(i) => format!("couple {}", i + 1),
        Agent::Single(i) => format!("single {}", inst.single_resident(i).0 + 1),
    }
}

fn presolve(path: &Path, out: &mut String) -> Result<(), CliError> {
    let inst = load_instance(path)?;
    let pre = satisfy_iteratively(&inst);
    for step in &pre.trace {
        match step {
            TraceStep::Assign(fa) => {
                outln!(out, "# assign {} pos {}", agent_name(&inst, fa.agent), fa.position + 1)
            }
            TraceStep::Full(h) => outln!(out, "# full hospital {}", h.0 + 1),
            TraceStep::Emptied(a) => outln!(out, "# emptied {}", agent_name(&inst, *a)),
        }
    }
    out!(out, "{}", serialize_instance(&pre.reduction.instance));
    Ok(())
}

fn gen(args: GenArgs, out: &mut String) -> Result<(), CliError> {
    let p = GenParams {
        residents: args.residents,
        couples: args.couples,
        hospitals: args.hospitals,
        posts: args.posts,
        min_len: args.min_len,
        max_len: args.max_len,
        skew: args.skew,
    };
    let inst = random_instance(&p, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    out!(out, "{}", serialize_instance(&inst));
    Ok(())
}

fn parse_graph(text: &str) -> Result<CubicGraph, String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let nums = |l: &str| -> Result<(usize, usize), String> {
        let v: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| format!("bad number {t:?}")))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [a, b] => Ok((a, b)),
            _ => Err(format!("expected two numbers in {l:?}")),
        }
    };
    let (n, m) = nums(lines.next().ok_or("empty graph file")?)?;
    let edges: Vec<(usize, usize)> = lines.map(nums).collect::<Result<_, _>>()?;
    if edges.len() != m {
        return Err(format!("header declares {m} edges, found {}", edges.len()));
    }
    CubicGraph::new(n, &edges).map_err(|e| e.to_string())
}

fn reduce_vc3(graph: &Path, k: usize, out: &mut String) -> Result<(), CliError> {
    let g = parse_graph(&read(graph)?).map_err(input(graph))?;
    let red = vc3_reduce(&g, k).map_err(|e| CliError::Usage(e.to_string()))?;
    out!(out, "{}", serialize_instance(&red.instance));
    Ok(())
}

fn export_ip(path: &Path, stage: StageArg, k: Option<usize>, out: &mut String) -> Result<(), CliError> {
    let stage = match (stage, k) {
        (StageArg::Minbp, None) => Stage::MinBp,
        (StageArg::Maxsize, Some(k)) => Stage::MaxSize { k },
        (StageArg::Minbp, Some(_)) => {
            return Err(CliError::Usage("--k applies only to --stage maxsize".into()))
        }
        (StageArg::Maxsize, None) => return Err(CliError::Usage("--stage maxsize needs --k".into())),
    };
    let inst = load_instance(path)?;
    out!(out, "{}", export_lp(&build_ip(&inst), stage));
    Ok(())
}

fn verify_ip(instance: &Path, assignment: &Path, out: &mut String) -> Result<(), CliError> {
    let inst = load_instance(instance)?;
    let model = build_ip(&inst);
    let a = parse_assignment(&model, &read(assignment)?).map_err(input(assignment))?;
    let rep = verify_assignment(&model, &a);
    if !rep.feasible {
        let mut tags = rep.violated_tags(&model);
        tags.dedup();
        outln!(out, "infeasible");
        return Err(CliError::Input(format!("violated constraints: {}", tags.join(" "))));
    }
    let m = assignment_to_matching(&inst, &model, &a).map_err(|e| CliError::Input(e.to_string()))?;
    outln!(out, "feasible");
    outln!(out, "theta_sum {}", rep.theta_sum);
    outln!(out, "size {}", rep.x_sum);
    outln!(out, "matching");
    out!(out, "{}", serialize_matching(&inst, &m));
    Ok(())
}

fn experiment(args: ExperimentArgs, out: &mut String) -> Result<(), CliError> {
    let kind: ExperimentKind =
        args.name.parse().map_err(|e: hrc_core::GenError| CliError::Usage(e.to_string()))?;
    let mut spec = if args.full { ExperimentSpec::full(kind) } else { ExperimentSpec::desk(kind) };
    if let Some(r) = args.reps {
        spec.reps = r;
    }
    if let Some(p) = args.points {
        spec.points = p;
    }
    if let Some(s) = args.scale {
        if s.is_nan() || s <= 0.0 {
            return Err(CliError::Usage(format!("scale must be positive, got {s}")));
        }
        spec.scale = s;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(t) = args.time_limit {
        spec.time_limit = Some(seconds(t)?);
    }
    let rows = run_experiment(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let csv = to_csv(&rows);
    let table = SummaryTable(&summarize(&rows)).to_string();
    match &args.out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            out!(out, "{table}");
        }
        None => {
            out!(out, "{csv}");
            eprint!("{table}");
        }
    }
    Ok(())
}

fn run(cli: Cli, out: &mut String) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Oracle(a) => oracle(a, out),
        Command::Check { instance, matching, mode } => check(&instance, &matching, mode, out),
        Command::Presolve { instance } => presolve(&instance, out),
        Command::Gen(a) => gen(a, out),
        Command::ReduceVc3 { graph, k } => reduce_vc3(&graph, k, out),
        Command::ExportIp { instance, stage, k } => export_ip(&instance, stage, k, out),
        Command::VerifyIp { instance, assignment } => verify_ip(&instance, &assignment, out),
        Command::Experiment(a) => experiment(a, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut out = String::new();
    let status = run(cli, &mut out);
    // A closed pipe downstream (`hrc gen ... | head`) is not an error.
    let _ = io::stdout().lock().write_all(out.as_bytes());
    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hrc: {e}");
            ExitCode::from(e.code())
        }
    }
}
