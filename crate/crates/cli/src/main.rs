//! Experiment runner: run single instances, analyze traces for cluster
//! pairs, re-check the core equivalences at a chosen budget, and search
//! instance families for counterexample candidates.

mod report;
mod search;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use alterproj::engine::{EngineConfig, Mode, StopRule};
use alterproj::error::Error;
use alterproj::instances::SuiteClass;
use alterproj::schedules::Schedule;
use alterproj::schema;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FLAGGED: u8 = 1;
pub const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "alterproj", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one instance; write trace.csv and metadata.json.
    Run(RunArgs),
    /// Analyze a finished run for cluster-pair counterexample candidates.
    Analyze(AnalyzeArgs),
    /// Re-run a named equivalence suite at a budget.
    Check(CheckArgs),
    /// Generate, run, and analyze an instance family.
    Search(search::SearchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Instance JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for trace.csv and metadata.json.
    #[arg(long)]
    out: PathBuf,
    /// Seed for the initial point (and the schedule, unless the instance
    /// pins one). Defaults to the instance seed, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Stop once |x_n| falls below this.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Per-step invariant checking; violations are recorded and flip the
    /// exit code to 1.
    #[arg(long)]
    checked: bool,
    /// Skip instance validation (fault injection only).
    #[arg(long)]
    no_validate: bool,
    /// Record per-set distances each step.
    #[arg(long)]
    distances: bool,
    /// Store the full iterate every N steps.
    #[arg(long, default_value_t = 100)]
    thinning: usize,
    /// Keep the last N iterates verbatim.
    #[arg(long, default_value_t = 200)]
    tail: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// metadata.json of a finished run.
    #[arg(long)]
    config: PathBuf,
    /// Where to write report.json (defaults next to the metadata).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cluster radius bound.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Functionals sampled per pair check.
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// A run counts as "persisting" when its final norm exceeds this.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Also run the two-sided (Theorem 2 style) variant per pair.
    #[arg(long)]
    two_sided: bool,
}

#[derive(Args)]
struct CheckArgs {
    what: CheckSuite,
    /// Number of random cases.
    #[arg(long, default_value_t = 200)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckSuite {
    Moreau,
    Bridge,
    Oracle,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Check(args) => cmd_check(&args),
        Command::Search(args) => search::cmd_search(&args),
    };
    ExitCode::from(code)
}

fn invalid(context: &str, e: &Error) -> u8 {
    eprintln!("error: {context}: {e}");
    EXIT_INVALID
}

fn cmd_run(args: &RunArgs) -> u8 {
    if args.thinning == 0 {
        eprintln!("error: --thinning must be >= 1");
        return EXIT_INVALID;
    }
    let instance = match schema::read_instance(&args.config) {
        Ok(i) => i,
        Err(e) => return invalid("reading --config", &e),
    };
    let seed = args.seed.or(instance.seed).unwrap_or(0);
    let mut schedule = match Schedule::from_spec(&instance.schedule) {
        Ok(s) => s,
        Err(e) => return invalid("building schedule", &e),
    };
    if schedule.k() != instance.k() {
        eprintln!(
            "error: schedule K={} does not match the instance ({} {})",
            schedule.k(),
            instance.k(),
            match instance.mode {
                Mode::Projection => "sets",
                Mode::Greedy => "dictionaries",
            }
        );
        return EXIT_INVALID;
    }
    let x0 = search::initial_point(instance.dim, seed);
    let stop = StopRule {
        max_iters: args.max_iter,
        norm_tol: args.tol,
        ..Default::default()
    };
    let config = EngineConfig {
        checked: args.checked,
        record_distances: args.distances,
        thinning: args.thinning,
        tail_keep: args.tail,
        validate: !args.no_validate,
    };
    let trace = match search::run_instance(&instance, &mut schedule, &x0, &stop, &config) {
        Ok(t) => t,
        Err(e) => return invalid("running instance", &e),
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        return invalid("creating --out", &e.into());
    }
    let meta = schema::run_metadata(&instance, &trace, &stop, &x0, args.checked);
    if let Err(e) = schema::write_trace_csv(&args.out.join("trace.csv"), &trace, instance.k()) {
        return invalid("writing trace.csv", &e);
    }
    if let Err(e) = schema::write_metadata(&args.out.join("metadata.json"), &meta) {
        return invalid("writing metadata.json", &e);
    }
    println!(
        "run {}: {} steps, |x_0| = {:.6e}, |x_N| = {:.6e}, stop = {:?}, violations = {}",
        instance.id.as_deref().unwrap_or("<unnamed>"),
        trace.records.len(),
        trace.initial_norm,
        trace.final_norm,
        trace.metadata.stop_reason,
        trace.violations.len()
    );
    for v in trace.violations.iter().take(10) {
        eprintln!("violation at n={}: {} residual {:.3e}", v.n, v.check, v.residual);
    }
    if args.checked && !trace.violations.is_empty() {
        EXIT_FLAGGED
    } else {
        EXIT_OK
    }
}

fn cmd_analyze(args: &AnalyzeArgs) -> u8 {
    let meta = match schema::read_metadata(&args.config) {
        Ok(m) => m,
        Err(e) => return invalid("reading --config", &e),
    };
    let rep = match report::analyze_run(
        &meta,
        args.eps,
        args.samples,
        args.seed,
        args.tol,
        args.two_sided,
    ) {
        Ok(r) => r,
        Err(e) => return invalid("analyzing run", &e),
    };
    let out = args.out.clone().unwrap_or_else(|| {
        args.config
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_default()
    });
    if let Err(e) = std::fs::create_dir_all(&out) {
        return invalid("creating --out", &e.into());
    }
    let path = out.join("report.json");
    if let Err(e) = report::write_report(&path, &rep) {
        return invalid("writing report.json", &e);
    }
    println!(
        "analyze {}: final norm {:.6e}, {} cluster(s), {} pair(s) checked",
        meta.instance.id.as_deref().unwrap_or("<unnamed>"),
        meta.final_norm,
        rep.clusters.len(),
        rep.pairs.len()
    );
    if rep.candidate {
        eprintln!(
            "COUNTEREXAMPLE CANDIDATE: a cluster pair passes every check while \
             the norm persists at {:.6e} (report: {})",
            meta.final_norm,
            path.display()
        );
        EXIT_FLAGGED
    } else {
        EXIT_OK
    }
}

fn cmd_check(args: &CheckArgs) -> u8 {
    let outcome = match args.what {
        CheckSuite::Moreau => report::check_moreau(args.budget, args.seed),
        CheckSuite::Bridge => report::check_bridge(args.budget, args.seed),
        CheckSuite::Oracle => report::check_oracle(args.budget, args.seed),
    };
    match outcome {
        Ok(worst) => {
            println!(
                "check {}: {} cases, worst residual {:.3e} — ok",
                match args.what {
                    CheckSuite::Moreau => "moreau",
                    CheckSuite::Bridge => "bridge",
                    CheckSuite::Oracle => "oracle",
                },
                args.budget,
                worst
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("check failed: {e}");
            EXIT_FLAGGED
        }
    }
}

/// Shared by search: parse a class list like "subspaces,cones".
pub fn parse_classes(spec: &str) -> Result<Vec<SuiteClass>, String> {
    spec.split(',')
        .map(|s| {
            SuiteClass::from_name(s.trim()).ok_or_else(|| format!("unknown class \"{s}\""))
        })
        .collect()
}
