//! `monotone-iter`: run coupled monotone iterations, certified cone solves and
//! the finite brute-force oracle from the command line.

mod export;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use monotone_iter::cone::{solve, SolveOptions};
use monotone_iter::finite::oracle::{replay, verify_theorem_suite, CounterexampleBundle, Family, SuiteConfig};
use monotone_iter::order::OrderedUniverse;
use monotone_iter::problems::{build, builtin_problems, Instance, Problem, ProblemSpec, Run};
use monotone_iter::run;
use serde::Serialize;

use export::{write_json, write_trace_csv, Cells, VerdictFile};

const SEED_ENV: &str = "MONOTONE_ITER_SEED";

#[derive(Parser)]
#[command(name = "monotone-iter", version, about = "Monotone iterations for mixed monotone operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coupled iteration and classify attraction.
    Iterate(IterateArgs),
    /// Certified solve of a cone problem.
    Solve(SolveArgs),
    /// Randomized brute-force check of the theory on finite lattices.
    Oracle(OracleArgs),
    /// Re-run a counterexample bundle.
    Replay(ReplayArgs),
    /// List the built-in problems and their parameters.
    List,
}

#[derive(Args)]
struct Source {
    /// Built-in problem id (see `list`).
    #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
    builtin: Option<String>,
    /// Problem file (JSON, version 1).
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Problem parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IterateArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    gap_tol: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    /// Stop once 1 - lambda_n < tol.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Lattice,
    Poset,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Overridden by MONOTONE_ITER_SEED.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    min_size: usize,
    #[arg(long, default_value_t = 8)]
    max_size: usize,
    #[arg(long, value_enum, default_value = "lattice")]
    family: FamilyArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    bundle: PathBuf,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("parameter `{k}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Exit 1: malformed input. Exit 2: runtime failure. Exit 3: violations.
enum Failure {
    Malformed(anyhow::Error),
    Runtime(anyhow::Error),
    Violations(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Malformed(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
            Failure::Runtime(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
            Failure::Violations(msg) => {
                eprintln!("{msg}");
                ExitCode::from(3)
            }
        }
    }
}

fn malformed(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Malformed(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Iterate(a) => iterate(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::Replay(a) => replay_cmd(a),
        Command::List => list(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

fn load(source: &Source) -> Result<(Problem, PathBuf), Failure> {
    let given: BTreeMap<String, f64> = source.params.iter().cloned().collect();
    let (problem, file_out) = match (&source.builtin, &source.problem) {
        (Some(id), _) => (build(id, &given).map_err(malformed)?, None),
        (None, Some(path)) => {
            if !given.is_empty() {
                return Err(malformed(anyhow!("--param applies to --builtin only; set params in the problem file")));
            }
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(malformed)?;
            let spec = ProblemSpec::from_json(&text).map_err(malformed)?;
            (spec.instantiate().map_err(malformed)?, spec.out().cloned())
        }
        (None, None) => return Err(malformed(anyhow!("one of --builtin or --problem is required"))),
    };
    let out = source.out.clone().or(file_out).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(runtime)?;
    Ok((problem, out))
}

fn iterate(args: IterateArgs) -> Result<(), Failure> {
    let (mut problem, out) = load(&args.source)?;
    if let Some(s) = args.steps {
        problem.set_max_steps(s).map_err(malformed)?;
    }
    if let Some(g) = args.gap_tol {
        problem.set_gap_tolerance(g).map_err(malformed)?;
    }
    let id = problem.id.clone();
    match problem.instance {
        Instance::Line(r) => iterate_run(&id, r, &out),
        Instance::Vector(r) => iterate_run(&id, r, &out),
        Instance::Finite(r) => iterate_run(&id, r, &out),
        Instance::Cone(c) => iterate_run(&id, c.iteration().map_err(runtime)?, &out),
    }
}

fn iterate_run<U>(id: &str, r: Run<U>, out: &Path) -> Result<(), Failure>
where
    U: OrderedUniverse,
    U::Element: Cells + Serialize,
{
    let trace = run(&r.op, &r.x0, &r.y0, r.policy).map_err(runtime)?;
    let verdict = trace.verdict();
    write_trace_csv(&out.join("trace.csv"), &r.op, &trace).map_err(runtime)?;
    let file = VerdictFile {
        problem: id,
        verdict,
        image_of_x_star: verdict.kind.x_star().map(|x| r.op.apply(x, x)),
        horizon: trace.horizon(),
        dropped_steps: trace.dropped(),
        lu_onset: trace.lu_onset,
        empty_intersection_at: trace.empty_intersection_at,
    };
    write_json(&out.join("verdict.json"), &file).map_err(runtime)?;
    println!("{}", serde_json::to_string(&file.verdict.kind).unwrap_or_default());
    println!(
        "horizon {} halt {:?} fixed_point_confirmed {}",
        file.horizon, trace.halt, verdict.fixed_point_confirmed
    );
    Ok(())
}

fn solve_cmd(args: SolveArgs) -> Result<(), Failure> {
    let (problem, out) = load(&args.source)?;
    let Instance::Cone(mut c) = problem.instance else {
        return Err(malformed(anyhow!("`{}` is not a cone problem; use `iterate`", problem.id)));
    };
    if let Some(t) = args.tol {
        c.tol = t;
    }
    let report = solve(&c.op, &c.phi, &c.u, &SolveOptions::new(c.tol)).map_err(runtime)?;
    write_json(&out.join("solve.json"), &report).map_err(runtime)?;
    println!("{}", serde_json::to_string(&report).map_err(runtime)?);
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<(), Failure> {
    let seed = match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}={s} is not an unsigned integer"))
            .map_err(malformed)?,
        Err(_) => args.seed,
    };
    if args.min_size < 2 || args.max_size > 64 || args.min_size > args.max_size {
        return Err(malformed(anyhow!(
            "sizes must satisfy 2 <= min-size <= max-size <= 64, got {}..{}",
            args.min_size,
            args.max_size
        )));
    }
    let cfg = SuiteConfig {
        seed,
        trials: args.trials,
        min_size: args.min_size,
        max_size: args.max_size,
        family: match args.family {
            FamilyArg::Lattice => Family::Lattice,
            FamilyArg::Poset => Family::Poset,
        },
    };
    let out = args.out.unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out).map_err(runtime)?;
    let report = verify_theorem_suite(cfg);
    write_json(&out.join("oracle-report.json"), &report).map_err(runtime)?;
    for (k, bundle) in report.bundles.iter().enumerate() {
        write_json(&out.join(format!("counterexample-{k}.json")), bundle).map_err(runtime)?;
    }
    println!(
        "trials {} seed {} violations {} attractive {} empty-meet {}",
        cfg.trials, cfg.seed, report.total_violations, report.attractive_fixed_point_trials, report.empty_meet_trials
    );
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Violations(format!(
            "{} violations; {} counterexample bundles written to {}",
            report.total_violations,
            report.bundles.len(),
            out.display()
        )))
    }
}

fn replay_cmd(args: ReplayArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.bundle)
        .with_context(|| format!("reading {}", args.bundle.display()))
        .map_err(malformed)?;
    let bundle: CounterexampleBundle = serde_json::from_str(&text).map_err(malformed)?;
    let outcome = replay(&bundle).map_err(malformed)?;
    println!("{}", serde_json::to_string(&outcome).map_err(runtime)?);
    if outcome.reproduced {
        Ok(())
    } else {
        Err(runtime(anyhow!(
            "expected `{}`, observed {:?}",
            outcome.expected,
            outcome.observed
        )))
    }
}

fn list() -> Result<(), Failure> {
    for b in builtin_problems() {
        let params: Vec<String> = b
            .params
            .iter()
            .map(|p| format!("{}={} in [{}, {}]", p.name, p.default, p.min, p.max))
            .collect();
        let mode = if b.cone { "iterate, solve" } else { "iterate" };
        println!("{:<18} {mode:<15} {}", b.id, b.summary);
        if !params.is_empty() {
            println!("{:<18} {:<15} {}", "", "", params.join(", "));
        }
    }
    Ok(())
}
