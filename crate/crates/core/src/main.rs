use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use polynash::error::{Error, ErrorClass};
use polynash::generators::{
    gen_random, gen_random_matroid, gen_random_singleton, CostFamily, MatroidKind,
};
use polynash::io::{parse_instance, parse_profile, write_instance, write_profile, write_trace};
use polynash::oracle::{verify_pne, OracleCaps};
use polynash::solver::{compute_pne, iteration_bound, PlayerSelection, SolverPolicy};
use polynash::GameInstance;

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_VIOLATIONS: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "polynash",
    version,
    about = "Pure Nash equilibria of polymatroid congestion games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an equilibrium. With a directory as --instance, solves every
    /// `*.json` inside and writes `<name>.profile.json` files to --output.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Policy::MinIndex)]
        policy: Policy,
        /// Seed for the random policy.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace file, or directory in batch mode.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Confirm the result with the brute-force oracle.
        #[arg(long)]
        verify: bool,
        /// Check the algorithm's invariants at every step.
        #[arg(long)]
        debug_assertions: bool,
        #[arg(long)]
        output: PathBuf,
    },
    /// Check a profile against the brute-force oracle.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        profile: PathBuf,
    },
    /// Generate an instance.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 2)]
        players: usize,
        #[arg(long, default_value_t = 3)]
        resources: usize,
        /// Largest per-player demand (singleton and random kinds).
        #[arg(long, default_value_t = 3)]
        max_demand: u64,
        #[arg(long, value_enum, default_value_t = Family::Convex)]
        costs: Family,
        #[arg(long, value_enum, default_value_t = Matroid::Uniform)]
        matroid: Matroid,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Validate an instance.
    Check {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Print the bound on the total number of improvement moves.
    Bound {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    MinIndex,
    RoundRobin,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Singleton,
    Matroid,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Convex,
    Ssc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Matroid {
    Uniform,
    Partition,
    Graphic,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::Validation => EXIT_VALIDATION,
            ErrorClass::Internal => EXIT_INTERNAL,
            ErrorClass::Usage => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: String) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<GameInstance, Failure> {
    parse_instance(&read(path)?).map_err(|e| {
        let f = Failure::from(e);
        Failure {
            message: format!("{}: {}", path.display(), f.message),
            ..f
        }
    })
}

struct SolveOptions {
    policy: SolverPolicy,
    verify: bool,
}

/// Solves one instance and writes its outputs; `Ok(false)` when verification
/// found violations.
fn solve_one(
    instance: &Path,
    output: &Path,
    trace: Option<&Path>,
    opts: &SolveOptions,
) -> Result<bool, Failure> {
    let g = load(instance)?;
    let sol = compute_pne(&g, &opts.policy)?;
    write(output, &write_profile(&g, &sol.profile)?)?;
    if let Some(t) = trace {
        write(t, &write_trace(&g, &sol.trace))?;
    }
    if opts.verify {
        let report = verify_pne(&g, &sol.profile, &OracleCaps::from_env())?;
        for v in &report.violations {
            eprintln!(
                "{}: player {} pays {} but could pay {} with {:?}",
                instance.display(),
                v.player,
                v.current_cost,
                v.best_cost,
                v.witness.0
            );
        }
        return Ok(report.is_pne);
    }
    Ok(true)
}

fn solve(
    instance: &Path,
    output: &Path,
    trace: Option<&Path>,
    opts: &SolveOptions,
) -> Result<u8, Failure> {
    if !instance.is_dir() {
        let ok = solve_one(instance, output, trace, opts)?;
        return Ok(if ok { 0 } else { EXIT_VIOLATIONS });
    }
    let mut inputs: Vec<PathBuf> = fs::read_dir(instance)
        .map_err(|e| usage(format!("cannot list {}: {e}", instance.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    inputs.sort();
    for dir in std::iter::once(output).chain(trace) {
        fs::create_dir_all(dir)
            .map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    // The worst failure decides the exit code; every instance is attempted.
    let mut code = 0u8;
    for input in &inputs {
        let stem = input.file_stem().unwrap_or_default().to_string_lossy();
        let out = output.join(format!("{stem}.profile.json"));
        let tr = trace.map(|t| t.join(format!("{stem}.trace.jsonl")));
        match solve_one(input, &out, tr.as_deref(), opts) {
            Ok(true) => {}
            Ok(false) => code = code.max(EXIT_VIOLATIONS),
            Err(f) => {
                eprintln!("error: {}", f.message);
                code = code.max(f.code);
            }
        }
    }
    Ok(code)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve {
            instance,
            policy,
            seed,
            trace,
            verify,
            debug_assertions,
            output,
        } => {
            let selection = match policy {
                Policy::MinIndex => PlayerSelection::MinIndex,
                Policy::RoundRobin => PlayerSelection::RoundRobin,
                Policy::Random => PlayerSelection::SeededRandom { seed },
            };
            let mut policy = SolverPolicy {
                selection,
                ..SolverPolicy::default()
            };
            if debug_assertions {
                policy = policy.with_debug();
            }
            solve(
                &instance,
                &output,
                trace.as_deref(),
                &SolveOptions { policy, verify },
            )
        }
        Command::Verify { instance, profile } => {
            let g = load(&instance)?;
            let p = parse_profile(&g, &read(&profile)?)?;
            let report = verify_pne(&g, &p, &OracleCaps::from_env())?;
            if report.is_pne {
                println!("equilibrium");
                return Ok(0);
            }
            for v in &report.violations {
                println!(
                    "player {} pays {} but could pay {} with {:?}",
                    v.player, v.current_cost, v.best_cost, v.witness.0
                );
            }
            Ok(EXIT_VIOLATIONS)
        }
        Command::Gen {
            kind,
            players,
            resources,
            max_demand,
            costs,
            matroid,
            seed,
            output,
        } => {
            let g = match kind {
                Kind::Singleton => gen_random_singleton(seed, players, resources, max_demand),
                Kind::Matroid => {
                    let kind = match matroid {
                        Matroid::Uniform => MatroidKind::Uniform,
                        Matroid::Partition => MatroidKind::Partition,
                        Matroid::Graphic => MatroidKind::Graphic,
                    };
                    gen_random_matroid(seed, players, resources, kind)
                }
                Kind::Random => {
                    let family = match costs {
                        Family::Convex => CostFamily::ConvexNondecreasing,
                        Family::Ssc => CostFamily::TruncatedSsc,
                    };
                    gen_random(seed, players, resources, max_demand, family)
                }
            }?;
            let text = write_instance(&g);
            match output {
                Some(path) => write(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Check { instance } => {
            let g = load(&instance)?;
            println!(
                "valid: {} players, {} resources, total demand {}",
                g.n(),
                g.m(),
                g.total_demand()
            );
            Ok(0)
        }
        Command::Bound { instance } => {
            println!("{}", iteration_bound(&load(&instance)?));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
