//! `hspec`: configuration-driven experiment runner for weighted
//! composition operator spectra.

mod config;
mod selftest;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::suites::Check;

const EXIT_OK: u8 = 0;
const EXIT_ASSERTION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_CONFIG: u8 = 64;

#[derive(Parser)]
#[command(name = "hspec", version, about = "Weighted composition operator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for artifacts (overrides the config's out_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a top-level config field, e.g. `--set n_c=32`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Singular value spectrum of the truncated operator.
    Singular(RunArgs),
    /// Exterior-power norm products and the contraction + trace-class split.
    Fock(RunArgs),
    /// Restriction-operator Gram spectrum, eigenpairs, orthogonality.
    Restrict(RunArgs),
    /// Deformation scan with eigenfunction zero counts.
    Fisher(RunArgs),
    /// Deformation scan with monotonicity and composition checks.
    Semigroup(RunArgs),
    /// Run the built-in oracle checks; no configuration needed.
    Selftest,
}

fn init_threads() {
    if let Ok(v) = std::env::var("HSPEC_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run_suite(
    name: &str,
    args: &RunArgs,
    suite: fn(&config::Resolved, &std::path::Path) -> anyhow::Result<Vec<Check>>,
) -> u8 {
    let resolved = match config::load(&args.config, &args.set, args.out.as_deref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let out = resolved.out_dir.clone();
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    if let Err(e) = suites::write_manifest(&out, name, &resolved) {
        eprintln!("error: {e}");
        return EXIT_NUMERICAL;
    }
    match suite(&resolved, &out) {
        Ok(checks) => {
            if let Err(e) = suites::write_summary(&out, &checks) {
                eprintln!("error: {e}");
                return EXIT_NUMERICAL;
            }
            if checks.iter().all(|c| c.pass) {
                EXIT_OK
            } else {
                EXIT_ASSERTION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_NUMERICAL
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::from(EXIT_OK);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    init_threads();
    let code = match &cli.command {
        Command::Singular(args) => run_suite("singular", args, suites::singular),
        Command::Fock(args) => run_suite("fock", args, suites::fock),
        Command::Restrict(args) => run_suite("restrict", args, suites::restrict),
        Command::Fisher(args) => run_suite("fisher", args, suites::fisher),
        Command::Semigroup(args) => run_suite("semigroup", args, suites::semigroup),
        Command::Selftest => {
            let failures = selftest::run();
            if failures == 0 {
                EXIT_OK
            } else {
                EXIT_ASSERTION
            }
        }
    };
    ExitCode::from(code)
}
