//! Command-line definition shared by the binary and in-process callers.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, SearchStatus};
use crate::config::{load_scenario, load_search, Scenario};
use crate::CliError;

#[derive(Parser)]
#[command(
    name = "qfgr",
    version,
    about = "Markov and symmetrized scattering generators for open quantum systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario, search config or manifest (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, env = "QFGR_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    /// Replaces every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one scenario.
    Run(Common),
    /// Propagate a scenario under the conventional, symmetrized and exact generators.
    Compare(Common),
    /// Dump the rate tensors and the golden-rule matrix.
    Rates(Common),
    /// Search for a state driven out of the positive cone by the conventional generator.
    Search {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn scenario(c: &Common) -> Result<Scenario, CliError> {
    let mut s = load_scenario(&c.config)?;
    if let Some(seed) = c.seed {
        s.apply_seed(seed);
    }
    Ok(s)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(c) => {
            let out = commands::run(&scenario(&c)?)?;
            out.write(&c.out_dir)?;
            println!("{}", out.summary.describe());
        }
        Command::Compare(c) => {
            let out = commands::compare(&scenario(&c)?)?;
            out.write(&c.out_dir)?;
            for r in &out.summary.runs {
                println!("{}", r.describe());
            }
            for (pair, d) in &out.summary.max_differences {
                println!("max |rho_{pair}| = {d:.6e}");
            }
        }
        Command::Rates(c) => {
            let out = commands::rates(&scenario(&c)?)?;
            out.write(&c.out_dir)?;
            let s = &out.summary;
            println!(
                "N = {}: {} conventional and {} symmetrized nonzero entries",
                s.n, s.conventional_nonzero, s.symmetrized_nonzero
            );
        }
        Command::Search { common: c, threads } => {
            if threads == Some(0) {
                return Err(CliError::Config("--threads must be at least 1".into()));
            }
            let mut cfg = load_search(&c.config)?;
            if let Some(seed) = c.seed {
                cfg.master_seed = seed;
            }
            let out = commands::search(&cfg, threads)?;
            out.write(&c.out_dir)?;
            let r = &out.summary.report;
            match out.summary.status {
                SearchStatus::ViolationFound => println!(
                    "violation found: instance {} (N = {}), min eigenvalue {:.6e} at t = {:.6}; witness written to {}",
                    r.instance_index,
                    r.n,
                    r.worst_min_eigenvalue,
                    r.worst_time,
                    c.out_dir.join(commands::WITNESS).display()
                ),
                SearchStatus::NoneFound => println!(
                    "none found over {} instances; least-positive margin {:.6e} (instance {})",
                    r.instances_evaluated, r.worst_min_eigenvalue, r.instance_index
                ),
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
