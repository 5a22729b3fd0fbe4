//! Command-line front end for the martingale weighted-inequality toolkit.
//!
//! Five subcommands, each emitting a deterministic JSON (or CSV) report:
//!
//! - `check`: the condition constants `A_p⃗`, `RH`, `S_p⃗`, and the couple
//!   constants `A_p(v, ω_i)` of an instance, with witnesses;
//! - `verify`: a verification suite (`weak`, `strong`, `oneweight`,
//!   `convergence`, `decomposition`) reported step by step;
//! - `oracle`: exhaustive stopping-time enumeration cross-checking the
//!   subset suprema and the antichain count on small trees;
//! - `search`: seeded hill-climbing of an extremal-search objective;
//! - `necessity`: random instances ranked by the necessity gap.
//!
//! Instances are JSON files (see [`format`]); omitted sections default to
//! unit weights, flag exponents, and constant-one functions. Reports go to
//! stdout or, with `--out`, to a file written via temp-then-rename. Exit
//! codes: 0 success, 1 a checked step failed, 2 malformed input or
//! configuration, 3 a cap was exceeded. The environment variable
//! `MARWEIGHT_CAP` overrides the exact-enumeration and oracle leaf caps.
//!
//! All randomness is seeded; the same flags and files always produce the
//! same bytes.

#![deny(unsafe_code)]

pub mod commands;
pub mod format;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{
    caps_from_env, check_mode, cmd_check, cmd_necessity, cmd_oracle, cmd_search, cmd_verify,
    default_instance, search_start, CliError, CmdOutput, Suite,
};
use format::{read_instance, write_atomic, LoadedInstance};

#[derive(Parser)]
#[command(
    name = "marweight",
    version,
    about = "Weight conditions, maximal operators, and verification suites on finite filtered probability spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags selecting the instance a command operates on.
#[derive(Args)]
struct InstanceArgs {
    /// Instance file (JSON); omitted means a unit instance of --depth.
    #[arg(long, value_name = "FILE")]
    instance: Option<PathBuf>,
    /// Dyadic depth of the default instance when no file is given.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// First exponent, used when the instance file carries none.
    #[arg(long, default_value_t = 2.0)]
    p1: f64,
    /// Second exponent, used when the instance file carries none.
    #[arg(long, default_value_t = 2.0)]
    p2: f64,
}

/// Flags selecting where and how the report is written.
#[derive(Args)]
struct OutputArgs {
    /// Write the report to this file (temp-then-rename) instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Enumerate every leaf subset (capped).
    Exact,
    /// Seeded random subsets after the structured candidates.
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Weak,
    Strong,
    Oneweight,
    Convergence,
    Decomposition,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Weak => Suite::Weak,
            SuiteArg::Strong => Suite::Strong,
            SuiteArg::Oneweight => Suite::Oneweight,
            SuiteArg::Convergence => Suite::Convergence,
            SuiteArg::Decomposition => Suite::Decomposition,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the condition constants of an instance, with witnesses.
    Check {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Subset-supremum strategy; sampled requires --seed.
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Random-subset budget in sampled mode.
        #[arg(long, default_value_t = 100)]
        budget: u64,
        /// RNG seed (required in sampled mode).
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a verification suite and report its proof chain step by step.
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Suite to run.
        #[arg(long, value_enum)]
        suite: SuiteArg,
        /// Trial functions per sampled suite.
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// RNG seed (required by the weak, strong, and oneweight suites).
        #[arg(long)]
        seed: Option<u64>,
        /// Subset-supremum strategy inside the suite.
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Shrink every step allowance so the chain fails (test hook).
        #[arg(long, hide = true)]
        corrupt_constants: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-check suprema against exhaustive stopping-time enumeration.
    Oracle {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hill-climb an objective from a file or a seeded random start.
    Search {
        /// Objective: weak_over_apvec, apvec_over_stopped_times_rh,
        /// strong_over_spvec_rh, or rh_violation_probe.
        #[arg(long)]
        objective: String,
        #[command(flatten)]
        instance: InstanceArgs,
        /// Perturbation attempts.
        #[arg(long, default_value_t = 100)]
        budget: u64,
        /// RNG seed.
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rank seeded random instances by the necessity gap.
    Necessity {
        /// Instances to draw.
        #[arg(long, default_value_t = 100)]
        budget: u64,
        /// RNG seed.
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn load(ia: &InstanceArgs) -> Result<LoadedInstance, CliError> {
    match &ia.instance {
        Some(path) => read_instance(path, ia.p1, ia.p2).map_err(CliError::bad_input),
        None => default_instance(ia.depth, ia.p1, ia.p2),
    }
}

fn execute(cli: Cli) -> Result<(CmdOutput, OutputArgs), CliError> {
    let caps = caps_from_env()?;
    match cli.command {
        Command::Check { instance, mode, budget, seed, output } => {
            let inst = load(&instance)?;
            let mode = check_mode(mode == ModeArg::Sampled, budget, seed, &caps)?;
            Ok((cmd_check(&inst, mode, &caps)?, output))
        }
        Command::Verify { instance, suite, trials, seed, mode, corrupt_constants, output } => {
            let inst = load(&instance)?;
            let suite: Suite = suite.into();
            let samples = matches!(suite, Suite::Weak | Suite::Strong | Suite::Oneweight);
            let seed = match seed {
                Some(s) => s,
                None if samples => {
                    return Err(CliError::bad_input(format!(
                        "suite {} draws random trial functions and needs an explicit --seed",
                        suite.name()
                    )))
                }
                None => 0,
            };
            let exact_cap = match mode {
                ModeArg::Exact => caps.exact,
                ModeArg::Sampled => 0,
            };
            Ok((cmd_verify(&inst, suite, trials, seed, &caps, exact_cap, corrupt_constants)?, output))
        }
        Command::Oracle { instance, output } => {
            let inst = load(&instance)?;
            Ok((cmd_oracle(&inst, &caps)?, output))
        }
        Command::Search { objective, instance, budget, seed, output } => {
            let loaded = match &instance.instance {
                Some(path) => {
                    Some(read_instance(path, instance.p1, instance.p2).map_err(CliError::bad_input)?)
                }
                None => None,
            };
            let start =
                search_start(loaded.as_ref(), instance.depth, instance.p1, instance.p2, seed)?;
            Ok((cmd_search(&objective, &start, budget, seed)?, output))
        }
        Command::Necessity { budget, seed, output } => {
            Ok((cmd_necessity(budget, seed)?, output))
        }
    }
}

fn emit(output: &OutputArgs, cmd: CmdOutput) -> i32 {
    let bytes = match output.format {
        FormatArg::Json => {
            let mut s = serde_json::to_string_pretty(&cmd.json).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
        FormatArg::Csv => cmd.csv.into_bytes(),
    };
    match &output.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, &bytes) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => {
            if std::io::stdout().write_all(&bytes).is_err() {
                return 2;
            }
        }
    }
    cmd.exit
}

/// Parse and run; returns the process exit code. Help and version exit 0,
/// any flag-parsing failure exits 2.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.exit_code() == 0 { 0 } else { 2 };
        }
    };
    match execute(cli) {
        Ok((cmd, output)) => emit(&output, cmd),
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
