//! `ocasync`: CTL+Sync model checking over one-counter automata.

mod commands;
mod failure;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ocasync", version, about = "CTL+Sync model checking over one-counter automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a formula at one configuration.
    Check(CheckArgs),
    /// Threshold/period constants per subformula.
    Constants(ConstantsArgs),
    /// Satisfaction sets of every subformula.
    SatSets(SatSetsArgs),
    /// Bounded three-valued evaluation.
    Oracle(OracleArgs),
    /// Least (t, p) fitting the bounded verdicts.
    MinePeriod(MinePeriodArgs),
    /// Compare the model checker with the bounded oracle.
    CrossCheck(CrossCheckArgs),
    /// Sample the tree-shift implications under a scaled bundle.
    CheckLemma11(Lemma11Args),
    /// Linear path schemes witnessing a reachability fact.
    Lps(LpsArgs),
    /// Well-formedness diagnostics.
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
pub struct ModeArgs {
    /// `paper`, `supplied:T,P` or `empirical`.
    #[arg(long)]
    pub mode: Option<String>,
    /// Bound on basic paths under `--mode paper`.
    #[arg(long)]
    pub b: Option<u64>,
    /// Largest Kripke structure to build, in nodes.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Extra periods added to the threshold.
    #[arg(long, default_value_t = 0)]
    pub headroom: u64,
    #[arg(long)]
    pub ua_step_cap: Option<u64>,
    #[arg(long)]
    pub ue_step_cap: Option<u64>,
    /// Run on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Clone, Copy)]
pub struct CapArgs {
    #[arg(long, default_value_t = 60)]
    pub counter_cap: u64,
    #[arg(long, default_value_t = 200)]
    pub level_cap: u64,
    /// Largest counter sampled when mining.
    #[arg(long, default_value_t = 30)]
    pub v_cap: u64,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub oca: Option<PathBuf>,
    #[arg(long)]
    pub formula: Option<String>,
    /// Initial configuration `state,counter`.
    #[arg(long)]
    pub init: Option<String>,
    /// JSON job with keys `oca`, `formula`, `init` and optionally `mode`,
    /// `b`, `budget`; flags take precedence.
    #[arg(long)]
    pub job: Option<PathBuf>,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub oca: PathBuf,
    #[arg(long)]
    pub formula: String,
    #[arg(long)]
    pub b: Option<u64>,
}

#[derive(Args)]
pub struct SatSetsArgs {
    #[arg(long)]
    pub oca: PathBuf,
    #[arg(long)]
    pub formula: String,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub oca: PathBuf,
    #[arg(long)]
    pub formula: String,
    #[arg(long)]
    pub init: Option<String>,
    /// Verdict tables cover counters `0..=vMax`.
    #[arg(long, default_value_t = 12)]
    pub v_max: u64,
    #[command(flatten)]
    pub caps: CapArgs,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args)]
pub struct MinePeriodArgs {
    #[arg(long)]
    pub oca: PathBuf,
    #[arg(long)]
    pub formula: String,
    /// Restrict to one state.
    #[arg(long)]
    pub state: Option<String>,
    #[command(flatten)]
    pub caps: CapArgs,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args)]
pub struct CrossCheckArgs {
    #[arg(long)]
    pub oca: PathBuf,
    /// Repeatable.
    #[arg(long, required = true)]
    pub formula: Vec<String>,
    /// Inits are every state with counter `0..=vMax`.
    #[arg(long, default_value_t = 12)]
    pub v_max: u64,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Args)]
pub struct Lemma11Args {
    #[arg(long)]
    pub oca: PathBuf,
    /// Scaled bound on basic paths.
    #[arg(long)]
    pub b: u64,
    /// Inherited threshold.
    #[arg(long, default_value_t = 0)]
    pub prev_t: u64,
    /// Inherited period.
    #[arg(long, default_value_t = 1)]
    pub prev_p: u64,
    /// Offsets of sampled roots above the least admissible counter.
    #[arg(long, value_delimiter = ',')]
    pub v_offsets: Option<Vec<u64>>,
    #[arg(long, default_value_t = 40)]
    pub max_level: u64,
    #[arg(long, default_value_t = 10)]
    pub max_details: usize,
}

#[derive(Args)]
pub struct LpsArgs {
    #[arg(long)]
    pub oca: PathBuf,
    /// Source configuration `state,counter`.
    #[arg(long)]
    pub from: String,
    /// Target configuration `state,counter`.
    #[arg(long)]
    pub to: String,
    /// Exact path length.
    #[arg(long)]
    pub length: usize,
    #[arg(long, default_value_t = 20)]
    pub flat_bound: usize,
    #[arg(long, default_value_t = 6)]
    pub size_bound: usize,
    /// Witnessing schemes reported.
    #[arg(long, default_value_t = 5)]
    pub limit: usize,
    /// Concrete paths compressed before giving up.
    #[arg(long, default_value_t = 10_000)]
    pub max_paths: usize,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub oca: PathBuf,
}

fn emit(doc: &serde_json::Value) {
    let text = serde_json::to_string_pretty(doc).expect("JSON values serialize");
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let (doc, code) = failure::report(&failure::input(e.kind().to_string()));
            emit(&doc);
            return ExitCode::from(code as u8);
        }
    };
    let result = match cli.command {
        Command::Check(a) => commands::check(a),
        Command::Constants(a) => commands::constants(a),
        Command::SatSets(a) => commands::sat_sets(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::MinePeriod(a) => commands::mine_period(a),
        Command::CrossCheck(a) => commands::cross_check(a),
        Command::CheckLemma11(a) => commands::lemma11(a),
        Command::Lps(a) => commands::lps(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok((doc, code)) => {
            emit(&doc);
            ExitCode::from(code)
        }
        Err(e) => {
            let (doc, code) = failure::report(&e);
            eprintln!("error: {e:#}");
            emit(&doc);
            ExitCode::from(code as u8)
        }
    }
}
