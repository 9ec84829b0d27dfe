mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use intraport::eavesdrop::{DetectionMode, EveStrategy};
use intraport::protocol::{AuxValue, DEFAULT_MAX_GATES};
use intraport::qsim::Segment;
use serde_json::{json, Value};

use input::MessageArgs;

#[derive(Debug, Parser)]
#[command(name = "intraport", version, about = "Intraportation circuits over Hadamard and CNOT networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check one figure's circuit against its claimed outputs.
    RunFigure {
        figure: usize,
        #[command(flatten)]
        messages: MessageArgs,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check a figure on many random message tuples.
    Fuzz {
        #[arg(long)]
        figure: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the protocol table with Bob's programs.
    Table {
        #[arg(long, default_value_t = 3)]
        channels: usize,
        /// Only the figures' own decoders.
        #[arg(long)]
        reduced: bool,
    },
    /// Run a circuit file (or a bundled name such as fig1.qc) on an input state.
    Exec {
        circuit: PathBuf,
        /// JSON input: {"basis": "110"}, {"amplitudes": [...]} or {"factors": [...]}.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SegmentArg::All)]
        segment: SegmentArg,
    },
    /// Gates that rearrange channels; output channel k receives input channel TO[k].
    Swap {
        #[arg(long, value_delimiter = ',', required = true)]
        to: Vec<usize>,
        /// Seed for the random product state used to check the rearrangement.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Find Bob's shortest decoder for an input placement.
    SolveBob {
        #[arg(long)]
        channels: usize,
        #[arg(long)]
        aux_channel: usize,
        #[arg(long)]
        aux_value: AuxValue,
        #[arg(long, default_value_t = DEFAULT_MAX_GATES)]
        max_gates: usize,
        /// Search even when the bundled decoder table has the answer.
        #[arg(long)]
        no_cache: bool,
    },
    /// Interception experiment.
    Eavesdrop {
        #[arg(long)]
        channels: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "omniscient")]
        mode: DetectionMode,
        /// uniform, absent or fixed:CHANNEL:VALUE
        #[arg(long, default_value = "uniform")]
        strategy: EveStrategy,
        /// random, or CHANNEL:VALUE for a fixed placement
        #[arg(long, default_value = "random")]
        true_case: String,
    },
    /// Measurement branches of the truncated three-channel circuit.
    Bell {
        #[command(flatten)]
        messages: MessageArgs,
        /// Only this measurement outcome.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        outcome: Option<u8>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SegmentArg {
    All,
    Alice,
    Bob,
}

impl From<SegmentArg> for Segment {
    fn from(s: SegmentArg) -> Segment {
        match s {
            SegmentArg::All => Segment::All,
            SegmentArg::Alice => Segment::AliceOnly,
            SegmentArg::Bob => Segment::BobOnly,
        }
    }
}

/// A command that could not run: exit code plus the JSON to print.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    body: Value,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            body: json!({ "error": message.into() }),
        }
    }

    pub fn with_body(body: Value) -> Self {
        Failure { code: 2, body }
    }
}

impl From<intraport::Error> for Failure {
    fn from(e: intraport::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

/// A finished command: its report and whether it passed.
pub struct Report {
    pub body: Value,
    pub passed: bool,
}

fn dispatch(command: Command) -> Result<Report, Failure> {
    match command {
        Command::RunFigure { figure, messages, tol } => commands::run_figure(figure, &messages, tol),
        Command::Fuzz { figure, trials, seed, tol } => commands::fuzz(figure, trials, seed, tol),
        Command::Table { channels, reduced } => commands::table(channels, reduced),
        Command::Exec { circuit, input, segment } => commands::exec(&circuit, input.as_deref(), segment.into()),
        Command::Swap { to, seed, tol } => commands::swap(&to, seed, tol),
        Command::SolveBob { channels, aux_channel, aux_value, max_gates, no_cache } => {
            commands::solve_bob(channels, aux_channel, aux_value, max_gates, no_cache)
        }
        Command::Eavesdrop { channels, trials, seed, mode, strategy, true_case } => {
            commands::eavesdrop(channels, trials, seed, mode, strategy, &true_case)
        }
        Command::Bell { messages, outcome, tol } => commands::bell(&messages, outcome, tol),
    }
}

fn print(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values always serialize"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            print(&json!({ "error": e.render().to_string().trim_end() }));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli.command) {
        Ok(report) => {
            print(&report.body);
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(failure) => {
            print(&failure.body);
            ExitCode::from(failure.code)
        }
    }
}
