use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use sitcalc::bat::DEFAULT_STATE_BUDGET;
use sitcalc::frontend::{
    error_output, load_project, run_command, GraphFormat, Level, Options, Verb,
};
use sitcalc::planning::Mode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Validate,
    Simulate,
    CheckSd,
    CheckSound,
    CheckComplete,
    Plan,
    Refine,
    Project,
    Explain,
    Forecast,
    VerifyConstraints,
}

impl From<Command> for Verb {
    fn from(c: Command) -> Verb {
        match c {
            Command::Validate => Verb::Validate,
            Command::Simulate => Verb::Simulate,
            Command::CheckSd => Verb::CheckSd,
            Command::CheckSound => Verb::CheckSound,
            Command::CheckComplete => Verb::CheckComplete,
            Command::Plan => Verb::Plan,
            Command::Refine => Verb::Refine,
            Command::Project => Verb::Project,
            Command::Explain => Verb::Explain,
            Command::Forecast => Verb::Forecast,
            Command::VerifyConstraints => Verb::VerifyConstraints,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Entailed,
    Satisfiable,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    High,
    Low,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphArg {
    Edges,
    Dot,
}

/// Situation-calculus abstraction workbench.
///
/// Exit status: 0 verified, 1 property fails, 2 usage or parse error,
/// 3 budget exceeded.
#[derive(Debug, Parser)]
#[command(name = "sitcalc", version)]
struct Cli {
    command: Command,
    /// High-level theory file.
    #[arg(long)]
    hl: PathBuf,
    /// Low-level theory file.
    #[arg(long)]
    ll: PathBuf,
    /// Refinement mapping file.
    #[arg(long)]
    map: PathBuf,
    /// Cap on explored states and program configurations.
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    budget: usize,
    #[arg(long, value_enum, default_value = "entailed")]
    mode: ModeArg,
    /// Initial model index; all models when omitted.
    #[arg(long)]
    model: Option<usize>,
    #[arg(long, default_value_t = 10)]
    horizon: usize,
    /// Theory used by simulate, check-sd, plan and project.
    #[arg(long, value_enum)]
    level: Option<LevelArg>,
    /// Comma-separated ground low-level actions.
    #[arg(long)]
    trace: Option<String>,
    /// Goal or query formula.
    #[arg(long)]
    goal: Option<String>,
    /// Comma-separated ground high-level actions.
    #[arg(long)]
    plan: Option<String>,
    /// Program for check-sd; all templates when omitted.
    #[arg(long)]
    program: Option<String>,
    /// Comma-separated ground high-level actions for forecast to classify.
    #[arg(long)]
    candidates: Option<String>,
    /// List every segment-wise refinement.
    #[arg(long)]
    alternatives: bool,
    /// Explain without verifying Constraint 1.
    #[arg(long)]
    unchecked: bool,
    /// Output format for the reachable-state graph of simulate.
    #[arg(long, value_enum, default_value = "edges")]
    graph: GraphArg,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let opts = Options {
        budget: cli.budget,
        mode: match cli.mode {
            ModeArg::Entailed => Mode::Entailed,
            ModeArg::Satisfiable => Mode::Satisfiable,
        },
        model: cli.model,
        horizon: cli.horizon,
        level: cli.level.map(|l| match l {
            LevelArg::High => Level::High,
            LevelArg::Low => Level::Low,
        }),
        trace: cli.trace,
        goal: cli.goal,
        plan: cli.plan,
        program: cli.program,
        candidates: cli.candidates,
        alternatives: cli.alternatives,
        unchecked: cli.unchecked,
        graph: match cli.graph {
            GraphArg::Edges => GraphFormat::Edges,
            GraphArg::Dot => GraphFormat::Dot,
        },
    };
    let out = match load_project(&cli.hl, &cli.ll, &cli.map) {
        Ok(pair) => run_command(cli.command.into(), &pair, &opts),
        Err(e) => error_output(&e),
    };
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&out.json).expect("reports serialize")
        );
    } else if out.code == 2 || out.code == 3 {
        eprint!("{}", out.text);
    } else {
        print!("{}", out.text);
    }
    ExitCode::from(out.code as u8)
}
