use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use kstab_core::curve::{branch_divisor, classify_lambda};
use kstab_verify::report::exit_code;
use kstab_verify::scenario::parse_exact;
use kstab_verify::{run_all, run_case, Report, Scenario};

const USAGE_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "kstab-verify",
    version,
    about = "Exact verification of the flag invariants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every registered case.
    RunAll(RunAllArgs),
    /// Evaluate a single case and print its result as JSON.
    Case(CaseArgs),
    /// Classify one member of the quartic pencil.
    Curve {
        /// Pencil parameter as an exact rational, e.g. 5/7.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Load a scenario file instead of the built-in one.
    Scenario {
        file: PathBuf,
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    RunAll(RunAllArgs),
    Case(CaseArgs),
}

#[derive(clap::Args)]
struct RunAllArgs {
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the markdown report here.
    #[arg(long)]
    md: Option<PathBuf>,
    /// Only run cases carrying this tag.
    #[arg(long)]
    filter: Option<String>,
}

#[derive(clap::Args)]
struct CaseArgs {
    id: String,
    /// Attach the chamber structure of the flag case to the result.
    #[arg(long)]
    dump_chambers: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE_ERROR),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, String> {
    match command {
        Command::RunAll(args) => run_all_cmd(&Scenario::builtin(), &args),
        Command::Case(args) => case_cmd(&Scenario::builtin(), &args),
        Command::Curve { lambda } => curve_cmd(&lambda),
        Command::Scenario { file, action } => {
            let scenario = Scenario::from_path(&file).map_err(|e| e.to_string())?;
            match action {
                ScenarioAction::RunAll(args) => run_all_cmd(&scenario, &args),
                ScenarioAction::Case(args) => case_cmd(&scenario, &args),
            }
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn run_all_cmd(scenario: &Scenario, args: &RunAllArgs) -> Result<u8, String> {
    let report: Report = run_all(scenario, args.filter.as_deref());
    if let Some(p) = &args.json {
        write(p, &report.to_json())?;
    }
    if let Some(p) = &args.md {
        write(p, &report.to_markdown())?;
    }
    if args.json.is_none() && args.md.is_none() {
        print!("{}", report.to_markdown());
    } else {
        let s = report.summary;
        println!(
            "{} cases: {} pass, {} fail, {} error",
            s.total, s.pass, s.fail, s.error
        );
    }
    Ok(report.exit_code() as u8)
}

fn case_cmd(scenario: &Scenario, args: &CaseArgs) -> Result<u8, String> {
    let result = run_case(scenario, &args.id, args.dump_chambers).map_err(|e| e.to_string())?;
    println!(
        "{}",
        serde_json::to_string_pretty(&result).expect("result serializes")
    );
    Ok(exit_code([result.status]) as u8)
}

fn curve_cmd(lambda: &str) -> Result<u8, String> {
    let value = parse_exact(lambda, "--lambda").map_err(|e| e.to_string())?;
    let class = classify_lambda(&value);
    println!("lambda: {}", class.value);
    println!("resultant: {}", class.resultant);
    println!("classification: {}", class.classification);
    match branch_divisor(&value) {
        Ok(b) => {
            println!("branch form: {}", b.form);
            println!("distinct branch points: {}", b.distinct_count);
        }
        Err(e) => println!("branch form: unavailable ({e})"),
    }
    Ok(0)
}
