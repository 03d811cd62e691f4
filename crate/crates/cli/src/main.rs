use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use starcalc::batch::{batch, chart_csv, chart_points, chart_svg, recipe_files, run_corpus, BatchSummary, ExitStatus};
use starcalc::recipe::{parse_recipe, run, RecipeError};

/// Check star-surgery constructions described in recipe files.
#[derive(Debug, Parser)]
#[command(name = "starcalc", version)]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    machine: bool,
    /// Count discrepancies with listed data as failures.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a single recipe.
    Run {
        /// Recipe JSON file.
        file: PathBuf,
    },
    /// Run every *.json recipe in a directory.
    Batch {
        dir: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the built-in corpus.
    Corpus {
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write the (chi_h, c1^2) points of a directory of recipes as CSV.
    Chart {
        dir: PathBuf,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Also draw the chart as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn code(status: ExitStatus) -> ExitCode {
    ExitCode::from(status as u8)
}

fn fail_usage(err: &dyn std::fmt::Display) -> ExitCode {
    eprintln!("starcalc: {err}");
    code(ExitStatus::Usage)
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

fn report_batch(summary: &BatchSummary, cli: &Cli) -> ExitCode {
    if cli.machine {
        print_json(&summary.to_json(cli.strict));
    } else {
        print!("{}", summary.render_human(cli.strict));
    }
    code(summary.exit_status(cli.strict))
}

fn run_one(file: &PathBuf, cli: &Cli) -> ExitCode {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return fail_usage(&format!("{}: {e}", file.display())),
    };
    let recipe = match parse_recipe(&text) {
        Ok(r) => r,
        Err(e) => return fail_usage(&format!("{}: {e}", file.display())),
    };
    let report = match run(&recipe) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("starcalc: {}: {e}", file.display());
            return code(if e.is_usage_error() { ExitStatus::Usage } else { ExitStatus::Fail });
        }
    };
    let passed = report.passed(cli.strict);
    if cli.machine {
        print_json(&json!({ "source": file.display().to_string(), "passed": passed, "report": report.to_json() }));
    } else {
        print!("{}", report.render_human(cli.strict));
    }
    code(if passed { ExitStatus::Pass } else { ExitStatus::Fail })
}

fn batch_dir(dir: &PathBuf, jobs: Option<usize>) -> Result<BatchSummary, RecipeError> {
    batch(&recipe_files(dir)?, jobs)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { file } => run_one(file, &cli),
        Command::Batch { dir, jobs } => match batch_dir(dir, *jobs) {
            Ok(summary) => report_batch(&summary, &cli),
            Err(e) => fail_usage(&e),
        },
        Command::Corpus { jobs } => report_batch(&run_corpus(*jobs), &cli),
        Command::Chart { dir, out, svg } => {
            let summary = match batch_dir(dir, None) {
                Ok(s) => s,
                Err(e) => return fail_usage(&e),
            };
            let points = chart_points(summary.reports());
            if let Err(e) = std::fs::write(out, chart_csv(&points)) {
                return fail_usage(&format!("{}: {e}", out.display()));
            }
            if let Some(svg) = svg {
                if let Err(e) = std::fs::write(svg, chart_svg(&points)) {
                    return fail_usage(&format!("{}: {e}", svg.display()));
                }
            }
            if !cli.machine {
                println!("wrote {} points to {}", points.len(), out.display());
            }
            code(ExitStatus::Pass)
        }
    }
}
