mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{execute, export_data, CliError, CliResult};
use config::{CommandName, JobConfig};

#[derive(Parser)]
#[command(name = "causal", version, about = "Causal polytopes and See-Saw optimization over process matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Output {
    /// Root output directory; files go to `<out>/<command>/<label>/`.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Subdirectory name; derived from the inputs when omitted.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate deterministic causal strategies of a scenario.
    Vertices {
        /// `m_A,m_B,k_A,k_B`
        #[arg(long)]
        scenario: String,
        #[command(flatten)]
        output: Output,
    },
    /// Facets of a causal polytope, or of the convex hull of a CSV point list.
    Facets {
        #[arg(long, required_unless_present = "points", conflicts_with = "points")]
        scenario: Option<String>,
        /// CSV of rational coordinates, one point per line.
        #[arg(long)]
        points: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Validate a process matrix and instruments and evaluate an inequality.
    CheckW {
        #[arg(long)]
        w: PathBuf,
        #[arg(long)]
        alice: PathBuf,
        #[arg(long)]
        bob: PathBuf,
        #[arg(long)]
        inequality: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// See-Saw lower bounds on the quantum value of an objective.
    Optimize {
        /// `gyni`, `lgyni`, `weighted:α:β` or `custom:<inequality.json>`
        #[arg(long)]
        objective: String,
        /// `d_AI,d_AO,d_BI,d_BO`
        #[arg(long, default_value = "2,2,2,2")]
        dims: String,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Cycle-improvement stopping tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Scan the quantum boundary in the `(p(a=y), p(b=x))` plane.
    Boundary {
        #[arg(long, default_value = "2,2,2,2")]
        dims: String,
        #[arg(long, default_value_t = 64)]
        angles: usize,
        /// Restarts per angle.
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Saturating vertices and facet test for an inequality.
    FacetReport {
        /// Defaults to the inequality's own scenario.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        inequality: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Run a job described by a JSON config file.
    Run { config: PathBuf },
    /// Write the bundled example process matrices, instruments and inequalities.
    ExportData {
        #[arg(long)]
        out: PathBuf,
    },
}

fn job(command: CommandName, output: Output) -> JobConfig {
    let mut cfg = JobConfig::new(command);
    cfg.out = Some(output.out);
    cfg.label = output.label;
    cfg
}

fn dispatch(cli: Cli) -> CliResult<String> {
    let cfg = match cli.command {
        Command::Vertices { scenario, output } => {
            let mut c = job(CommandName::Vertices, output);
            c.scenario = Some(scenario);
            c
        }
        Command::Facets { scenario, points, output } => {
            let mut c = job(CommandName::Facets, output);
            c.scenario = scenario;
            c.points = points;
            c
        }
        Command::CheckW { w, alice, bob, inequality, tol, output } => {
            let mut c = job(CommandName::CheckW, output);
            c.w = Some(w);
            c.alice = Some(alice);
            c.bob = Some(bob);
            c.inequality = Some(inequality);
            c.tol = tol;
            c
        }
        Command::Optimize { objective, dims, restarts, seed, tol, threads, output } => {
            let mut c = job(CommandName::Optimize, output);
            c.objective = Some(objective);
            c.dims = Some(dims);
            c.restarts = restarts;
            c.seed = Some(seed);
            c.tol = tol;
            c.threads = threads;
            c
        }
        Command::Boundary { dims, angles, restarts, seed, tol, threads, output } => {
            let mut c = job(CommandName::Boundary, output);
            c.dims = Some(dims);
            c.angles = Some(angles);
            c.restarts = restarts;
            c.seed = Some(seed);
            c.tol = tol;
            c.threads = threads;
            c
        }
        Command::FacetReport { scenario, inequality, output } => {
            let mut c = job(CommandName::FacetReport, output);
            c.scenario = scenario;
            c.inequality = Some(inequality);
            c
        }
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| CliError::usage(format!("{}: {e}", config.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", config.display())))?
        }
        Command::ExportData { out } => {
            let files = export_data(&out)?;
            return Ok(format!("{} files written to {}", files.len(), out.display()));
        }
    };
    execute(&cfg)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
