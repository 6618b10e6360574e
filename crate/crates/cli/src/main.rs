use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use biot_core::experiments::{
    run_convergence, run_naive_sweep, run_nondim, run_qblock_cond, run_sweep, run_swelling_demo,
};
use biot_core::precond::SolveMode;
use biot_core::{Error, ExperimentConfig, ExperimentKind, OutputFormat, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "biot", version, about = "Two-domain Biot poroelasticity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured-solution errors and convergence orders
    Convergence(Common),
    /// MinRes iteration counts over a parameter grid
    Sweep(Common),
    /// Naive single-domain preconditioner against the robust one
    NaiveSweep(Common),
    /// Condition estimates of the AMG-preconditioned pressure block
    QblockCond(Common),
    /// Dimensionless group ranges of the scenario presets
    Nondim(Common),
    /// One time step of an osmotically driven swelling scenario
    SwellingDemo(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Amg,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; absent keys take the experiment defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the table here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// AMG strong threshold of the pressure block
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_it: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::Convergence(c) => (ExperimentKind::Convergence, c),
            Command::Sweep(c) => (ExperimentKind::Sweep, c),
            Command::NaiveSweep(c) => (ExperimentKind::NaiveSweep, c),
            Command::QblockCond(c) => (ExperimentKind::QblockCond, c),
            Command::Nondim(c) => (ExperimentKind::Nondim, c),
            Command::SwellingDemo(c) => (ExperimentKind::SwellingDemo, c),
        }
    }
}

fn load(kind: ExperimentKind, args: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json_for(kind, &text)?
        }
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(f) = args.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::Md => OutputFormat::Markdown,
        };
    }
    if let Some(m) = args.mode {
        cfg.mode = match m {
            Mode::Exact => SolveMode::Exact,
            Mode::Amg => SolveMode::Amg,
        };
    }
    if let Some(t) = args.theta {
        cfg.theta = t;
    }
    if let Some(t) = args.tol {
        cfg.tol = t;
    }
    if let Some(m) = args.max_it {
        cfg.max_it = m;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<usize> {
    macro_rules! render {
        ($report:expr) => {{
            let r = $report?;
            (r.render(cfg.format)?, r.failures)
        }};
    }
    let (text, failures) = match kind {
        ExperimentKind::Convergence => render!(run_convergence(cfg)),
        ExperimentKind::Sweep => render!(run_sweep(cfg)),
        ExperimentKind::NaiveSweep => render!(run_naive_sweep(cfg)),
        ExperimentKind::QblockCond => render!(run_qblock_cond(cfg)),
        ExperimentKind::Nondim => render!(run_nondim(cfg)),
        ExperimentKind::SwellingDemo => render!(run_swelling_demo(cfg)),
    };
    match &cfg.output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(e.to_string()))?,
    }
    Ok(failures)
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().command.split();
    let result = load(kind, &args).and_then(|cfg| run(kind, &cfg));
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("biot: {failed} run(s) did not converge");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("biot: {e}");
            ExitCode::FAILURE
        }
    }
}
