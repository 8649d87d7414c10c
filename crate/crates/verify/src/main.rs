use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swlab::field::{write_matrix, Grid};
use swlab_verify::checks::kernel_operator;
use swlab_verify::study::convergence_study;
use swlab_verify::{run_suite, Report, Result, Suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "verify", about = "Run swlab verification suites and convergence studies")]
struct Cli {
    /// Worker threads for field operations (default: rayon's choice).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run suites and write a JSON report.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replaces the config's suite list; repeatable.
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Working grid size.
        #[arg(long)]
        grid: Option<usize>,
        /// Report path; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Record per-check wall time (reports are then no longer reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Fit a convergence order over a ladder of steps or grid sizes.
    Study {
        #[arg(long)]
        check: String,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Grid for step studies.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write the dense kernel operator at A = 0, α ≡ ALPHA in the field container format.
    ExportKernel {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 4)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn emit(json: &str, path: Option<PathBuf>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{json}\n"))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run { config, suites, seed, grid, report, timings } => {
            let mut cfg = match config {
                Some(path) => SuiteConfig::parse(&fs::read_to_string(path)?)?,
                None => SuiteConfig::default(),
            };
            if !suites.is_empty() {
                cfg.suites = suites.iter().map(|s| s.parse()).collect::<Result<Vec<Suite>>>()?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = grid {
                cfg.grid = n;
            }
            cfg.validate()?;
            let rep = Report::new(cfg.seed, run_suite(&cfg, timings)?);
            for c in &rep.checks {
                eprintln!("{} {} = {:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.measured.value);
            }
            emit(&rep.to_json(), report)?;
            if let Some(f) = rep.first_failure() {
                eprintln!("first failing check: {}", f.name);
            }
            Ok(rep.passed())
        }
        Command::Study { check, levels, seed, grid, report } => {
            let rep = convergence_study(&check, seed, Grid::new(grid)?, &levels)?;
            emit(&rep.to_json(), report)?;
            if !rep.pass {
                eprintln!("first failing check: {}", rep.check);
            }
            Ok(rep.pass)
        }
        Command::ExportKernel { alpha, grid, out } => {
            let m = kernel_operator(Grid::new(grid)?, alpha)?;
            write_matrix(&m, BufWriter::new(File::create(out)?))?;
            Ok(true)
        }
    }
}
