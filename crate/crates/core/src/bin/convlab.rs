use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use convlab::scenario::{builtin_repro, repro_all, run_scenario, traces_csv, Builtin, Report, ScenarioConfig};
use convlab::Error;

/// Convergence checks for sequences of convex sets.
#[derive(Parser)]
#[command(name = "convlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Output {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write trace rows (n, object_id, value) as CSV.
    #[arg(long = "trace-csv")]
    trace_csv: Option<PathBuf>,
    /// Record wall time in the report (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Run a built-in reproduction, or `all`.
    Repro {
        name: String,
        #[command(flatten)]
        output: Output,
    },
    /// Run a probe-only scenario file (w*-Kadec, Mackey, LUR, property (*)).
    Probe {
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// List built-in reproductions.
    ListBuiltins,
}

/// Configuration, I/O or environment errors; all exit with status 2.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(e.to_string())
    }
}

fn read_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    Ok(ScenarioConfig::from_json(&text)?)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn emit(reports: Vec<Report>, output: &Output) -> Result<bool, Failure> {
    let matched = reports.iter().all(|r| r.matched);
    let json = if reports.len() == 1 {
        reports[0].to_json()
    } else {
        let mut s = serde_json::to_string_pretty(&reports).expect("reports serialize");
        s.push('\n');
        s
    };
    match &output.out {
        Some(p) => write(p, &json)?,
        None => print!("{json}"),
    }
    if let Some(p) = &output.trace_csv {
        write(p, &traces_csv(&reports))?;
    }
    for r in &reports {
        for c in r.results.iter().filter(|c| !c.matched) {
            eprintln!(
                "{}: {} expected {}, observed {}{}",
                r.scenario,
                c.id,
                c.expected.as_deref().unwrap_or("-"),
                c.observed,
                c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
            );
        }
    }
    Ok(matched)
}

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<Vec<Report>, T>) -> Result<Vec<Report>, T> {
    let start = Instant::now();
    let mut reports = f()?;
    if timing {
        let ms = start.elapsed().as_millis() as u64;
        for r in &mut reports {
            r.wall_time_ms = Some(ms);
        }
    }
    Ok(reports)
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("CONVLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Failure(format!("CONVLAB_THREADS: `{v}` is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure(format!("CONVLAB_THREADS: {e}")))?;
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    match cli.command {
        Command::ListBuiltins => {
            for b in Builtin::ALL {
                println!("{:<24}{}", b.name(), b.summary());
            }
            Ok(true)
        }
        Command::Run { config, output } => {
            let cfg = read_config(&config)?;
            let reports = timed(output.timing, || Ok::<_, Failure>(vec![run_scenario(&cfg)?]))?;
            emit(reports, &output)
        }
        Command::Probe { config, output } => {
            let cfg = read_config(&config)?;
            if let Some((k, c)) = cfg.checks.iter().enumerate().find(|(_, c)| !c.check.is_probe()) {
                return Err(Failure(format!(
                    "checks[{k}].check: `{}` is not a probe; use `convlab run`",
                    c.check.name()
                )));
            }
            let reports = timed(output.timing, || Ok::<_, Failure>(vec![run_scenario(&cfg)?]))?;
            emit(reports, &output)
        }
        Command::Repro { name, output } => {
            let reports = timed(output.timing, || -> Result<_, Failure> {
                Ok(if name == "all" { repro_all()? } else { vec![builtin_repro(&name)?] })
            })?;
            emit(reports, &output)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
