//! `gibc`: generate synthetic data, invert it, evaluate forward maps and
//! report reconstruction errors.

mod selftest;

use clap::{Parser, Subcommand};
use gibc::forward::{forward_map, ForwardModel};
use gibc::geometry::FourierCurve;
use gibc::harness::{error_report, generate_data, initial_state, report_csv, ExperimentConfig, HarnessError, ScatteringDataset};
use gibc::inverse::{continuation_solve, InverseError, Trajectory};
use serde::de::DeserializeOwned;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gibc", version, about = "Shape and impedance recovery from multifrequency scattering data")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Progress messages on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a dataset from the configured obstacle.
    Generate,
    /// Run the continuation inversion on a dataset.
    Invert {
        #[arg(long)]
        data: PathBuf,
        /// JSON-lines iteration log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Receptor field of one forward model at one frequency.
    Forward {
        #[arg(long)]
        omega: f64,
        /// Curve JSON; defaults to the configured shape.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Forward model JSON (`{"kind":"neumann"}`, ...); defaults to the configured data model.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Discretization nodes; defaults to the data policy.
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Per-frequency error table as CSV.
    Report {
        #[arg(long)]
        trajectory: PathBuf,
        /// Truth curve JSON; defaults to the truth stored in `--data`.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Oracle checks of the numerical building blocks.
    Selftest,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Harness(#[from] HarnessError),
    #[error("{0}")]
    Inverse(#[from] InverseError),
    #[error("{0}")]
    Forward(#[from] gibc::forward::ForwardError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} self-test checks failed")]
    Selftest { failed: usize, total: usize },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.into(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut c = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    Ok(c)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let verbose = cli.verbose;
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Generate => {
            let cfg = config(cli)?;
            let truth = cfg.shape.curve()?;
            let data = generate_data(&truth, &cfg, |w| {
                if verbose {
                    eprintln!("generating omega = {w}");
                }
            })?;
            for (w, e) in &data.failures {
                eprintln!("forward solve failed at omega = {w}: {e}");
            }
            emit(out, &data.to_json())
        }
        Command::Invert { data, log } => {
            let cfg = config(cli)?;
            let dataset: ScatteringDataset = read_json(data)?;
            if dataset.frequencies.is_empty() {
                return Err(CliError::Usage(format!("{} holds no frequencies", data.display())));
            }
            let init = initial_state(&dataset, &cfg.model, &cfg.optimizer);
            let traj = continuation_solve(&dataset, init, &cfg.optimizer, |r| {
                if verbose {
                    eprintln!("omega = {}: residual {:.3e} after {} iterations", r.omega, r.residual, r.iterations);
                }
                if let Some(e) = &r.error {
                    eprintln!("omega = {}: {e}", r.omega);
                }
            })?;
            if let Some(p) = log {
                let lines: String =
                    traj.log.iter().map(|l| serde_json::to_string(l).expect("record serializes") + "\n").collect();
                std::fs::write(p, lines).map_err(|source| CliError::Io { path: p.clone(), source })?;
            }
            emit(out, &serde_json::to_string_pretty(&traj).expect("trajectory serializes"))
        }
        Command::Forward { omega, curve, model, nodes } => {
            let cfg = config(cli)?;
            let curve: FourierCurve = match curve {
                Some(p) => read_json(p)?,
                None => cfg.shape.curve()?,
            };
            let model: ForwardModel = match model {
                Some(p) => read_json(p)?,
                None => cfg.data_model.clone(),
            };
            let phys = cfg.physical_at(*omega);
            let sensors = cfg.sensors(*omega);
            let n = nodes.unwrap_or_else(|| gibc::harness::data_nodes(&curve, &phys, &model, cfg.ppw));
            let field = forward_map(&model, &curve, n, &phys, &sensors)?;
            emit(out, &serde_json::to_string(&field).expect("field serializes"))
        }
        Command::Report { trajectory, truth, data } => {
            let traj: Trajectory = read_json(trajectory)?;
            let truth: FourierCurve = match (truth, data) {
                (Some(p), _) => read_json(p)?,
                (None, Some(d)) => read_json::<ScatteringDataset>(d)?.provenance.truth,
                (None, None) => return Err(CliError::Usage("report needs --truth or --data".into())),
            };
            let rows = error_report(&traj, &truth)?;
            emit(out, &report_csv(&rows))
        }
        Command::Selftest => {
            let checks = selftest::run();
            let mut text = String::new();
            for c in &checks {
                let tag = if c.passed() { "PASS" } else { "FAIL" };
                text += &format!("{tag} {}: {:.3e} (limit {:.0e})\n", c.name, c.value, c.limit);
            }
            let failed = checks.iter().filter(|c| !c.passed()).count();
            text += &format!("{} passed, {failed} failed\n", checks.len() - failed);
            emit(out, &text)?;
            if failed > 0 {
                return Err(CliError::Selftest { failed, total: checks.len() });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
