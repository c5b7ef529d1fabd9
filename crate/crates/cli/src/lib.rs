//! Experiment harness for the invariant-based surrogates: hull construction,
//! space-filling sampling, dataset generation, training, error evaluation and
//! load-path sweeps, all driven by one TOML configuration.

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ExperimentConfig, ModelName};
pub use error::{CliError, Result};
pub use pipeline::{stress_error, ErrorRow, SweepResult, Workspace};

#[derive(Debug, Parser)]
#[command(name = "invsurr", version, about = "Invariant-based GPR surrogates for hyperelastic laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the data, hull and anneal seeds (test seed becomes N + 1000).
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Full-size budgets: 20,000 test points, 100,000-point hull cloud, longer annealing.
    #[arg(long, global = true)]
    pub paper_scale: bool,
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Convex hull of the admissible invariant region.
    Hull,
    /// Space-filling design by simulated annealing.
    Sample,
    /// Training datasets (classical and invariant form).
    GenData,
    /// Fit one surrogate per model.
    Train,
    /// Stress errors on a fresh test set.
    Evaluate,
    /// Stresses along a load path far beyond the training domain.
    Sweep,
    /// All stages in order.
    Run,
}

impl Cli {
    pub fn workspace(&self) -> Result<Workspace> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg = cfg.with_seed(seed);
        }
        if self.paper_scale {
            cfg = cfg.with_paper_scale();
        }
        Ok(Workspace::new(cfg, &self.out))
    }

    /// Runs the selected stage; returns a short human-readable summary.
    pub fn execute(&self) -> Result<String> {
        let ws = self.workspace()?;
        ws.write_config()?;
        let summary = match self.command {
            Command::Hull => {
                let h = ws.hull()?;
                format!("hull: {} vertices, {} faces", h.vertices.len(), h.faces.len())
            }
            Command::Sample => {
                let s = ws.sample()?;
                format!("sample: {} points ({} accepted moves)", s.len(), s.stats.accepted)
            }
            Command::GenData => ws
                .gen_data()?
                .iter()
                .map(|(m, r)| format!("{}: {} rows from {} candidates", m.as_str(), r.kept, r.candidates))
                .collect::<Vec<_>>()
                .join("\n"),
            Command::Train => ws
                .train()?
                .iter()
                .map(|(m, s)| {
                    let path = if s.regressor().is_local() { "local" } else { "global" };
                    format!("{}: {} rows, {path} GPR", m.as_str(), s.n_train())
                })
                .collect::<Vec<_>>()
                .join("\n"),
            Command::Evaluate => format_errors(&ws.evaluate()?),
            Command::Sweep => {
                let s = ws.sweep()?;
                format!("sweep: {} points in {}", s.t.len(), s.parameter)
            }
            Command::Run => format_errors(&ws.run_all()?.0),
        };
        Ok(summary)
    }
}

fn format_errors(rows: &[ErrorRow]) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "{:<14} n_train {:>5}  E_S {:.4e}  normalized {:.4e}",
                r.model.as_str(),
                r.n_train,
                r.e_s,
                r.e_s_normalized
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}
