//! Command-line front end for running a federated experiment.
//!
//! Exit codes: 0 on success, 1 for configuration errors, 2 when the run aborts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fedcfa::harness::{parse_config, run_experiment, to_csv, ExperimentConfig, HarnessError};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Source {
    Synthetic,
    Idx,
}

#[derive(Debug, Parser)]
#[command(version, about = "Secure federated learning simulator")]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(long)]
    clients: Option<usize>,
    #[arg(long, value_enum)]
    security: Option<Switch>,
    #[arg(long, value_enum)]
    encrypt: Option<Switch>,
    /// none, model-poison, data-poison, tamper, sybil or replay.
    #[arg(long)]
    attack: Option<String>,
    #[arg(long)]
    attack_fraction: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    attack_strength: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    dataset: Option<Source>,
    #[arg(long)]
    idx_images: Option<PathBuf>,
    #[arg(long)]
    idx_labels: Option<PathBuf>,
    #[arg(long)]
    subset: Option<usize>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let switch = |s: Switch| match s {
            Switch::On => "on".to_string(),
            Switch::Off => "off".to_string(),
        };
        let path = |p: &PathBuf| p.display().to_string();
        let mut out = Vec::new();
        let mut push = |key, value: Option<String>| {
            if let Some(v) = value {
                out.push((key, v));
            }
        };
        push("rounds", self.rounds.map(|v| v.to_string()));
        push("clients", self.clients.map(|v| v.to_string()));
        push("security", self.security.map(switch));
        push("encrypt", self.encrypt.map(switch));
        push("attack.kind", self.attack.clone());
        push(
            "attack.fraction",
            self.attack_fraction.map(|v| v.to_string()),
        );
        push(
            "attack.strength",
            self.attack_strength.map(|v| v.to_string()),
        );
        push("seed", self.seed.map(|v| v.to_string()));
        push("out", self.out.as_ref().map(path));
        push(
            "data.source",
            self.dataset.map(|s| match s {
                Source::Synthetic => "synthetic".to_string(),
                Source::Idx => "idx".to_string(),
            }),
        );
        push("data.idx_images", self.idx_images.as_ref().map(path));
        push("data.idx_labels", self.idx_labels.as_ref().map(path));
        push("data.subset", self.subset.map(|v| v.to_string()));
        out
    }

    fn experiment_config(&self) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        for (key, value) in self.overrides() {
            cfg.set(key, &value)
                .map_err(|e| format!("--{}: {e}", flag_for(key)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn flag_for(key: &str) -> &str {
    match key {
        "attack.kind" => "attack",
        "attack.fraction" => "attack-fraction",
        "attack.strength" => "attack-strength",
        "data.source" => "dataset",
        "data.idx_images" => "idx-images",
        "data.idx_labels" => "idx-labels",
        "data.subset" => "subset",
        other => other,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match cli.experiment_config() {
        Ok(cfg) => cfg,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(1);
        }
    };
    match run_experiment(&cfg) {
        Ok(table) => {
            if cfg.out.is_none() {
                match to_csv(&table, cfg.timing) {
                    Ok(csv) => print!("{csv}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            let s = table.summary();
            eprintln!(
                "{} rounds, {} submissions, {} incidents, final accuracy {:.4}",
                table.reports.len(),
                s.submissions,
                s.metrics.incidents,
                s.final_accuracy.unwrap_or(f64::NAN),
            );
            ExitCode::SUCCESS
        }
        Err(HarnessError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e @ HarnessError::Idx(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
