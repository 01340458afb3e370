use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use identlab::{presets, CliError, ExperimentConfig};

const SCHEMAS: &str = "\
OUTPUT FILES AND CSV SCHEMAS (stable across runs; floats are shortest round-trip):
  every run          manifest.json: config_hash, artifact_version, per-file sha256, wall_time_secs
  verify-lemma1      lemma1.csv: n,rho,sigma2,mu,xbar,max_dev
  mean-variance      mean_variance.csv: n,reps,var_hat,target,se,ok
  matched-pair       matched_ks.csv: case,rho2,sigma2_2,reps,ks_statistic,p_value,rejects_at_0.001
                     power_curve.csv: mu,p1_hat,p2_hat,diff,se_diff
  rho-nonconsistency rho_iqr.csv: design,total_n,reps,iqr
  mu-distinguish     mu_distinguish.csv: rho,set,n,reps,p1_hat,p1_lo,p1_hi,p2_hat,p2_lo,p2_hi,verdict
  m2-components      m2_components.csv: quantity,n,reps,value,target
  binary-distinguish binary_reports.csv: set,n,reps,p1_hat,p1_lo,p1_hi,p2_hat,p2_lo,p2_hi,verdict
                     m5_marginals.csv: position,marginal_hat,p,se,ok
  changepoint-calibration
                     changepoint.csv: case,p_or_q,sequences,rate,ok
  kmeans-consistency kmeans_mixture.csv / kmeans_gaussian.csv: n,reps,frac_correct,ci_lo,ci_hi
                     kmeans_toy.csv: n,dim,k,lloyd_objective,exact_objective,equal
                     mixture_model.json: the constructed associated-mixture spec

EXIT CODES: 0 ok, 2 config error, 3 numerical/runtime failure, 4 built-in check failed.";

/// Reproducible identifiability experiments: configs in, CSV/JSON reports
/// and SVG plots out.
#[derive(Parser)]
#[command(name = "identlab", version, after_long_help = SCHEMAS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config file or a built-in preset name.
    #[command(after_long_help = SCHEMAS)]
    Run {
        /// Path to a config JSON, or one of the names from `identlab presets`.
        config: String,
        /// Worker threads (default: all cores). Results do not depend on this.
        #[arg(long)]
        threads: Option<usize>,
        /// Render SVG plots next to the CSV outputs.
        #[arg(long)]
        plots: bool,
        /// Output directory (overrides the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config file without running it.
    Validate { config: PathBuf },
    /// List the built-in preset configs (one per acceptance experiment).
    Presets {
        /// Write each preset as <name>.json into this directory.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn load_config(arg: &str) -> Result<ExperimentConfig, CliError> {
    let path = PathBuf::from(arg);
    if path.exists() {
        let text = fs::read_to_string(&path)?;
        ExperimentConfig::from_json(&text)
    } else if let Some(config) = presets::by_name(arg) {
        Ok(config)
    } else {
        Err(CliError::Config(format!(
            "'{arg}' is neither a readable file nor a preset name (see `identlab presets`)"
        )))
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            threads,
            plots,
            out,
        } => {
            let parsed = load_config(&config)?;
            let out_dir = out
                .or_else(|| parsed.output.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out").join(parsed.spec.name()));
            let summary = identlab::run_to_dir(&parsed, &out_dir, threads, plots)?;
            for check in &summary.checks {
                println!(
                    "{} {}: {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            println!(
                "wrote {} file(s) to {}",
                summary.files.len() + 1,
                out_dir.display()
            );
            let failed = summary.failed_checks();
            if failed > 0 {
                return Err(CliError::CheckFailed { failed });
            }
            Ok(())
        }
        Command::Validate { config } => {
            let text = fs::read_to_string(&config)?;
            let parsed = ExperimentConfig::from_json(&text)?;
            println!("ok: {} (seed {})", parsed.spec.name(), parsed.seed);
            Ok(())
        }
        Command::Presets { write } => {
            for preset in presets::all() {
                println!("{:24} {}", preset.name, preset.description);
                if let Some(dir) = &write {
                    fs::create_dir_all(dir)?;
                    let path = dir.join(format!("{}.json", preset.name));
                    let mut text = serde_json::to_string_pretty(&preset.config)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                    text.push('\n');
                    fs::write(&path, text)?;
                }
            }
            if let Some(dir) = &write {
                println!("wrote preset configs to {}", dir.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
