use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nhdtc::runner::{self, ExperimentConfig, RunManifest};
use nhdtc::{Error, Result};

/// Two-chain discrete time crystal simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a figure preset (fig1, fig2, fig3, fig4, fig5, figS2, ptcheck).
    Run {
        preset: String,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// PT and parity certificates over the symmetry grid.
    Ptcheck {
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Free-form pipeline; set `pipeline=` in the config or overrides.
    Sweep {
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Quick invariant suite; exits nonzero on any failure.
    Validate,
}

#[derive(Args)]
struct ConfigOpts {
    /// Flat `key = value` config file applied before overrides.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// `key=value` overrides.
    overrides: Vec<String>,
}

impl ConfigOpts {
    fn resolve(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            cfg.apply_text(&text)?;
        }
        cfg.apply_overrides(&self.overrides)?;
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        Ok(cfg)
    }
}

fn report(manifest: &RunManifest) {
    println!("wrote {} files to {}", manifest.outputs.len(), manifest.config.output.display());
    for (k, v) in &manifest.results {
        println!("  {k}: {v}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { preset, opts } => runner::preset(&preset)
            .and_then(|cfg| opts.resolve(cfg))
            .and_then(|cfg| runner::execute(&cfg))
            .map(|m| report(&m)),
        Command::Ptcheck { opts } => runner::preset("ptcheck")
            .and_then(|cfg| opts.resolve(cfg))
            .and_then(|cfg| runner::execute(&cfg))
            .map(|m| report(&m)),
        Command::Sweep { opts } => opts
            .resolve(ExperimentConfig::default())
            .and_then(|cfg| runner::execute(&cfg))
            .map(|m| report(&m)),
        Command::Validate => runner::validate_invariants().and_then(|checks| {
            let mut failed = 0;
            for c in &checks {
                let verdict = if c.passed() { "PASS" } else { "FAIL" };
                println!("{verdict}  {:<34} {:.3e} (tol {:.0e})", c.name, c.value, c.tolerance);
                failed += usize::from(!c.passed());
            }
            if failed > 0 {
                Err(Error::InvalidConfig(format!("{failed} invariant(s) failed")))
            } else {
                Ok(())
            }
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
