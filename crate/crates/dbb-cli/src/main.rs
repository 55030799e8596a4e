//! `dbb`: run, reproduce, and certify Barzilai-Borwein optimization
//! experiments. Exit codes: 0 success, 1 verification failure, 2 usage or
//! config error.

use dbb_cli::{config, presets, runner, verify};

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "dbb", version, about = "Distributed Barzilai-Borwein experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment from a TOML config file
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reproduce a canned experiment suite into a directory
    Preset {
        /// One of: fig1_centralized, fig2_distributed, superlinear
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-run the bound-certification suite; exits 1 on any failed check
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let result = (|| -> anyhow::Result<PathBuf> {
                let text = std::fs::read_to_string(&config)?;
                let cfg = config::parse_config(&text)?;
                let base = config
                    .parent()
                    .filter(|p| !p.as_os_str().is_empty())
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("."));
                runner::run_to_files(&cfg, &base)
            })();
            match result {
                Ok(path) => {
                    println!("wrote {}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Preset { name, out, seed } => match presets::run_preset(&name, &out, seed) {
            Ok(paths) => {
                for p in paths {
                    println!("wrote {}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
        Command::Verify { seed } => match verify::run_all(seed) {
            Ok(results) => {
                let mut all_pass = true;
                for r in &results {
                    let status = if r.pass { "PASS" } else { "FAIL" };
                    println!("{status} {}: {}", r.name, r.detail);
                    all_pass &= r.pass;
                }
                if all_pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
