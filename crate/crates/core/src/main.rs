use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fasp_biharmonic::experiment::{self, ExperimentConfig};
use fasp_biharmonic::mesh::{Domain, Mesh};
use fasp_biharmonic::Error;

#[derive(Parser)]
#[command(name = "solver", about = "Morley plate solver and preconditioner experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write `<output>/<name>.csv`.
    Run { config: PathBuf },
    /// Write the refined mesh of a built-in domain.
    Mesh {
        domain: String,
        level: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write interface preconditioner spectra and a gnuplot script.
    Scatter {
        domain: String,
        level: usize,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::UnknownDomain(_) => 2,
        _ => 3,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn domain(name: &str) -> Result<Domain, Error> {
    name.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let cfg = match ExperimentConfig::from_file(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            for &level in &cfg.levels {
                println!("level {level}: {}", experiment::cost_estimate(&cfg, level));
            }
            match experiment::run(&cfg) {
                Ok(summary) => {
                    for row in &summary.rows {
                        match (&row.failure, row.kappa(), row.pcg_iters) {
                            (Some(f), _, _) => println!("level {}: FAILED {f}", row.level),
                            (None, k, it) => println!(
                                "level {}: dof {} kappa {} kappa_eff {} pcg {}",
                                row.level,
                                row.dof,
                                k.map_or("-".into(), |v| format!("{v:.4}")),
                                row.kappa_eff.map_or("-".into(), |v| format!("{v:.4}")),
                                it.map_or("-".into(), |v| v.to_string()),
                            ),
                        }
                    }
                    println!("wrote {}", summary.csv.display());
                    match summary.failure {
                        Some(e) => fail(e),
                        None => ExitCode::SUCCESS,
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Mesh { domain: d, level, out } => {
            let res = domain(&d).and_then(|d| Mesh::build_domain(d, level).save(&out));
            match res {
                Ok(()) => {
                    println!("wrote {}", out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Scatter { domain: d, level, out } => {
            match domain(&d).and_then(|d| experiment::emit_scatter(d, level, &out)) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
