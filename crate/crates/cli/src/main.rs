use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use osproj_cli::commands::{cbnorm, run_config_file, suite, CbnormArgs, CBNORM_SDP_MAX_CHOI_DIM};
use osproj_cli::{parse_tol_scale, CliError, TOL_SCALE_VAR};

#[derive(Parser)]
#[command(name = "osproj", version, about = "Projections onto fixed points of semigroup actions on matrix spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config and write its report.
    Run {
        config: PathBuf,
        /// Report path; overrides the config's `output` field.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound the completely bounded norm of a superoperator file.
    Cbnorm {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Amplification level for the lower-bound search.
        #[arg(long)]
        amplify: Option<usize>,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the lower-bound witness matrix here.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long, default_value_t = CBNORM_SDP_MAX_CHOI_DIM)]
        sdp_max_choi_dim: usize,
    },
    /// Run every config in a directory.
    Suite {
        dir: PathBuf,
        /// Directory for per-config reports and `suite.json`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("osproj: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let raw = std::env::var(TOL_SCALE_VAR).ok();
    let tol_scale = match parse_tol_scale(raw.as_deref()) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    if tol_scale != 1.0 {
        eprintln!("osproj: {TOL_SCALE_VAR}={tol_scale} scales every tolerance; not valid for acceptance runs");
    }
    match cli.command {
        Command::Run { config, out } => {
            let outcome = run_config_file(&config, out.as_deref(), tol_scale);
            if outcome.written.is_none() {
                print!("{}", outcome.report.to_json());
            }
            if let Some(err) = &outcome.report.error {
                eprintln!("osproj: {err}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Command::Cbnorm {
            file,
            tol,
            amplify,
            restarts,
            seed,
            witness,
            sdp_max_choi_dim,
        } => {
            let args = CbnormArgs {
                file,
                tol: tol * tol_scale,
                amplify,
                restarts,
                seed,
                witness,
                sdp_max_choi_dim,
            };
            match cbnorm(&args) {
                Ok(v) => {
                    println!("{}", serde_json::to_string_pretty(&v).expect("json"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Suite { dir, out_dir } => match suite(&dir, out_dir.as_deref(), tol_scale) {
            Ok(s) => {
                println!("{}", serde_json::to_string_pretty(&s.aggregate).expect("json"));
                ExitCode::from(s.exit_code as u8)
            }
            Err(e) => fail(&e),
        },
    }
}
