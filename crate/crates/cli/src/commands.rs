//! The three commands: `run`, `cbnorm` and `suite`.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use osproj_core::cbnorm::{cb_norm_cp, cb_norm_factorization_bound, cb_norm_lower, cb_norm_upper};
use osproj_core::linalg::format_matrix;
use osproj_core::superop::format::parse_superop;
use serde_json::{json, Value};

use crate::config::{parse_config, Resolver, DEFAULT_REPORT_MATRIX_MAX_DIM};
use crate::report::{timings_path, write_atomic, MatrixOut, RunReport, Status, Timings};
use crate::scenarios::execute;
use crate::{CliError, EXIT_NUMERIC, EXIT_PASS};

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timings: Timings,
    /// Where the report was written, if anywhere.
    pub written: Option<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn failed_report(config_file: String, tol_scale: f64, config: Value, scenario: Option<String>, e: &CliError) -> RunReport {
    RunReport {
        tool: "osproj",
        version: env!("CARGO_PKG_VERSION"),
        config_file,
        scenario,
        tol_scale,
        status: match e {
            CliError::Config(_) => Status::ConfigError,
            CliError::Numeric(_) => Status::NumericError,
        },
        exit_code: e.exit_code(),
        error: Some(e.message().to_string()),
        config,
        measurements: Default::default(),
        projection: None,
        invariants: Vec::new(),
        failed: Vec::new(),
        warnings: Vec::new(),
    }
}

/// Runs one config. The report goes to `out` if given, else to the config's
/// `output` field (relative to the config), else nowhere; timings go to a
/// sidecar next to it.
pub fn run_config_file(path: &Path, out: Option<&Path>, tol_scale: f64) -> RunOutcome {
    let mut timings = Timings::default();
    let name = file_name(path);
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let err = CliError::Config(format!("cannot read {}: {e}", path.display()));
            return finish(failed_report(name, tol_scale, Value::Null, None, &err), timings, out.map(Path::to_path_buf));
        }
    };
    let cfg = match timings.record("parse", || parse_config(&text)) {
        Ok(c) => c,
        Err(e) => {
            return finish(failed_report(name, tol_scale, Value::Null, None, &e), timings, out.map(Path::to_path_buf));
        }
    };
    let target = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().map(|o| base.join(o)));
    let config_value = serde_json::to_value(&cfg).expect("config serializes");
    let scenario = Some(cfg.scenario.as_str().to_string());
    let tol = cfg.verification.tolerances.scaled(tol_scale);
    let resolver = Resolver::new(&base);
    let report = match execute(&cfg, &resolver, &tol, &mut timings) {
        Err(e) => failed_report(name, tol_scale, config_value, scenario, &e),
        Ok(o) => {
            let failed: Vec<String> = o.invariants.iter().filter(|i| !i.passed).map(|i| i.name.clone()).collect();
            let pass = failed.is_empty();
            let max_dim = cfg
                .verification
                .report_matrix_max_dim
                .unwrap_or(DEFAULT_REPORT_MATRIX_MAX_DIM);
            RunReport {
                tool: "osproj",
                version: env!("CARGO_PKG_VERSION"),
                config_file: name,
                scenario,
                tol_scale,
                status: if pass { Status::Pass } else { Status::Fail },
                exit_code: if pass { EXIT_PASS } else { EXIT_NUMERIC },
                error: (!pass).then(|| format!("failed invariants: {}", failed.join(", "))),
                config: config_value,
                measurements: o.measurements,
                projection: o.projection.as_ref().map(|p| MatrixOut::new(p, max_dim)),
                invariants: o.invariants,
                failed,
                warnings: o.warnings,
            }
        }
    };
    finish(report, timings, target)
}

fn finish(mut report: RunReport, timings: Timings, target: Option<PathBuf>) -> RunOutcome {
    let mut written = None;
    if let Some(path) = target {
        let res = write_atomic(&path, &report.to_json())
            .and_then(|_| write_atomic(&timings_path(&path), &timings.to_json()));
        match res {
            Ok(()) => written = Some(path),
            Err(e) => {
                report.status = Status::ConfigError;
                report.exit_code = e.exit_code();
                report.error = Some(e.message().to_string());
            }
        }
    }
    RunOutcome {
        report,
        timings,
        written,
    }
}

#[derive(Debug, Clone)]
pub struct CbnormArgs {
    pub file: PathBuf,
    pub tol: f64,
    /// Amplification level of the lower-bound search; defaults to the
    /// output dimension, where the cb norm is attained.
    pub amplify: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    /// Where to write the lower-bound witness.
    pub witness: Option<PathBuf>,
    /// Largest `d·k` for the SDP; larger maps use the factorization bound.
    pub sdp_max_choi_dim: usize,
}

pub const CBNORM_SDP_MAX_CHOI_DIM: usize = 25;

/// `{lower, upper}` for the superoperator in `args.file`. Completely
/// positive maps get the exact value `‖Φ(I)‖` as upper bound.
pub fn cbnorm(args: &CbnormArgs) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.file.display())))?;
    let phi = parse_superop(&text).map_err(|e| CliError::Config(format!("{}: {e}", args.file.display())))?;
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(CliError::Config("--tol must be positive".into()));
    }
    let n = args.amplify.unwrap_or(phi.out_dim());
    let lower = cb_norm_lower(&phi, n, args.restarts, args.seed).map_err(CliError::from_core)?;
    let (upper, method, iterations) = if phi.is_completely_positive(1e-9) {
        (cb_norm_cp(&phi, 1e-9).map_err(CliError::from_core)?, "completely_positive", 0)
    } else if phi.in_dim() * phi.out_dim() <= args.sdp_max_choi_dim {
        let up = cb_norm_upper(&phi, args.tol).map_err(CliError::from_core)?;
        (up.value, "sdp", up.iterations)
    } else {
        (cb_norm_factorization_bound(&phi), "factorization", 0)
    };
    let witness_file = match &args.witness {
        Some(p) => {
            write_atomic(p, &format_matrix(&lower.witness))?;
            Value::String(p.display().to_string())
        }
        None => Value::Null,
    };
    if lower.value > upper + args.tol.max(1e-9) * upper.max(1.0) {
        return Err(CliError::Numeric(format!(
            "lower bound {} exceeds upper bound {}",
            lower.value, upper
        )));
    }
    Ok(json!({
        "lower": lower.value,
        "upper": upper,
        "method": method,
        "amplification": n,
        "iterations": iterations,
        "witness_file": witness_file,
    }))
}

/// Config files of a suite directory, sorted by file name. Reports and
/// timing sidecars are skipped so a directory can hold its own outputs.
pub fn suite_configs(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::Config(format!("cannot read {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            let n = file_name(p);
            n.ends_with(".json") && !n.ends_with(".report.json") && !n.ends_with(".timings.json") && n != "suite.json"
        })
        .collect();
    files.sort_by_key(|p| file_name(p));
    Ok(files)
}

#[derive(Debug)]
pub struct SuiteOutcome {
    pub aggregate: Value,
    pub exit_code: i32,
    pub runs: Vec<RunOutcome>,
}

/// Runs every config in `dir` on a small thread pool; results are
/// aggregated in file-name order. With `out_dir`, each report is written as
/// `<stem>.report.json` and the aggregate as `suite.json`.
pub fn suite(dir: &Path, out_dir: Option<&Path>, tol_scale: f64) -> Result<SuiteOutcome, CliError> {
    let files = suite_configs(dir)?;
    let slots: Vec<Mutex<Option<RunOutcome>>> = files.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(files.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= files.len() {
                    break;
                }
                let target = out_dir.map(|d| {
                    let stem = files[i].file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    d.join(format!("{stem}.report.json"))
                });
                let outcome = run_config_file(&files[i], target.as_deref(), tol_scale);
                *slots[i].lock().expect("slot") = Some(outcome);
            });
        }
    });
    let runs: Vec<RunOutcome> = slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot").expect("every config runs"))
        .collect();
    let exit_code = runs.iter().map(RunOutcome::exit_code).max().unwrap_or(EXIT_PASS);
    let entries: Vec<Value> = runs
        .iter()
        .map(|r| {
            json!({
                "config": r.report.config_file,
                "scenario": r.report.scenario,
                "status": r.report.status,
                "exit_code": r.report.exit_code,
                "failed": r.report.failed,
                "error": r.report.error,
                "report": r.written.as_ref().map(|p| file_name(p)),
            })
        })
        .collect();
    let aggregate = json!({
        "tool": "osproj",
        "tol_scale": tol_scale,
        "runs": entries,
        "exit_code": exit_code,
    });
    if let Some(d) = out_dir {
        let mut s = serde_json::to_string_pretty(&aggregate).expect("aggregate serializes");
        s.push('\n');
        write_atomic(&d.join("suite.json"), &s)?;
    }
    Ok(SuiteOutcome {
        aggregate,
        exit_code,
        runs,
    })
}
