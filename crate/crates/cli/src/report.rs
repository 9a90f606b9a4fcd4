//! Report types. Everything that varies between runs of the same config
//! (wall times) lives in a separate timings file so reports stay
//! byte-identical.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use osproj_core::SuperOp;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One pass/fail entry with the threshold it was judged against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Invariant {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Invariant {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            threshold,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            threshold,
            passed: value >= threshold,
        }
    }
}

/// Natural matrix of `P`, rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixOut {
    pub in_dim: usize,
    pub out_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub natural: Option<Vec<Vec<[f64; 2]>>>,
    pub elided: bool,
}

impl MatrixOut {
    pub fn new(p: &SuperOp, max_dim: usize) -> Self {
        let elided = p.in_dim().max(p.out_dim()) > max_dim;
        let natural = (!elided).then(|| {
            let n = p.natural();
            (0..n.rows())
                .map(|i| (0..n.cols()).map(|j| [n[(i, j)].re, n[(i, j)].im]).collect())
                .collect()
        });
        Self {
            in_dim: p.in_dim(),
            out_dim: p.out_dim(),
            natural,
            elided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    ConfigError,
    NumericError,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    /// File name only, so reports do not depend on where the config lives.
    pub config_file: String,
    pub scenario: Option<String>,
    pub tol_scale: f64,
    pub status: Status,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The parsed config, re-serialized.
    pub config: Value,
    pub measurements: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<MatrixOut>,
    pub invariants: Vec<Invariant>,
    pub failed: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Wall time per phase, in seconds.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub phases: Vec<(String, f64)>,
}

impl Timings {
    pub fn record<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t0 = std::time::Instant::now();
        let out = f();
        self.phases.push((phase.to_string(), t0.elapsed().as_secs_f64()));
        out
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, f64> = self.phases.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mut s = serde_json::to_string_pretty(&serde_json::json!({ "seconds": map })).expect("timings serialize");
        s.push('\n');
        s
    }
}

/// `<report>.timings.json` next to the report.
pub fn timings_path(report: &Path) -> PathBuf {
    let mut name = report.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".timings.json");
    report.with_file_name(name)
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
    }
    let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(contents.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_judge_against_threshold() {
        assert!(Invariant::at_most("a", 1e-9, 1e-8).passed);
        assert!(!Invariant::at_most("a", f64::NAN, 1e-8).passed);
        assert!(Invariant::at_least("b", 0.0, -1e-9).passed);
        assert!(!Invariant::at_least("b", -1e-3, -1e-9).passed);
    }

    #[test]
    fn elision_threshold() {
        let p = SuperOp::identity(2);
        assert!(!MatrixOut::new(&p, 2).elided);
        let m = MatrixOut::new(&p, 1);
        assert!(m.elided && m.natural.is_none());
    }

    #[test]
    fn timings_sit_next_to_report() {
        assert_eq!(
            timings_path(Path::new("out/a.report.json")),
            PathBuf::from("out/a.report.json.timings.json")
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/r.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }
}
