//! JSON problem configs. Unknown keys are rejected everywhere; every
//! tolerance has a default that a config may override.

use std::path::{Path, PathBuf};

use osproj_core::actions::{
    build_circle_action, build_conjugation_action, build_map_action, build_monoid_action, FiniteGroup, GroupRep,
    SemigroupAction, SemigroupDesc, DEFAULT_PROBE_HORIZON,
};
use osproj_core::averaging::{required_nodes, MeanStrategy, DEFAULT_HORIZON};
use osproj_core::linalg::{parse_matrix, CMatrix, C64};
use osproj_core::superop::format::parse_superop;
use osproj_core::SuperOp;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Projection,
    Toeplitz,
    Cpfix,
    Dynsys,
    Weyl,
    Isotropy,
    Banach,
}

impl ScenarioName {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Projection => "projection",
            Self::Toeplitz => "toeplitz",
            Self::Cpfix => "cpfix",
            Self::Dynsys => "dynsys",
            Self::Weyl => "weyl",
            Self::Isotropy => "isotropy",
            Self::Banach => "banach",
        }
    }

    /// Scenarios whose verification draws random samples.
    pub fn needs_seed(&self) -> bool {
        !matches!(self, Self::Weyl | Self::Cpfix)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub scenario: ScenarioName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<MeanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toeplitz: Option<ToeplitzConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<RepConfig>,
    #[serde(default)]
    pub verification: VerificationConfig,
    /// Report path, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionConfig {
    /// `α_g = Ad ρ(g)` with `ρ` given on the group generators.
    Conjugation {
        group: GroupConfig,
        generators: Vec<MatrixSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    /// Arbitrary maps on the group generators.
    Maps { group: GroupConfig, generators: Vec<MapSpec> },
    Circle { weights: Vec<i64> },
    /// Commuting generators of `ℕ^d`.
    Monoid {
        generators: Vec<MapSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probe_horizon: Option<usize>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupConfig {
    Cyclic(usize),
    Symmetric(usize),
    /// Generators as permutations of `0..n`.
    Permutations(Vec<Vec<usize>>),
    Table { labels: Vec<String>, table: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeanConfig {
    Uniform,
    Circle { nodes: usize },
    Ergodic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<usize>,
    },
}

/// Inline rows (entries are numbers or `[re, im]`) or a text matrix file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<Entry>>),
    File { file: String },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity(usize),
    Transpose(usize),
    Pinching(usize),
    /// `x ↦ ρ x ρ⁻¹`.
    Conjugation(MatrixSpec),
    /// `x ↦ left · x · right`.
    Sandwich { left: MatrixSpec, right: MatrixSpec },
    Kraus(Vec<MatrixSpec>),
    Natural { in_dim: usize, out_dim: usize, matrix: MatrixSpec },
    Mixture(Vec<WeightedMap>),
    /// A superoperator text file.
    File(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedMap {
    pub weight: f64,
    pub map: MapSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepConfig {
    pub group: GroupConfig,
    pub generators: Vec<MatrixSpec>,
    /// Needed only when the group has no generators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToeplitzModeConfig {
    CyclicShift,
    TruncatedShift,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToeplitzConfig {
    pub mode: ToeplitzModeConfig,
    /// Size of the standard shift; ignored when `generators` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<MatrixSpec>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Random trials for module, bimodule and state checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Restarts of the alternating cb lower-bound search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// Largest `d·k` solved by SDP in reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdp_max_choi_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cb_tol: Option<f64>,
    /// Density matrices pushed through the dual projector; no dual check
    /// when absent (except in `dynsys`, which always runs it).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_samples: Option<usize>,
    /// Projections on `M_d` with `d` above this are elided from reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_matrix_max_dim: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

pub const DEFAULT_TRIALS: usize = 32;
pub const DEFAULT_REPORT_MATRIX_MAX_DIM: usize = 3;

/// Every threshold a run is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `‖P∘P − P‖`.
    pub idempotency: f64,
    /// Largest principal angle between `Ran P` and the fixed space.
    pub range_angle: f64,
    /// `‖α_t∘P − P‖` and `‖P∘α_t − P‖`.
    pub invariance: f64,
    /// `‖P(x) − x‖` on fixed points.
    pub restriction: f64,
    /// Additive slack on `‖P‖_cb ≤ sup ‖α_s‖_cb` and on `lower ≤ upper`.
    pub cb_slack: f64,
    /// Circle projection against the entrywise pinching oracle.
    pub oracle: f64,
    /// Change of the circle projection when the node count doubles.
    pub node_doubling: f64,
    /// Relative growth allowed in `N·‖A_N − P‖` across horizons.
    pub cesaro_rate: f64,
    pub order_independence: f64,
    pub module: f64,
    pub bimodule: f64,
    pub state_psd: f64,
    pub state_trace: f64,
    pub state_invariance: f64,
    pub dual_idempotency: f64,
    /// `λ_min(J(P)) ≥ −choi_psd` for completely positive projections.
    pub choi_psd: f64,
    /// `‖P‖_cb ≤ 1 + cb_contractive` for cpfix.
    pub cb_contractive: f64,
    pub unitarity: f64,
    pub commutant_angle: f64,
    pub exp_commutation: f64,
    pub plain_norm_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            idempotency: 1e-8,
            range_angle: 1e-7,
            invariance: 1e-8,
            restriction: 1e-8,
            cb_slack: 1e-4,
            oracle: 1e-13,
            node_doubling: 1e-13,
            cesaro_rate: 1e-6,
            order_independence: 1e-9,
            module: 1e-8,
            bimodule: 1e-9,
            state_psd: 1e-10,
            state_trace: 1e-12,
            state_invariance: 1e-9,
            dual_idempotency: 1e-9,
            choi_psd: 1e-9,
            cb_contractive: 1e-6,
            unitarity: 1e-9,
            commutant_angle: 1e-8,
            exp_commutation: 1e-8,
            plain_norm_slack: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            idempotency: self.idempotency * s,
            range_angle: self.range_angle * s,
            invariance: self.invariance * s,
            restriction: self.restriction * s,
            cb_slack: self.cb_slack * s,
            oracle: self.oracle * s,
            node_doubling: self.node_doubling * s,
            cesaro_rate: self.cesaro_rate * s,
            order_independence: self.order_independence * s,
            module: self.module * s,
            bimodule: self.bimodule * s,
            state_psd: self.state_psd * s,
            state_trace: self.state_trace * s,
            state_invariance: self.state_invariance * s,
            dual_idempotency: self.dual_idempotency * s,
            choi_psd: self.choi_psd * s,
            cb_contractive: self.cb_contractive * s,
            unitarity: self.unitarity * s,
            commutant_angle: self.commutant_angle * s,
            exp_commutation: self.exp_commutation * s,
            plain_norm_slack: self.plain_norm_slack * s,
        }
    }

    fn all(&self) -> [(&'static str, f64); 21] {
        [
            ("idempotency", self.idempotency),
            ("range_angle", self.range_angle),
            ("invariance", self.invariance),
            ("restriction", self.restriction),
            ("cb_slack", self.cb_slack),
            ("oracle", self.oracle),
            ("node_doubling", self.node_doubling),
            ("cesaro_rate", self.cesaro_rate),
            ("order_independence", self.order_independence),
            ("module", self.module),
            ("bimodule", self.bimodule),
            ("state_psd", self.state_psd),
            ("state_trace", self.state_trace),
            ("state_invariance", self.state_invariance),
            ("dual_idempotency", self.dual_idempotency),
            ("choi_psd", self.choi_psd),
            ("cb_contractive", self.cb_contractive),
            ("unitarity", self.unitarity),
            ("commutant_angle", self.commutant_angle),
            ("exp_commutation", self.exp_commutation),
            ("plain_norm_slack", self.plain_norm_slack),
        ]
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses and validates a config; `serde_json` supplies line and column.
pub fn parse_config(text: &str) -> Result<ProblemConfig, CliError> {
    let cfg: ProblemConfig = serde_json::from_str(text).map_err(|e| {
        config_err(format!("line {} column {}: {}", e.line(), e.column(), e))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl ProblemConfig {
    fn validate(&self) -> Result<(), CliError> {
        let s = self.scenario.as_str();
        let need = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(config_err(format!("field `{field}` is required for scenario {s}")))
            }
        };
        let forbid = |present: bool, field: &str| {
            if present {
                Err(config_err(format!("field `{field}` is not used by scenario {s}")))
            } else {
                Ok(())
            }
        };
        match self.scenario {
            ScenarioName::Projection | ScenarioName::Dynsys | ScenarioName::Banach => {
                need(self.action.is_some(), "action")?;
                forbid(self.toeplitz.is_some(), "toeplitz")?;
                forbid(self.map.is_some(), "map")?;
                forbid(self.rep.is_some(), "rep")?;
            }
            ScenarioName::Toeplitz => {
                need(self.toeplitz.is_some(), "toeplitz")?;
                forbid(self.action.is_some(), "action")?;
                forbid(self.mean.is_some(), "mean")?;
                forbid(self.map.is_some(), "map")?;
                forbid(self.rep.is_some(), "rep")?;
            }
            ScenarioName::Cpfix => {
                need(self.map.is_some(), "map")?;
                forbid(self.action.is_some(), "action")?;
                forbid(self.toeplitz.is_some(), "toeplitz")?;
                forbid(self.rep.is_some(), "rep")?;
            }
            ScenarioName::Weyl | ScenarioName::Isotropy => {
                need(self.rep.is_some(), "rep")?;
                forbid(self.action.is_some(), "action")?;
                forbid(self.mean.is_some(), "mean")?;
                forbid(self.toeplitz.is_some(), "toeplitz")?;
                forbid(self.map.is_some(), "map")?;
            }
        }
        if self.scenario.needs_seed() && self.verification.seed.is_none() {
            return Err(config_err(format!(
                "field `verification.seed` is required for scenario {s}"
            )));
        }
        for (name, v) in self.verification.tolerances.all() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_err(format!(
                    "field `verification.tolerances.{name}` must be a finite nonnegative number"
                )));
            }
        }
        if let Some(t) = self.verification.cb_tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(config_err("field `verification.cb_tol` must be positive"));
            }
        }
        Ok(())
    }
}

/// Resolves relative file references against the config's directory.
#[derive(Debug, Clone)]
pub struct Resolver {
    base: PathBuf,
}

impl Resolver {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Self { base: base.into() }
    }

    fn path(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn read(&self, p: &str) -> Result<String, CliError> {
        let path = self.path(p);
        std::fs::read_to_string(&path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))
    }

    pub fn matrix(&self, m: &MatrixSpec) -> Result<CMatrix, CliError> {
        match m {
            MatrixSpec::Rows(rows) => {
                let r = rows.len();
                let c = rows.first().map(|x| x.len()).unwrap_or(0);
                if r == 0 || c == 0 {
                    return Err(config_err("matrix must have at least one entry"));
                }
                if rows.iter().any(|x| x.len() != c) {
                    return Err(config_err("matrix rows differ in length"));
                }
                let data = rows
                    .iter()
                    .flatten()
                    .map(|e| match *e {
                        Entry::Real(x) => C64::new(x, 0.0),
                        Entry::Complex([re, im]) => C64::new(re, im),
                    })
                    .collect();
                CMatrix::from_row_major(r, c, data).map_err(|e| config_err(e.to_string()))
            }
            MatrixSpec::File { file } => {
                let text = self.read(file)?;
                parse_matrix(&text).map_err(|e| config_err(format!("{file}: {e}")))
            }
        }
    }

    pub fn map(&self, m: &MapSpec) -> Result<SuperOp, CliError> {
        let core = |e: osproj_core::Error| config_err(e.to_string());
        Ok(match m {
            MapSpec::Identity(d) => SuperOp::identity(positive(*d)?),
            MapSpec::Transpose(d) => SuperOp::transpose_map(positive(*d)?),
            MapSpec::Pinching(d) => SuperOp::pinching(positive(*d)?),
            MapSpec::Conjugation(r) => SuperOp::conjugation(&self.matrix(r)?).map_err(core)?,
            MapSpec::Sandwich { left, right } => {
                SuperOp::sandwich(&self.matrix(left)?, &self.matrix(right)?).map_err(core)?
            }
            MapSpec::Kraus(ks) => {
                let ks = ks.iter().map(|k| self.matrix(k)).collect::<Result<Vec<_>, _>>()?;
                SuperOp::from_kraus(&ks).map_err(core)?
            }
            MapSpec::Natural { in_dim, out_dim, matrix } => {
                SuperOp::from_natural(*in_dim, *out_dim, self.matrix(matrix)?).map_err(core)?
            }
            MapSpec::Mixture(parts) => {
                let mut acc: Option<SuperOp> = None;
                for part in parts {
                    let term = self.map(&part.map)?.scale(C64::new(part.weight, 0.0));
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a.add(&term).map_err(core)?,
                    });
                }
                acc.ok_or_else(|| config_err("mixture needs at least one term"))?
            }
            MapSpec::File(f) => {
                let text = self.read(f)?;
                parse_superop(&text).map_err(|e| config_err(format!("{f}: {e}")))?
            }
        })
    }

    pub fn group(&self, g: &GroupConfig) -> Result<FiniteGroup, CliError> {
        let core = |e: osproj_core::Error| config_err(e.to_string());
        match g {
            GroupConfig::Cyclic(n) => FiniteGroup::cyclic(*n).map_err(core),
            GroupConfig::Symmetric(n) => FiniteGroup::symmetric(*n).map_err(core),
            GroupConfig::Permutations(p) => FiniteGroup::from_permutations(p).map_err(core),
            GroupConfig::Table { labels, table } => {
                FiniteGroup::from_table(labels.clone(), table.clone()).map_err(core)
            }
        }
    }

    pub fn rep(&self, r: &RepConfig) -> Result<GroupRep, CliError> {
        let group = self.group(&r.group)?;
        let images = r.generators.iter().map(|m| self.matrix(m)).collect::<Result<Vec<_>, _>>()?;
        let dim = match (r.dim, images.first()) {
            (Some(d), _) => d,
            (None, Some(m)) => m.rows(),
            (None, None) => return Err(config_err("field `rep.dim` is required when there are no generators")),
        };
        GroupRep::from_generator_images(group, dim, &images).map_err(CliError::from_core)
    }

    pub fn action(&self, a: &ActionConfig) -> Result<SemigroupAction, CliError> {
        match a {
            ActionConfig::Conjugation { group, generators, dim } => {
                let rep = self.rep(&RepConfig {
                    group: group.clone(),
                    generators: generators.clone(),
                    dim: *dim,
                })?;
                let desc = SemigroupDesc::FiniteGroup(rep.group().clone());
                build_conjugation_action(desc, rep).map_err(CliError::from_core)
            }
            ActionConfig::Maps { group, generators } => {
                let group = self.group(group)?;
                let maps = generators.iter().map(|m| self.map(m)).collect::<Result<Vec<_>, _>>()?;
                build_map_action(SemigroupDesc::FiniteGroup(group), &maps).map_err(CliError::from_core)
            }
            ActionConfig::Circle { weights } => build_circle_action(weights).map_err(CliError::from_core),
            ActionConfig::Monoid { generators, probe_horizon } => {
                let maps = generators.iter().map(|m| self.map(m)).collect::<Result<Vec<_>, _>>()?;
                build_monoid_action(maps, probe_horizon.unwrap_or(DEFAULT_PROBE_HORIZON))
                    .map_err(CliError::from_core)
            }
        }
    }
}

fn positive(d: usize) -> Result<usize, CliError> {
    if d == 0 {
        Err(config_err("dimension must be positive"))
    } else {
        Ok(d)
    }
}

/// Default mean for an action: uniform for finite groups, the smallest exact
/// quadrature for the circle, Cesàro horizon 256 for `ℕ^d`.
pub fn mean_for(cfg: Option<&MeanConfig>, a: &SemigroupAction) -> MeanStrategy {
    match cfg {
        Some(MeanConfig::Uniform) => MeanStrategy::Uniform,
        Some(MeanConfig::Circle { nodes }) => MeanStrategy::CircleQuadrature { nodes: *nodes },
        Some(MeanConfig::Ergodic { horizon }) => MeanStrategy::MeanErgodic {
            horizon: horizon.unwrap_or(DEFAULT_HORIZON),
        },
        None => match a.semigroup() {
            SemigroupDesc::Circle => MeanStrategy::CircleQuadrature {
                nodes: required_nodes(a.weights().unwrap_or(&[])),
            },
            SemigroupDesc::CommutingMonoid { .. } => MeanStrategy::MeanErgodic {
                horizon: DEFAULT_HORIZON,
            },
            _ => MeanStrategy::Uniform,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(
            r#"{"scenario": "projection",
                "action": {"kind": "circle", "weights": [0, 1]},
                "verification": {"seed": 1}}"#,
        )
        .unwrap();
        assert_eq!(cfg.scenario, ScenarioName::Projection);
        assert_eq!(cfg.verification.tolerances, Tolerances::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = parse_config(r#"{"scenario": "weyl", "rep": {"group": {"cyclic": 2}, "generators": []}, "colour": 1}"#)
            .unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = parse_config(
            r#"{"scenario": "projection", "action": {"kind": "circle", "weights": [0], "extra": 2},
                "verification": {"seed": 1}}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("extra"), "{e}");
        let e = parse_config(
            r#"{"scenario": "weyl", "rep": {"group": {"cyclic": 2}, "generators": []},
                "verification": {"tolerances": {"idempotence": 1e-3}}}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("idempotence"), "{e}");
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let e = parse_config("{\n  \"scenario\": \"weyl\",\n  \"rep\": 3\n}").unwrap_err();
        assert!(e.to_string().starts_with("line 3"), "{e}");
    }

    #[test]
    fn seed_is_mandatory_for_randomized_scenarios() {
        let e = parse_config(r#"{"scenario": "projection", "action": {"kind": "circle", "weights": [0, 1]}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("verification.seed"), "{e}");
    }

    #[test]
    fn missing_and_stray_blocks() {
        let e = parse_config(r#"{"scenario": "cpfix"}"#).unwrap_err();
        assert!(e.to_string().contains("`map`"), "{e}");
        let e = parse_config(r#"{"scenario": "cpfix", "map": {"identity": 2}, "rep": {"group": {"cyclic": 1}, "generators": []}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("`rep`"), "{e}");
    }

    #[test]
    fn matrices_and_maps_resolve() {
        let r = Resolver::new(".");
        let m = r
            .matrix(&serde_json::from_str::<MatrixSpec>("[[1, [0, 2]], [0, -1]]").unwrap())
            .unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, 2.0));
        let spec: MapSpec = serde_json::from_str(
            r#"{"mixture": [{"weight": 0.5, "map": {"identity": 2}},
                            {"weight": 0.5, "map": {"conjugation": [[0, 1], [1, 0]]}}]}"#,
        )
        .unwrap();
        let phi = r.map(&spec).unwrap();
        let x = phi.apply(&CMatrix::unit(2, 2, 0, 0)).unwrap();
        assert!(x.approx_eq(&CMatrix::identity(2).scale_real(0.5), 1e-15));
    }

    #[test]
    fn tolerance_scaling() {
        let t = Tolerances::default().scaled(10.0);
        assert_eq!(t.idempotency, 1e-7);
        assert_eq!(t.cb_slack, 1e-3);
    }
}
