//! Scenario execution: builds the problem, runs the core, and turns every
//! measured quantity into an invariant with its threshold.

use std::collections::BTreeMap;

use osproj_core::actions::{SemigroupAction, SemigroupDesc};
use osproj_core::apps::{
    cp_fixed_projection, dynsys_expectation, isotropy_lie_algebra, plain_norm_projection, toeplitz_projection,
    verify_module_property, weyl_unitarize, RepProblem, ToeplitzMode, ToeplitzProblem,
};
use osproj_core::averaging::{average, average_dual, circle_projection, MeanStrategy, ProjectionReport, ReportOptions};
use osproj_core::linalg::{CMatrix, C64};
use osproj_core::SuperOp;
use serde_json::{json, Value};

use crate::config::{mean_for, ProblemConfig, Resolver, ScenarioName, ToeplitzModeConfig, Tolerances, DEFAULT_TRIALS};
use crate::report::{Invariant, Timings};
use crate::CliError;

pub const DEFAULT_RESTARTS: usize = 4;

#[derive(Debug, Default)]
pub struct Outcome {
    pub measurements: BTreeMap<String, Value>,
    pub projection: Option<SuperOp>,
    pub invariants: Vec<Invariant>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.measurements.insert(key.to_string(), v.into());
    }

    fn check(&mut self, inv: Invariant) {
        self.invariants.push(inv);
    }
}

fn report_options(cfg: &ProblemConfig) -> ReportOptions {
    let v = &cfg.verification;
    let d = ReportOptions::default();
    ReportOptions {
        cb_tol: v.cb_tol.unwrap_or(d.cb_tol),
        sdp_max_choi_dim: v.sdp_max_choi_dim.unwrap_or(d.sdp_max_choi_dim),
        restarts: v.restarts.unwrap_or(DEFAULT_RESTARTS),
        seed: v.seed.unwrap_or(0),
    }
}

fn core(e: osproj_core::Error) -> CliError {
    CliError::from_core(e)
}

fn matrix_rows(m: &CMatrix) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

fn mean_value(m: MeanStrategy) -> Value {
    match m {
        MeanStrategy::Uniform => json!({"kind": "uniform"}),
        MeanStrategy::CircleQuadrature { nodes } => json!({"kind": "circle", "nodes": nodes}),
        MeanStrategy::MeanErgodic { horizon } => json!({"kind": "ergodic", "horizon": horizon}),
    }
}

/// Checks shared by every scenario that builds a projection.
fn projection_checks(r: &ProjectionReport, t: &Tolerances, out: &mut Outcome) {
    out.put("mean", mean_value(r.mean));
    out.put("dim", r.p.in_dim());
    out.put("range_dim", r.range_basis.dim());
    out.put("fixed_dim", r.fixed.dim());
    out.put("fixed_source", r.fixed.source.clone());
    out.put("range_angle", r.range_angle);
    out.put("idempotency_defect", r.idempotency_defect);
    out.put("invariance_defect", r.invariance_defect);
    out.put("restriction_defect", r.restriction_defect);
    out.put("natural_norm", r.natural_norm);
    out.put("cb_lower", r.cb.lower);
    out.put("cb_upper", r.cb.upper);
    out.put("cb_method", r.cb.method.name());
    out.put("norm_cap", r.norm_cap);
    out.put("action_cp", r.action_cp);
    out.put("choi_min_relative", r.choi_min_relative);
    out.put("identification", r.identification);

    out.check(Invariant::at_most("idempotency", r.idempotency_defect, t.idempotency));
    out.check(Invariant::at_most("invariance", r.invariance_defect, t.invariance));
    out.check(Invariant::at_most("restriction", r.restriction_defect, t.restriction));
    let mismatch = (r.range_basis.dim() as f64 - r.fixed.dim() as f64).abs();
    out.check(Invariant::at_most("range_dim_mismatch", mismatch, 0.0));
    out.check(Invariant::at_most("range_angle", r.range_angle, t.range_angle));
    out.check(Invariant::at_most("cb_norm_within_cap", r.cb.upper, r.norm_cap + t.cb_slack));
    out.check(Invariant::at_most("cb_bounds_ordered", r.cb.lower - r.cb.upper, t.cb_slack));
    if r.action_cp {
        out.check(Invariant::at_least("choi_psd", r.choi_min_relative, -t.choi_psd));
    }
    if !r.cesaro.is_empty() {
        let mut rows = Vec::new();
        for (i, c) in r.cesaro.iter().enumerate() {
            rows.push(json!({
                "horizons": c.horizons,
                "errors": c.errors,
                "fitted_constant": c.fitted_constant,
                "bound_constant": c.bound_constant,
                "monotone": c.monotone,
            }));
            let growth = c.errors.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            let first = c.errors.first().copied().unwrap_or(0.0);
            out.check(Invariant::at_most(format!("cesaro_decreasing_g{i}"), growth, t.cesaro_rate * first));
            out.check(Invariant::at_most(
                format!("cesaro_rate_g{i}"),
                c.fitted_constant,
                c.bound_constant * (1.0 + t.cesaro_rate),
            ));
        }
        out.put("cesaro", Value::Array(rows));
    }
    if let Some(d) = r.order_independence_defect {
        out.put("order_independence_defect", d);
        out.check(Invariant::at_most("order_independence", d, t.order_independence));
    }
    out.warnings.extend(r.warnings.iter().cloned());
}

/// Exact-quadrature cross-checks for circle actions.
fn circle_checks(a: &SemigroupAction, r: &ProjectionReport, t: &Tolerances, out: &mut Outcome) -> Result<(), CliError> {
    let (Some(w), MeanStrategy::CircleQuadrature { nodes }) = (a.weights(), r.mean) else {
        return Ok(());
    };
    let d = w.len();
    let oracle = SuperOp::from_fn(d, d, |x| {
        CMatrix::from_fn(d, d, |i, j| if w[i] == w[j] { x[(i, j)] } else { C64::new(0.0, 0.0) })
    })
    .map_err(core)?;
    let oracle_err = r.p.distance(&oracle);
    let doubled = circle_projection(w, 2 * nodes).map_err(core)?;
    let doubling = r.p.distance(&doubled);
    out.put("pinching_oracle_error", oracle_err);
    out.put("node_doubling_change", doubling);
    out.check(Invariant::at_most("pinching_oracle", oracle_err, t.oracle));
    out.check(Invariant::at_most("node_doubling", doubling, t.node_doubling));
    Ok(())
}

fn dual_checks(
    a: &SemigroupAction,
    mean: MeanStrategy,
    opts: &ReportOptions,
    samples: usize,
    seed: u64,
    t: &Tolerances,
    out: &mut Outcome,
) -> Result<(), CliError> {
    let dual = average_dual(a, mean, opts, samples, seed).map_err(core)?;
    state_checks(&dual.states, dual.report.idempotency_defect, t, out);
    Ok(())
}

fn state_checks(s: &osproj_core::averaging::StateCheck, dual_idem: f64, t: &Tolerances, out: &mut Outcome) {
    out.put("state_samples", s.samples);
    out.put("state_min_eigenvalue", s.min_eigenvalue);
    out.put("state_max_trace_error", s.max_trace_error);
    out.put("state_invariance_defect", s.invariance_defect);
    out.put("dual_idempotency_defect", dual_idem);
    if !s.automorphic {
        out.warnings.push("action is not *-automorphic: states need not be preserved".into());
    }
    out.check(Invariant::at_least("state_psd", s.min_eigenvalue, -t.state_psd));
    out.check(Invariant::at_most("state_trace", s.max_trace_error, t.state_trace));
    out.check(Invariant::at_most("state_invariance", s.invariance_defect, t.state_invariance));
    out.check(Invariant::at_most("dual_idempotency", dual_idem, t.dual_idempotency));
}

fn action_block(cfg: &ProblemConfig, r: &Resolver) -> Result<(SemigroupAction, MeanStrategy), CliError> {
    let a = r.action(cfg.action.as_ref().expect("validated"))?;
    let mean = mean_for(cfg.mean.as_ref(), &a);
    Ok((a, mean))
}

fn describe_action(a: &SemigroupAction, out: &mut Outcome) {
    out.put("semigroup", a.semigroup().kind_name());
    if let Some(n) = a.order() {
        out.put("group_order", n);
    }
    if let SemigroupDesc::CommutingMonoid { .. } = a.semigroup() {
        let probes: Vec<Value> = a
            .probes()
            .iter()
            .map(|p| json!({"horizon": p.horizon, "growth": p.growth(), "cb_cap": p.cb_cap}))
            .collect();
        out.put("power_probes", Value::Array(probes));
    }
}

/// Runs the scenario named in `cfg` with tolerances `t`.
pub fn execute(cfg: &ProblemConfig, r: &Resolver, t: &Tolerances, timings: &mut Timings) -> Result<Outcome, CliError> {
    let opts = report_options(cfg);
    let seed = cfg.verification.seed.unwrap_or(0);
    let trials = cfg.verification.trials.unwrap_or(DEFAULT_TRIALS);
    let mut out = Outcome::default();
    match cfg.scenario {
        ScenarioName::Projection => {
            let (a, mean) = timings.record("build", || action_block(cfg, r))?;
            describe_action(&a, &mut out);
            let rep = timings.record("average", || average(&a, mean, &opts)).map_err(core)?;
            timings.record("verify", || -> Result<(), CliError> {
                projection_checks(&rep, t, &mut out);
                circle_checks(&a, &rep, t, &mut out)?;
                if let Some(n) = cfg.verification.dual_samples {
                    dual_checks(&a, mean, &opts, n, seed, t, &mut out)?;
                }
                Ok(())
            })?;
            out.projection = Some(rep.p);
        }
        ScenarioName::Toeplitz => {
            let tc = cfg.toeplitz.as_ref().expect("validated");
            let mode = match tc.mode {
                ToeplitzModeConfig::CyclicShift => ToeplitzMode::CyclicShift,
                ToeplitzModeConfig::TruncatedShift => ToeplitzMode::TruncatedShift,
            };
            let problem = timings.record("build", || -> Result<ToeplitzProblem, CliError> {
                match (&tc.generators, tc.n) {
                    (Some(gens), _) => {
                        let gens = gens.iter().map(|m| r.matrix(m)).collect::<Result<Vec<_>, _>>()?;
                        ToeplitzProblem::new(mode, gens).map_err(core)
                    }
                    (None, Some(n)) if n > 0 => match mode {
                        ToeplitzMode::CyclicShift => ToeplitzProblem::cyclic_shift(n).map_err(core),
                        ToeplitzMode::TruncatedShift => ToeplitzProblem::truncated_shift(n).map_err(core),
                    },
                    _ => Err(CliError::Config(
                        "toeplitz needs a positive `n` or explicit `generators`".into(),
                    )),
                }
            })?;
            out.put("mode", mode.name());
            let rep = timings.record("average", || toeplitz_projection(&problem, &opts)).map_err(core)?;
            timings.record("verify", || -> Result<(), CliError> {
                projection_checks(&rep, t, &mut out);
                out.put("projection_max_abs", rep.p.natural().max_abs());
                if mode == ToeplitzMode::CyclicShift {
                    let defect = verify_module_property(&problem, &rep, trials, seed).map_err(core)?;
                    out.put("module_trials", trials);
                    out.put("module_defect", defect);
                    out.check(Invariant::at_most("module_property", defect, t.module));
                }
                Ok(())
            })?;
            out.projection = Some(rep.p);
        }
        ScenarioName::Cpfix => {
            let phi = timings.record("build", || r.map(cfg.map.as_ref().expect("validated")))?;
            let res = timings.record("average", || cp_fixed_projection(&phi, &opts)).map_err(core)?;
            timings.record("verify", || {
                projection_checks(&res.report, t, &mut out);
                out.put("input_cb_norm", res.input_cb_norm);
                out.put("direct_fixed_dim", res.direct.dim());
                out.put("direct_angle", res.direct_angle);
                out.put("choi_min_eigenvalue", res.choi_min_eigenvalue);
                out.put("cb_norm", res.cb_norm);
                let mismatch = if res.direct_dim_mismatch { 1.0 } else { 0.0 };
                out.check(Invariant::at_most("direct_dim_mismatch", mismatch, 0.0));
                out.check(Invariant::at_most("direct_angle", res.direct_angle, t.range_angle));
                out.check(Invariant::at_least("projection_cp", res.choi_min_eigenvalue, -t.choi_psd));
                out.check(Invariant::at_most("projection_cc", res.cb_norm, 1.0 + t.cb_contractive));
            });
            out.projection = Some(res.report.p);
        }
        ScenarioName::Dynsys => {
            let (a, mean) = timings.record("build", || action_block(cfg, r))?;
            describe_action(&a, &mut out);
            let res = timings
                .record("average", || dynsys_expectation(&a, mean, &opts, trials, seed))
                .map_err(core)?;
            timings.record("verify", || -> Result<(), CliError> {
                projection_checks(&res.report, t, &mut out);
                circle_checks(&a, &res.report, t, &mut out)?;
                out.put("bimodule_trials", trials);
                out.put("bimodule_defect", res.bimodule_defect);
                out.check(Invariant::at_most("bimodule", res.bimodule_defect, t.bimodule));
                state_checks(&res.states, res.dual.idempotency_defect, t, &mut out);
                Ok(())
            })?;
            out.projection = Some(res.report.p);
        }
        ScenarioName::Weyl => {
            let rep = timings.record("build", || r.rep(cfg.rep.as_ref().expect("validated")))?;
            let p = RepProblem::new(rep);
            let w = timings.record("average", || weyl_unitarize(&p)).map_err(core)?;
            out.put("group_order", p.group().order());
            out.put("sup_norm", p.sup_norm());
            out.put("gram", matrix_rows(&w.gram));
            out.put("w", matrix_rows(&w.w));
            out.put("gram_condition", w.gram_condition);
            out.put("gram_min_eigenvalue", w.gram_min_eigenvalue);
            out.put("gram_floor", w.gram_floor);
            out.put("unitarity_defect", w.defect);
            out.check(Invariant::at_most("unitarity", w.defect, t.unitarity));
            out.check(Invariant::at_least(
                "gram_floor",
                w.gram_min_eigenvalue - w.gram_floor,
                -t.unitarity,
            ));
        }
        ScenarioName::Isotropy => {
            let rep = timings.record("build", || r.rep(cfg.rep.as_ref().expect("validated")))?;
            let p = RepProblem::new(rep);
            let iso = timings.record("average", || isotropy_lie_algebra(&p, seed)).map_err(core)?;
            out.put("group_order", p.group().order());
            out.put("algebra_dim", iso.algebra.dim());
            out.put("fixed_angle", iso.fixed_angle);
            out.put("exp_samples", iso.samples);
            out.put("exp_defect", iso.exp_defect);
            let mismatch = if iso.fixed_dim_mismatch { 1.0 } else { 0.0 };
            out.check(Invariant::at_most("commutant_dim_mismatch", mismatch, 0.0));
            out.check(Invariant::at_most("commutant_angle", iso.fixed_angle, t.commutant_angle));
            out.check(Invariant::at_most("exp_commutation", iso.exp_defect, t.exp_commutation));
        }
        ScenarioName::Banach => {
            let (a, mean) = timings.record("build", || action_block(cfg, r))?;
            describe_action(&a, &mut out);
            let res = timings
                .record("average", || plain_norm_projection(&a, mean, &opts, t.plain_norm_slack))
                .map_err(core)?;
            timings.record("verify", || -> Result<(), CliError> {
                projection_checks(&res.report, t, &mut out);
                circle_checks(&a, &res.report, t, &mut out)?;
                out.put("plain_norm_estimate", res.norm_estimate);
                out.put("plain_norm_upper", res.norm_upper);
                out.put("sup_action_norm", res.sup_action_norm);
                out.put("sup_action_norm_exact", res.sup_exact);
                if !res.sup_exact {
                    out.warnings
                        .push("sup of action norms is a search estimate, not a certified value".into());
                }
                out.check(Invariant::at_most(
                    "plain_norm_bound",
                    res.norm_estimate,
                    res.sup_action_norm + t.plain_norm_slack,
                ));
                Ok(())
            })?;
            out.projection = Some(res.report.p);
        }
    }
    Ok(out)
}
