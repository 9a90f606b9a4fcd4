//! Projections onto fixed-point subspaces from computable invariant means.
//!
//! * finite groups: the uniform average `P = |G|⁻¹ Σ_g α_g`;
//! * the circle: trapezoidal quadrature `P = N⁻¹ Σ_m α_{2πm/N}`, exact once
//!   `N ≥ 2 max|w_i − w_j| + 1` because every entry of `θ ↦ α_θ(x)` is a
//!   trigonometric polynomial of that degree;
//! * `ℕ^d`: the limit of Cesàro means of each generator in closed form, the
//!   projection onto `ker(α − id)` along `ran(α − id)`, multiplied over the
//!   commuting generators. Cesàro iterates are kept as a cross-check only.
//!
//! In finite dimension every space is reflexive, so the canonical embedding
//! into the bidual is the identity and the averaged map lands in `M_d`
//! itself; its range is then exactly the fixed-point subspace.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::actions::{dual_action, Assignment, SemigroupAction};
use crate::cbnorm::{cb_norm_cp, cb_norm_factorization_bound, cb_norm_lower, cb_norm_upper};
use crate::error::{Error, Result};
use crate::fixedpoints::{fixed_subspace, subspace_match, FixedSubspace};
use crate::linalg::{condition_number, herm_eig, inverse, null_space_scaled, range_space, range_space_scaled, CMatrix, SubspaceBasis, C64, DEFAULT_RANK_TOL};
use crate::superop::{tree_sum_with, SuperOp};

pub const DEFAULT_HORIZON: usize = 256;
pub const MIN_HORIZON: usize = 16;
/// Splitting bases worse conditioned than this are treated as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e10;

/// Note recorded in every report about the bidual embedding.
pub const IDENTIFICATION_NOTE: &str =
    "finite-dimensional spaces are reflexive: the bidual embedding is the identity, so Ran P is compared with X^S directly";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanStrategy {
    Uniform,
    CircleQuadrature { nodes: usize },
    MeanErgodic { horizon: usize },
}

impl MeanStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::CircleQuadrature { .. } => "circle",
            Self::MeanErgodic { .. } => "ergodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbMethod {
    /// `‖P(I)‖`, exact for completely positive `P`.
    CompletelyPositive,
    /// Semidefinite program upper bound, alternating-search lower bound.
    Sdp,
    /// Factorization upper bound, used above the SDP size limit.
    Factorization,
}

impl CbMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CompletelyPositive => "completely_positive",
            Self::Sdp => "sdp",
            Self::Factorization => "factorization",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbBounds {
    pub lower: f64,
    pub upper: f64,
    pub method: CbMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub cb_tol: f64,
    /// SDP is used when `d·k` is at most this; larger maps fall back to the
    /// factorization bound.
    pub sdp_max_choi_dim: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            cb_tol: 1e-7,
            sdp_max_choi_dim: 16,
            restarts: 4,
            seed: 0,
        }
    }
}

/// Cesàro cross-check for one generator: `e_N = ‖A_N − P_g‖` at
/// `N ∈ {H/4, H/2, H}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CesaroCheck {
    pub horizons: Vec<usize>,
    pub errors: Vec<f64>,
    /// `max_N N·e_N`.
    pub fitted_constant: f64,
    /// `C` with `e_N ≤ C/N` for every `N`: since
    /// `Σ_{n<N} (αⁿ − P) = (id − α^N)(id − P)(id − α + P)⁻¹`, one can take
    /// `C = (1 + max_n ‖αⁿ‖)·‖(id − P)(id − α + P)⁻¹‖` (natural-matrix norms,
    /// powers up to the horizon).
    pub bound_constant: f64,
    /// Errors nonincreasing in `N`.
    pub monotone: bool,
}

#[derive(Debug, Clone)]
pub struct ProjectionReport {
    pub p: SuperOp,
    pub mean: MeanStrategy,
    /// `‖P∘P − P‖` (spectral norm of natural matrices).
    pub idempotency_defect: f64,
    /// `max_t max(‖α_t∘P − P‖, ‖P∘α_t − P‖)` over the check elements.
    pub invariance_defect: f64,
    /// `max ‖P(x) − x‖` over the fixed-space basis.
    pub restriction_defect: f64,
    /// Spectral norm of the natural matrix of `P`.
    pub natural_norm: f64,
    pub range_basis: SubspaceBasis,
    pub fixed: FixedSubspace,
    pub range_angle: f64,
    pub dim_mismatch: bool,
    pub cb: CbBounds,
    pub norm_cap: f64,
    /// Every element of the action is completely positive.
    pub action_cp: bool,
    /// `λ_min(J(P)) / ‖J(P)‖`.
    pub choi_min_relative: f64,
    pub cesaro: Vec<CesaroCheck>,
    /// `‖P_forward − P_reverse‖` for products of per-generator projections.
    pub order_independence_defect: Option<f64>,
    pub warnings: Vec<String>,
    pub identification: &'static str,
}

/// `|G|⁻¹ Σ_g α_g`, summed in tree order.
pub fn uniform_projection(a: &SemigroupAction) -> Result<SuperOp> {
    let n = a
        .order()
        .ok_or_else(|| Error::InvalidSemigroup("uniform mean needs a finite group".into()))?;
    let sum = tree_sum_with(n, |g| Ok(a.element_op(g)))?;
    Ok(sum.scale(C64::new(1.0 / n as f64, 0.0)))
}

/// Smallest node count for which the quadrature is exact.
pub fn required_nodes(weights: &[i64]) -> usize {
    let max = weights.iter().max().copied().unwrap_or(0);
    let min = weights.iter().min().copied().unwrap_or(0);
    2 * (max - min) as usize + 1
}

/// `N⁻¹ Σ_{m<N} α_{2πm/N}`.
pub fn circle_projection(weights: &[i64], nodes: usize) -> Result<SuperOp> {
    let required = required_nodes(weights);
    if nodes < required {
        return Err(Error::InsufficientQuadrature { nodes, required });
    }
    let sum = tree_sum_with(nodes, |m| {
        Ok(SemigroupAction::circle_op(
            weights,
            std::f64::consts::TAU * m as f64 / nodes as f64,
        ))
    })?;
    Ok(sum.scale(C64::new(1.0 / nodes as f64, 0.0)))
}

/// Projection onto `ker(α − id)` along `ran(α − id)`, returned with the
/// condition number of the splitting basis.
pub fn ergodic_projection(g: &SuperOp, generator: usize) -> Result<(SuperOp, f64)> {
    let d = g.in_dim();
    let n = d * d;
    let mut m = g.natural().clone();
    for i in 0..n {
        m[(i, i)] -= C64::new(1.0, 0.0);
    }
    let scale = g.natural_norm().max(1.0);
    let fixed = null_space_scaled(&m, DEFAULT_RANK_TOL, scale);
    let range = range_space_scaled(&m, DEFAULT_RANK_TOL, scale);
    let r = fixed.dim();
    if r + range.dim() != n {
        return Err(Error::DefectiveEigenvalue {
            generator,
            fixed_dim: r,
            range_dim: range.dim(),
            ambient: n,
        });
    }
    if r == 0 {
        return Ok((SuperOp::zero(d, d), 1.0));
    }
    if r == n {
        return Ok((SuperOp::identity(d), 1.0));
    }
    let mut cols: Vec<Vec<C64>> = fixed.vectors().to_vec();
    cols.extend(range.vectors().iter().cloned());
    let b = CMatrix::from_columns(n, &cols);
    // kernel and range overlap exactly when eigenvalue 1 has a Jordan block
    let cond = condition_number(&b);
    if cond > DEFECTIVE_CONDITION {
        return Err(Error::DefectiveEigenvalue {
            generator,
            fixed_dim: r,
            range_dim: range.dim(),
            ambient: n,
        });
    }
    let binv = inverse(&b)?;
    let coeffs = binv.block(0, 0, r, n);
    let p = &fixed.as_matrix() * &coeffs;
    Ok((SuperOp::from_natural(d, d, p)?, cond))
}

pub fn cesaro_check(g: &SuperOp, p: &SuperOp, horizon: usize) -> CesaroCheck {
    let d = g.in_dim();
    let horizons = vec![horizon / 4, horizon / 2, horizon];
    let mut errors = Vec::with_capacity(3);
    let mut power = SuperOp::identity(d);
    let mut sum = SuperOp::zero(d, d);
    let mut max_power = 1.0f64;
    for k in 1..=horizon {
        sum = sum.add(&power).expect("shape");
        max_power = max_power.max(power.natural_norm());
        if horizons.contains(&k) {
            let avg = sum.scale(C64::new(1.0 / k as f64, 0.0));
            errors.push(avg.natural_distance(p));
        }
        power = power.compose(g).expect("shape");
    }
    let fitted_constant = horizons
        .iter()
        .zip(&errors)
        .map(|(&n, e)| n as f64 * e)
        .fold(0.0, f64::max);
    let monotone = errors.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
    let n = d * d;
    let id = CMatrix::identity(n);
    let complement = &id - p.natural();
    let shifted = &(&id - g.natural()) + p.natural();
    let bound_constant = match inverse(&shifted) {
        Ok(inv) => (1.0 + max_power) * crate::linalg::op_norm(&(&complement * &inv)).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    };
    CesaroCheck {
        horizons,
        errors,
        fitted_constant,
        bound_constant,
        monotone,
    }
}

/// cb-norm bounds of `p` following the report policy.
pub fn cb_bounds(p: &SuperOp, opts: &ReportOptions) -> Result<CbBounds> {
    if p.is_completely_positive(1e-9) {
        let v = cb_norm_cp(p, 1e-9)?;
        return Ok(CbBounds {
            lower: v,
            upper: v,
            method: CbMethod::CompletelyPositive,
        });
    }
    let lower = cb_norm_lower(p, p.out_dim(), opts.restarts, opts.seed)?.value;
    if p.in_dim() * p.out_dim() <= opts.sdp_max_choi_dim {
        let upper = cb_norm_upper(p, opts.cb_tol)?.value;
        Ok(CbBounds {
            lower,
            upper,
            method: CbMethod::Sdp,
        })
    } else {
        Ok(CbBounds {
            lower,
            upper: cb_norm_factorization_bound(p),
            method: CbMethod::Factorization,
        })
    }
}

fn action_is_cp(a: &SemigroupAction) -> bool {
    match a.assignment() {
        Assignment::Circle(_) => true,
        Assignment::Conjugation(rep) => {
            // Ad ρ is CP iff ρ⁻¹ = c ρᴴ with c > 0
            rep.matrices().iter().enumerate().all(|(g, m)| {
                let inv = rep.inverse_matrix(g);
                let adj = m.adjoint();
                let c = inv.frobenius_norm() / adj.frobenius_norm();
                (&inv.clone() - &adj.scale_real(c)).max_abs() <= 1e-10 * inv.max_abs()
            })
        }
        _ => a.check_ops().iter().all(|op| op.is_completely_positive(1e-9)),
    }
}

/// Fills in every diagnostic for a constructed projection.
pub fn finish_report(
    a: &SemigroupAction,
    p: SuperOp,
    mean: MeanStrategy,
    opts: &ReportOptions,
) -> Result<ProjectionReport> {
    let pp = p.compose(&p)?;
    let idempotency_defect = pp.natural_distance(&p);
    let mut invariance_defect = 0.0f64;
    for op in a.check_ops() {
        invariance_defect = invariance_defect
            .max(op.compose(&p)?.natural_distance(&p))
            .max(p.compose(&op)?.natural_distance(&p));
    }
    let fixed = fixed_subspace(a);
    let restriction_defect = fixed.max_residual(std::slice::from_ref(&p));
    let range_basis = range_space(p.natural(), DEFAULT_RANK_TOL);
    let m = subspace_match(&range_basis, &fixed.basis);
    let cb = cb_bounds(&p, opts)?;
    let (lmin, jnorm) = p.choi_spectrum_bounds();
    let choi_min_relative = if jnorm > 0.0 { lmin / jnorm } else { 0.0 };
    let mut warnings = a.notes().to_vec();
    if m.dim_mismatch {
        warnings.push(format!(
            "range dimension {} differs from fixed-space dimension {}",
            range_basis.dim(),
            fixed.dim()
        ));
    }
    Ok(ProjectionReport {
        natural_norm: p.natural_norm(),
        p,
        mean,
        idempotency_defect,
        invariance_defect,
        restriction_defect,
        range_basis,
        fixed,
        range_angle: m.angle,
        dim_mismatch: m.dim_mismatch,
        cb,
        norm_cap: a.norm_cap(),
        action_cp: action_is_cp(a),
        choi_min_relative,
        cesaro: Vec::new(),
        order_independence_defect: None,
        warnings,
        identification: IDENTIFICATION_NOTE,
    })
}

pub fn average_uniform(a: &SemigroupAction, opts: &ReportOptions) -> Result<ProjectionReport> {
    let p = uniform_projection(a)?;
    finish_report(a, p, MeanStrategy::Uniform, opts)
}

pub fn average_circle(a: &SemigroupAction, nodes: usize, opts: &ReportOptions) -> Result<ProjectionReport> {
    let w = a
        .weights()
        .ok_or_else(|| Error::InvalidSemigroup("circle quadrature needs a circle action".into()))?;
    let p = circle_projection(w, nodes)?;
    finish_report(a, p, MeanStrategy::CircleQuadrature { nodes }, opts)
}

pub fn average_ergodic(a: &SemigroupAction, horizon: usize, opts: &ReportOptions) -> Result<ProjectionReport> {
    let gens = match a.assignment() {
        Assignment::Generators(g) => g,
        _ => {
            return Err(Error::InvalidSemigroup(
                "mean-ergodic projection needs a commuting monoid action".into(),
            ))
        }
    };
    if horizon < MIN_HORIZON {
        return Err(Error::InvalidSemigroup(format!(
            "Cesàro horizon must be at least {MIN_HORIZON}"
        )));
    }
    let mut parts = Vec::with_capacity(gens.len());
    let mut warnings = Vec::new();
    let mut cesaro = Vec::with_capacity(gens.len());
    for (gi, g) in gens.iter().enumerate() {
        let (pg, cond) = ergodic_projection(g, gi)?;
        if cond > 1e8 {
            warnings.push(format!(
                "generator {gi}: fixed/range splitting is ill-conditioned (condition {cond:.3e}), eigenvalue 1 may be nearly defective"
            ));
        }
        cesaro.push(cesaro_check(g, &pg, horizon));
        parts.push(pg);
    }
    let d = a.dim();
    let forward = parts
        .iter()
        .try_fold(SuperOp::identity(d), |acc, pg| acc.compose(pg))?;
    let reverse = parts
        .iter()
        .rev()
        .try_fold(SuperOp::identity(d), |acc, pg| acc.compose(pg))?;
    let order_defect = forward.distance(&reverse);
    let mut report = finish_report(a, forward, MeanStrategy::MeanErgodic { horizon }, opts)?;
    report.cesaro = cesaro;
    report.order_independence_defect = Some(order_defect);
    report.warnings.extend(warnings);
    Ok(report)
}

pub fn average(a: &SemigroupAction, mean: MeanStrategy, opts: &ReportOptions) -> Result<ProjectionReport> {
    match mean {
        MeanStrategy::Uniform => average_uniform(a, opts),
        MeanStrategy::CircleQuadrature { nodes } => average_circle(a, nodes, opts),
        MeanStrategy::MeanErgodic { horizon } => average_ergodic(a, horizon, opts),
    }
}

/// State-preservation measurements for the dual projector `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateCheck {
    pub samples: usize,
    /// Smallest eigenvalue of `Q(σ)` over samples.
    pub min_eigenvalue: f64,
    /// `max |tr Q(σ) − 1|`.
    pub max_trace_error: f64,
    /// `max_{σ, t} ‖β_t(Q(σ)) − Q(σ)‖`.
    pub invariance_defect: f64,
    /// States are only guaranteed to be preserved for `*`-automorphic actions.
    pub automorphic: bool,
}

#[derive(Debug, Clone)]
pub struct DualReport {
    pub report: ProjectionReport,
    pub states: StateCheck,
}

/// `Q` from averaging the dual action, plus a state-preservation check on
/// seeded random density matrices.
pub fn average_dual(
    a: &SemigroupAction,
    mean: MeanStrategy,
    opts: &ReportOptions,
    samples: usize,
    seed: u64,
) -> Result<DualReport> {
    let b = dual_action(a);
    let report = average(&b, mean, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = b.check_ops();
    let mut min_eigenvalue = f64::INFINITY;
    let mut max_trace_error = 0.0f64;
    let mut invariance_defect = 0.0f64;
    for _ in 0..samples {
        let sigma = CMatrix::random_density(a.dim(), &mut rng);
        let q = report.p.apply(&sigma)?;
        min_eigenvalue = min_eigenvalue.min(herm_eig(&q.hermitian_part())?.min());
        max_trace_error = max_trace_error.max((q.trace() - C64::new(1.0, 0.0)).norm());
        for op in &checks {
            invariance_defect = invariance_defect.max((&op.apply(&q)? - &q).frobenius_norm());
        }
    }
    Ok(DualReport {
        report,
        states: StateCheck {
            samples,
            min_eigenvalue,
            max_trace_error,
            invariance_defect,
            automorphic: a.is_automorphic(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{
        build_circle_action, build_conjugation_action, build_monoid_action, FiniteGroup, GroupRep, SemigroupDesc,
    };
    use crate::linalg::pauli;

    fn group_action(group: FiniteGroup, d: usize, images: &[CMatrix]) -> SemigroupAction {
        let rep = GroupRep::from_generator_images(group.clone(), d, images).unwrap();
        build_conjugation_action(SemigroupDesc::FiniteGroup(group), rep).unwrap()
    }

    fn shift(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| if i == (j + 1) % n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    fn assert_good(r: &ProjectionReport) {
        assert!(r.idempotency_defect <= 1e-8 * (1.0 + r.natural_norm), "{}", r.idempotency_defect);
        assert!(r.invariance_defect <= 1e-8, "{}", r.invariance_defect);
        assert!(r.restriction_defect <= 1e-9, "{}", r.restriction_defect);
        assert!(!r.dim_mismatch);
        assert!(r.range_angle <= 1e-7, "{}", r.range_angle);
        assert!(r.cb.upper <= r.norm_cap + 1e-4, "{} > {}", r.cb.upper, r.norm_cap);
        assert!(r.cb.lower <= r.cb.upper + 1e-6);
        if r.action_cp {
            assert!(r.choi_min_relative >= -1e-9);
        }
    }

    #[test]
    fn uniform_examples() {
        let opts = ReportOptions::default();
        let trivial = group_action(FiniteGroup::cyclic(1).unwrap(), 2, &[]);
        let r = average_uniform(&trivial, &opts).unwrap();
        assert_eq!(r.p, SuperOp::identity(2));
        assert_eq!(r.range_basis.dim(), 4);
        assert_good(&r);

        let z2 = group_action(FiniteGroup::cyclic(2).unwrap(), 2, &[CMatrix::diag_real(&[1.0, -1.0])]);
        let r = average_uniform(&z2, &opts).unwrap();
        let y = r.p.apply(&CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!(y.approx_eq(&CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 4.0]), 1e-15));
        assert_eq!(r.range_basis.dim(), 2);
        assert!(r.idempotency_defect <= 1e-12);
        assert_good(&r);

        let z3 = group_action(FiniteGroup::cyclic(3).unwrap(), 3, &[shift(3)]);
        let r = average_uniform(&z3, &opts).unwrap();
        let y = r.p.apply(&CMatrix::unit(3, 3, 0, 0)).unwrap();
        assert!(y.approx_eq(&CMatrix::identity(3).scale_real(1.0 / 3.0), 1e-15));
        assert_eq!(r.range_basis.dim(), 3);
        assert_good(&r);
    }

    #[test]
    fn non_unitary_group_within_cap() {
        let rho = CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, -1.0]);
        let a = group_action(FiniteGroup::cyclic(2).unwrap(), 2, &[rho]);
        let r = average_uniform(&a, &ReportOptions::default()).unwrap();
        assert_eq!(r.cb.method, CbMethod::Sdp);
        assert!(!r.action_cp);
        assert_good(&r);
    }

    #[test]
    fn circle_examples() {
        let opts = ReportOptions::default();
        let a = build_circle_action(&[0, 0]).unwrap();
        let r = average_circle(&a, 1, &opts).unwrap();
        assert!(r.p.distance(&SuperOp::identity(2)) < 1e-15);

        let a = build_circle_action(&[0, 1]).unwrap();
        let r = average_circle(&a, 4, &opts).unwrap();
        assert!(r.p.distance(&SuperOp::pinching(2)) < 1e-15);
        assert_good(&r);
        assert!(matches!(
            average_circle(&a, 2, &opts),
            Err(Error::InsufficientQuadrature { nodes: 2, required: 3 })
        ));

        let a = build_circle_action(&[0, 1, 1]).unwrap();
        let r = average_circle(&a, 5, &opts).unwrap();
        assert_eq!(r.range_basis.dim(), 5);
        let x = CMatrix::from_fn(3, 3, |i, j| C64::new((1 + i * 3 + j) as f64, 0.0));
        let y = r.p.apply(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let keep = (i == 0) == (j == 0);
                let expect = if keep { x[(i, j)] } else { C64::new(0.0, 0.0) };
                assert!((y[(i, j)] - expect).norm() < 1e-13);
            }
        }
        assert_good(&r);
    }

    #[test]
    fn quadrature_stable_under_doubling() {
        let w = [0, 1, 2];
        let n = required_nodes(&w);
        let p1 = circle_projection(&w, n).unwrap();
        let p2 = circle_projection(&w, 2 * n).unwrap();
        assert!(p1.distance(&p2) <= 1e-13);
    }

    #[test]
    fn ergodic_examples() {
        let opts = ReportOptions::default();
        let a = build_monoid_action(vec![SuperOp::identity(2)], 64).unwrap();
        let r = average_ergodic(&a, 64, &opts).unwrap();
        assert_eq!(r.p, SuperOp::identity(2));

        let t = CMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let jordan = SuperOp::sandwich(&t, &t.adjoint()).unwrap();
        let a = build_monoid_action(vec![jordan], 64).unwrap();
        let r = average_ergodic(&a, 64, &opts).unwrap();
        assert_eq!(r.p, SuperOp::zero(2, 2));
        assert_eq!(r.range_basis.dim(), 0);
        assert_eq!(r.fixed.dim(), 0);

        let u = CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let a = build_monoid_action(vec![SuperOp::unitary_conjugation(&u).unwrap()], 256).unwrap();
        let r = average_ergodic(&a, 256, &opts).unwrap();
        assert!(r.p.distance(&SuperOp::pinching(2)) < 1e-12);
        assert_good(&r);
        assert!(r.cesaro[0].monotone);
        assert!(r.cesaro[0].fitted_constant <= r.cesaro[0].bound_constant);
    }

    #[test]
    fn ergodic_cp_map() {
        let x = pauli::x();
        let phi = SuperOp::identity(2)
            .add(&SuperOp::unitary_conjugation(&x).unwrap())
            .unwrap()
            .scale(C64::new(0.5, 0.0));
        let a = build_monoid_action(vec![phi], 256).unwrap();
        let r = average_ergodic(&a, 256, &ReportOptions::default()).unwrap();
        assert_good(&r);
        assert_eq!(r.cb.method, CbMethod::CompletelyPositive);
        assert!(r.cb.upper <= 1.0 + 1e-6);
        let c = &r.cesaro[0];
        assert!(c.monotone);
        for (&n, &e) in c.horizons.iter().zip(&c.errors) {
            assert!(e <= c.fitted_constant / n as f64 * (1.0 + 1e-12));
        }
        // Φ is idempotent, so A_N − P = (id − P)/N and both constants are ‖id − P‖
        assert!(c.fitted_constant <= c.bound_constant * (1.0 + 1e-9));
        assert!((c.fitted_constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ergodic_product_is_order_independent() {
        let u1 = CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)]);
        let u2 = CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
        let a = build_monoid_action(
            vec![SuperOp::unitary_conjugation(&u1).unwrap(), SuperOp::unitary_conjugation(&u2).unwrap()],
            64,
        )
        .unwrap();
        let r = average_ergodic(&a, 64, &ReportOptions::default()).unwrap();
        assert!(r.order_independence_defect.unwrap() <= 1e-10);
        assert!(r.p.distance(&SuperOp::pinching(3)) < 1e-12);
        assert_good(&r);
    }

    #[test]
    fn defective_eigenvalue_detected() {
        // natural matrix with a Jordan block at 1 but bounded probe horizon
        let n = CMatrix::from_fn(4, 4, |i, j| {
            if i == j || (i == 0 && j == 1) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let g = SuperOp::from_natural(2, 2, n).unwrap();
        assert!(matches!(ergodic_projection(&g, 0), Err(Error::DefectiveEigenvalue { .. })));
    }

    #[test]
    fn dual_examples() {
        let opts = ReportOptions::default();
        let trivial = group_action(FiniteGroup::cyclic(1).unwrap(), 2, &[]);
        let d = average_dual(&trivial, MeanStrategy::Uniform, &opts, 4, 1).unwrap();
        assert_eq!(d.report.p, SuperOp::identity(2));

        let z2 = group_action(FiniteGroup::cyclic(2).unwrap(), 2, &[CMatrix::diag_real(&[1.0, -1.0])]);
        let d = average_dual(&z2, MeanStrategy::Uniform, &opts, 16, 7).unwrap();
        let sigma = CMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let q = d.report.p.apply(&sigma).unwrap();
        assert!(q.approx_eq(&CMatrix::diag_real(&[0.5, 0.5]), 1e-15));
        assert!(d.states.automorphic);
        assert!(d.states.min_eigenvalue >= -1e-10);
        assert!(d.states.max_trace_error <= 1e-12);
        assert!(d.states.invariance_defect <= 1e-9);
        assert!(d.report.idempotency_defect <= 1e-9);

        let c = build_circle_action(&[0, 1]).unwrap();
        let d = average_dual(&c, MeanStrategy::CircleQuadrature { nodes: 3 }, &opts, 16, 7).unwrap();
        let e00 = CMatrix::unit(2, 2, 0, 0);
        assert!(d.report.p.apply(&e00).unwrap().approx_eq(&e00, 1e-15));
        assert!(d.states.min_eigenvalue >= -1e-10);
    }
}
