//! Ready-made scenarios built on the averaging engine: Toeplitz-type
//! projections, conditional expectations of finite dynamical systems, fixed
//! points of completely positive maps, Weyl unitarization, isotropy algebras
//! and plain-norm bounds.
//!
//! Only groups and `ℕ^d` are supported: those are the semigroups with a
//! computable invariant mean here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actions::{
    build_conjugation_action, build_monoid_action, Assignment, FiniteGroup, GroupRep, SemigroupAction,
    SemigroupDesc, DEFAULT_PROBE_HORIZON,
};
use crate::averaging::{
    average, average_dual, average_ergodic, average_uniform, MeanStrategy, ProjectionReport, ReportOptions,
    StateCheck, DEFAULT_HORIZON,
};
use crate::cbnorm::{cb_norm_cp, cb_norm_lower};
use crate::error::{Error, Result};
use crate::fixedpoints::{commutant, fixed_points_of_map, subspace_match, FixedSubspace};
use crate::linalg::{condition_number, expm, herm_eig, inverse, op_norm, sqrt_psd, CMatrix, C64};
use crate::superop::SuperOp;

/// Slack allowed on `‖ρ(s)‖ ≤ 1`.
pub const CONTRACTION_TOL: f64 = 1e-12;
/// Weyl averaging refuses Gram forms worse conditioned than this.
pub const MAX_GRAM_CONDITION: f64 = 1e10;
pub const ISOTROPY_SAMPLES: usize = 8;
pub const ISOTROPY_TIMES: [f64; 4] = [-0.5, -0.1, 0.1, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToeplitzMode {
    /// A unitary generator of order `N` acting as `ℤ_N`; the range is the
    /// circulant matrices for the cyclic shift.
    CyclicShift,
    /// A contraction acting as `ℕ`. For the nilpotent Jordan shift every
    /// power eventually vanishes, so only `C = 0` solves `T C Tᴴ = C`: the
    /// infinite-dimensional Hardy-space shift has no finite isometric
    /// truncation.
    TruncatedShift,
}

impl ToeplitzMode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CyclicShift => "cyclic_shift",
            Self::TruncatedShift => "truncated_shift",
        }
    }
}

/// `{C : ρ(s) C ρ(s)ᴴ = C}` for contractions `ρ(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzProblem {
    dim: usize,
    generators: Vec<CMatrix>,
    mode: ToeplitzMode,
}

/// `S e_j = e_{j+1 mod n}`.
pub fn cyclic_shift_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i == (j + 1) % n {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `T e_j = e_{j+1}`, `T e_{n−1} = 0`.
pub fn jordan_shift_matrix(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i == j + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

impl ToeplitzProblem {
    pub fn new(mode: ToeplitzMode, generators: Vec<CMatrix>) -> Result<Self> {
        let dim = generators
            .first()
            .ok_or_else(|| Error::Shape("Toeplitz problem needs a generator".into()))?
            .rows();
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if generators.iter().any(|g| g.shape() != (dim, dim)) {
            return Err(Error::Shape("generators must be square of one size".into()));
        }
        if mode == ToeplitzMode::CyclicShift && generators.len() != 1 {
            return Err(Error::Unsupported(
                "cyclic mode takes exactly one unitary generator".into(),
            ));
        }
        for g in &generators {
            let norm = op_norm(g)?;
            if norm > 1.0 + CONTRACTION_TOL {
                return Err(Error::NotContraction { norm });
            }
        }
        Ok(Self { dim, generators, mode })
    }

    pub fn cyclic_shift(n: usize) -> Result<Self> {
        Self::new(ToeplitzMode::CyclicShift, vec![cyclic_shift_matrix(n)])
    }

    pub fn truncated_shift(n: usize) -> Result<Self> {
        Self::new(ToeplitzMode::TruncatedShift, vec![jordan_shift_matrix(n)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn mode(&self) -> ToeplitzMode {
        self.mode
    }

    /// The action `C ↦ ρ(s) C ρ(s)ᴴ`.
    pub fn action(&self) -> Result<SemigroupAction> {
        match self.mode {
            ToeplitzMode::CyclicShift => {
                let s = &self.generators[0];
                let order = unitary_order(s, self.dim.max(1) * 64)?;
                let group = FiniteGroup::cyclic(order)?;
                let rep = GroupRep::from_generator_images(group.clone(), self.dim, std::slice::from_ref(s))?;
                build_conjugation_action(SemigroupDesc::Cyclic(group), rep)
            }
            ToeplitzMode::TruncatedShift => {
                let maps = self
                    .generators
                    .iter()
                    .map(|t| SuperOp::sandwich(t, &t.adjoint()))
                    .collect::<Result<Vec<_>>>()?;
                build_monoid_action(maps, DEFAULT_PROBE_HORIZON)
            }
        }
    }
}

/// Smallest `m ≤ limit` with `u^m = I`.
fn unitary_order(u: &CMatrix, limit: usize) -> Result<usize> {
    let d = u.rows();
    let adj_defect = (&(&u.adjoint() * u) - &CMatrix::identity(d)).max_abs();
    if adj_defect > 1e-10 {
        return Err(Error::InvalidSemigroup(format!(
            "cyclic mode needs a unitary generator (defect {adj_defect:.3e})"
        )));
    }
    let mut power = u.clone();
    for m in 1..=limit {
        if (&power - &CMatrix::identity(d)).max_abs() <= 1e-10 {
            return Ok(m);
        }
        power = &power * u;
    }
    Err(Error::InvalidSemigroup(format!(
        "generator has no finite order up to {limit}"
    )))
}

pub fn toeplitz_projection(p: &ToeplitzProblem, opts: &ReportOptions) -> Result<ProjectionReport> {
    let a = p.action()?;
    match p.mode {
        ToeplitzMode::CyclicShift => average_uniform(&a, opts),
        ToeplitzMode::TruncatedShift => average_ergodic(&a, DEFAULT_HORIZON, opts),
    }
}

/// Random element of a subspace of `M_d`: complex Gaussian coefficients on
/// its basis, normalized to operator norm one.
fn sample_subspace(f: &FixedSubspace, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
    let d = f.matrix_dim();
    let mut m = CMatrix::zeros(d, d);
    for b in f.matrices() {
        let c = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        m = &m + &b.scale(c);
    }
    let n = op_norm(&m)?;
    Ok(if n > 0.0 { m.scale_real(1.0 / n) } else { m })
}

/// `max ‖P(A D Bᴴ) − A P(D) Bᴴ‖ / (‖A‖‖B‖‖D‖)` over seeded random `D` and
/// random `A, B` in the commutant of the generators.
pub fn verify_module_property(
    p: &ToeplitzProblem,
    report: &ProjectionReport,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let comm = commutant(&p.generators);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let a = sample_subspace(&comm, &mut rng)?;
        let b = sample_subspace(&comm, &mut rng)?;
        let d = CMatrix::random_gaussian(p.dim, p.dim, &mut rng);
        worst = worst.max(module_defect(&report.p, &a, &b, &d)?);
    }
    Ok(worst)
}

fn module_defect(p: &SuperOp, a: &CMatrix, b: &CMatrix, d: &CMatrix) -> Result<f64> {
    let bh = b.adjoint();
    let lhs = p.apply(&(&(a * d) * &bh))?;
    let rhs = &(a * &p.apply(d)?) * &bh;
    let scale = op_norm(a)? * op_norm(b)? * op_norm(d)?;
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(op_norm(&(&lhs - &rhs))? / scale)
}

/// Conditional expectation of a finite `*`-automorphic dynamical system,
/// with its bimodule defect and the invariant-state check of its dual.
#[derive(Debug, Clone)]
pub struct DynsysReport {
    pub report: ProjectionReport,
    /// `max ‖P(a x b) − a P(x) b‖ / (‖a‖‖b‖‖x‖)` for `a, b` in the fixed
    /// algebra.
    pub bimodule_defect: f64,
    pub dual: ProjectionReport,
    pub states: StateCheck,
}

pub fn dynsys_expectation(
    a: &SemigroupAction,
    mean: MeanStrategy,
    opts: &ReportOptions,
    trials: usize,
    seed: u64,
) -> Result<DynsysReport> {
    if !a.is_automorphic() {
        return Err(Error::Unsupported(
            "conditional expectations need a *-automorphic action".into(),
        ));
    }
    let report = average(a, mean, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = a.dim();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let x = CMatrix::random_gaussian(d, d, &mut rng);
        let l = sample_subspace(&report.fixed, &mut rng)?;
        let r = sample_subspace(&report.fixed, &mut rng)?;
        // module_defect takes the right factor as B with Bᴴ applied
        worst = worst.max(module_defect(&report.p, &l, &r.adjoint(), &x)?);
    }
    let dual = average_dual(a, mean, opts, trials, seed ^ 0x5eed)?;
    Ok(DynsysReport {
        report,
        bimodule_defect: worst,
        dual: dual.report,
        states: dual.states,
    })
}

/// Fixed-point projection of a completely positive contraction.
#[derive(Debug, Clone)]
pub struct CpFixedReport {
    pub report: ProjectionReport,
    /// `{x : Φ(x) = x}` solved directly.
    pub direct: FixedSubspace,
    pub direct_angle: f64,
    pub direct_dim_mismatch: bool,
    /// `λ_min(J(P))`, unnormalized.
    pub choi_min_eigenvalue: f64,
    /// `‖P(I)‖`.
    pub cb_norm: f64,
    /// `‖Φ(I)‖`.
    pub input_cb_norm: f64,
}

/// `P = lim Cesàro(Φⁿ)` for a completely positive, completely contractive
/// `Φ`. Choi positivity of `Φ` is checked to `1e-9`, contractivity to
/// `1 + 1e-9`.
pub fn cp_fixed_projection(phi: &SuperOp, opts: &ReportOptions) -> Result<CpFixedReport> {
    if !phi.is_square() {
        return Err(Error::Shape("fixed points need a map M_d → M_d".into()));
    }
    let (lmin, _) = phi.choi_spectrum_bounds();
    if lmin < -1e-9 {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: lmin });
    }
    let input_cb_norm = cb_norm_cp(phi, 1e-9)?;
    if input_cb_norm > 1.0 + 1e-9 {
        return Err(Error::NotCompletelyContractive { cb_norm: input_cb_norm });
    }
    let a = build_monoid_action(vec![phi.clone()], DEFAULT_PROBE_HORIZON)?;
    let report = average_ergodic(&a, DEFAULT_HORIZON, opts)?;
    let direct = fixed_points_of_map(phi);
    let m = subspace_match(&report.range_basis, &direct.basis);
    let (choi_min_eigenvalue, _) = report.p.choi_spectrum_bounds();
    let cb_norm = op_norm(&report.p.apply(&CMatrix::identity(phi.in_dim()))?)?;
    Ok(CpFixedReport {
        report,
        direct,
        direct_angle: m.angle,
        direct_dim_mismatch: m.dim_mismatch,
        choi_min_eigenvalue,
        cb_norm,
        input_cb_norm,
    })
}

/// A bounded representation of a finite group.
#[derive(Debug, Clone, PartialEq)]
pub struct RepProblem {
    rep: GroupRep,
}

impl RepProblem {
    pub fn new(rep: GroupRep) -> Self {
        Self { rep }
    }

    pub fn rep(&self) -> &GroupRep {
        &self.rep
    }

    pub fn group(&self) -> &FiniteGroup {
        self.rep.group()
    }

    pub fn sup_norm(&self) -> f64 {
        self.rep.sup_norm()
    }

    pub fn conjugation_action(&self) -> Result<SemigroupAction> {
        build_conjugation_action(SemigroupDesc::FiniteGroup(self.rep.group().clone()), self.rep.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylResult {
    /// `B = |G|⁻¹ Σ_g ρ(g)ᴴ ρ(g)`.
    pub gram: CMatrix,
    /// `W = B^{1/2}`.
    pub w: CMatrix,
    /// `max_g ‖(Wρ(g)W⁻¹)ᴴ(Wρ(g)W⁻¹) − I‖`.
    pub defect: f64,
    pub gram_min_eigenvalue: f64,
    /// `|G|⁻¹ (max_g ‖ρ(g)‖)⁻²`, the guaranteed floor for the eigenvalue.
    pub gram_floor: f64,
    pub gram_condition: f64,
}

/// Similarity `W` making `Wρ(g)W⁻¹` unitary for every `g` at once.
pub fn weyl_unitarize(p: &RepProblem) -> Result<WeylResult> {
    let mats = p.rep.matrices();
    let n = mats.len();
    let d = p.rep.dim();
    let mut gram = CMatrix::zeros(d, d);
    for m in mats {
        gram = &gram + &(&m.adjoint() * m);
    }
    let gram = gram.scale_real(1.0 / n as f64).hermitian_part();
    let gram_condition = condition_number(&gram);
    if !(gram_condition <= MAX_GRAM_CONDITION) {
        return Err(Error::IllConditioned {
            condition: gram_condition,
        });
    }
    let w = sqrt_psd(&gram)?;
    let w_inv = inverse(&w)?;
    let id = CMatrix::identity(d);
    let mut defect = 0.0f64;
    for m in mats {
        let u = &(&w * m) * &w_inv;
        defect = defect.max(op_norm(&(&(&u.adjoint() * &u) - &id))?);
    }
    let sup = p.sup_norm();
    Ok(WeylResult {
        gram_min_eigenvalue: herm_eig(&gram)?.min(),
        gram_floor: 1.0 / (n as f64 * sup * sup),
        gram,
        w,
        defect,
        gram_condition,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyReport {
    /// `ρ(G)′`.
    pub algebra: FixedSubspace,
    /// Angle between `ρ(G)′` and the fixed space of the conjugation action.
    pub fixed_angle: f64,
    pub fixed_dim_mismatch: bool,
    /// `max ‖e^{ta} ρ(g) − ρ(g) e^{ta}‖` over samples and times.
    pub exp_defect: f64,
    pub samples: usize,
}

/// Lie algebra of the isotropy group of `ρ`, which is the commutant
/// `ρ(G)′`, with an exponential cross-check.
pub fn isotropy_lie_algebra(p: &RepProblem, seed: u64) -> Result<IsotropyReport> {
    let algebra = commutant(p.rep.matrices());
    let a = p.conjugation_action()?;
    let fixed = crate::fixedpoints::fixed_subspace(&a);
    let m = subspace_match(&fixed.basis, &algebra.basis);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exp_defect = 0.0f64;
    for _ in 0..ISOTROPY_SAMPLES {
        let x = sample_subspace(&algebra, &mut rng)?;
        for &t in &ISOTROPY_TIMES {
            let e = expm(&x.scale_real(t));
            for r in p.rep.matrices() {
                exp_defect = exp_defect.max(op_norm(&(&(&e * r) - &(r * &e)))?);
            }
        }
    }
    Ok(IsotropyReport {
        algebra,
        fixed_angle: m.angle,
        fixed_dim_mismatch: m.dim_mismatch,
        exp_defect,
        samples: ISOTROPY_SAMPLES,
    })
}

/// `‖P‖` and `sup_s ‖α_s‖` in the operator norm of `M_d` (not cb norms).
#[derive(Debug, Clone)]
pub struct PlainNormReport {
    pub report: ProjectionReport,
    /// `‖P‖` from alternating search over unitaries; a lower estimate that
    /// is attained in practice.
    pub norm_estimate: f64,
    /// `‖P‖ ≤ ‖P‖_cb`, so the reported cb upper bound also bounds `‖P‖`.
    pub norm_upper: f64,
    /// Exact for conjugation and circle actions, estimated otherwise.
    pub sup_action_norm: f64,
    pub sup_exact: bool,
    pub bound_holds: bool,
}

/// Plain operator norm of a map on `(M_d, ‖·‖)`, estimated from below.
pub fn plain_norm_estimate(phi: &SuperOp, restarts: usize, seed: u64) -> Result<f64> {
    Ok(cb_norm_lower(phi, 1, restarts, seed)?.value)
}

pub fn plain_norm_projection(
    a: &SemigroupAction,
    mean: MeanStrategy,
    opts: &ReportOptions,
    slack: f64,
) -> Result<PlainNormReport> {
    let report = average(a, mean, opts)?;
    let norm_estimate = plain_norm_estimate(&report.p, opts.restarts, opts.seed)?;
    // ‖Ad ρ‖ = ‖ρ‖‖ρ⁻¹‖, attained on a rank-one input
    let (sup_action_norm, sup_exact) = match a.assignment() {
        Assignment::Conjugation(rep) => (rep.max_condition(), true),
        Assignment::Circle(_) => (1.0, true),
        _ => {
            let mut s = 0.0f64;
            for op in a.check_ops() {
                s = s.max(plain_norm_estimate(&op, opts.restarts, opts.seed)?);
            }
            (s, false)
        }
    };
    Ok(PlainNormReport {
        norm_upper: report.cb.upper,
        bound_holds: norm_estimate <= sup_action_norm + slack,
        norm_estimate,
        sup_action_norm,
        sup_exact,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::build_circle_action;
    use crate::linalg::pauli;

    fn z2_rep(m: CMatrix) -> RepProblem {
        let g = FiniteGroup::cyclic(2).unwrap();
        let d = m.rows();
        RepProblem::new(GroupRep::from_generator_images(g, d, &[m]).unwrap())
    }

    fn s3_irrep() -> RepProblem {
        let h = 3f64.sqrt() / 2.0;
        let refl = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let rot = CMatrix::from_real(2, 2, &[-0.5, -h, h, -0.5]);
        let g = FiniteGroup::symmetric(3).unwrap();
        RepProblem::new(GroupRep::from_generator_images(g, 2, &[refl, rot]).unwrap())
    }

    #[test]
    fn cyclic_toeplitz_examples() {
        let opts = ReportOptions::default();
        let p3 = ToeplitzProblem::cyclic_shift(3).unwrap();
        let r = toeplitz_projection(&p3, &opts).unwrap();
        let out = r.p.apply(&CMatrix::unit(3, 3, 0, 0)).unwrap();
        assert!(out.approx_eq(&CMatrix::identity(3).scale_real(1.0 / 3.0), 1e-14));
        assert_eq!(r.fixed.dim(), 3);

        let p2 = ToeplitzProblem::cyclic_shift(2).unwrap();
        let r = toeplitz_projection(&p2, &opts).unwrap();
        let out = r.p.apply(&CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!(out.approx_eq(&CMatrix::from_real(2, 2, &[2.5, 2.5, 2.5, 2.5]), 1e-14));
    }

    #[test]
    fn truncated_shift_collapses() {
        for n in [2, 4] {
            let p = ToeplitzProblem::truncated_shift(n).unwrap();
            let r = toeplitz_projection(&p, &ReportOptions::default()).unwrap();
            assert_eq!(r.p.natural().max_abs(), 0.0);
            assert_eq!(r.fixed.dim(), 0);
        }
    }

    #[test]
    fn non_contraction_rejected() {
        let m = CMatrix::diag_real(&[1.5, 1.0]);
        assert!(matches!(
            ToeplitzProblem::new(ToeplitzMode::TruncatedShift, vec![m]),
            Err(Error::NotContraction { .. })
        ));
    }

    #[test]
    fn module_property_holds() {
        let opts = ReportOptions::default();
        for n in [3, 5] {
            let p = ToeplitzProblem::cyclic_shift(n).unwrap();
            let r = toeplitz_projection(&p, &opts).unwrap();
            assert!(verify_module_property(&p, &r, 32, 7).unwrap() <= 1e-10);
            // A = B = shift
            let s = cyclic_shift_matrix(n);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let d = CMatrix::random_gaussian(n, n, &mut rng);
            assert!(module_defect(&r.p, &s, &s, &d).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn cp_fixed_examples() {
        let opts = ReportOptions::default();
        let id = cp_fixed_projection(&SuperOp::identity(2), &opts).unwrap();
        assert!(id.report.p.distance(&SuperOp::identity(2)) < 1e-12);

        let x = pauli::x();
        let phi = SuperOp::identity(2)
            .add(&SuperOp::unitary_conjugation(&x).unwrap())
            .unwrap()
            .scale(C64::new(0.5, 0.0));
        let r = cp_fixed_projection(&phi, &opts).unwrap();
        assert_eq!(r.report.range_basis.dim(), 2);
        assert!(r.direct_angle <= 1e-7);
        assert!(r.choi_min_eigenvalue >= -1e-9);
        assert!(r.cb_norm <= 1.0 + 1e-6);

        let e00 = CMatrix::unit(2, 2, 0, 0);
        let corner = SuperOp::sandwich(&e00, &e00).unwrap();
        let r = cp_fixed_projection(&corner, &opts).unwrap();
        let y = CMatrix::from_real(2, 2, &[3.0, 1.0, 2.0, 5.0]);
        assert!(r.report.p.apply(&y).unwrap().approx_eq(&e00.scale_real(3.0), 1e-12));
        assert_eq!(r.report.range_basis.dim(), 1);
    }

    #[test]
    fn cp_fixed_rejects_bad_hypotheses() {
        let opts = ReportOptions::default();
        assert!(matches!(
            cp_fixed_projection(&SuperOp::transpose_map(2), &opts),
            Err(Error::NotCompletelyPositive { .. })
        ));
        let big = SuperOp::identity(2).scale(C64::new(2.0, 0.0));
        assert!(matches!(
            cp_fixed_projection(&big, &opts),
            Err(Error::NotCompletelyContractive { .. })
        ));
    }

    #[test]
    fn weyl_examples() {
        let r = weyl_unitarize(&s3_irrep()).unwrap();
        assert!(r.defect <= 1e-12);
        assert!(r.w.approx_eq(&CMatrix::identity(2), 1e-12));

        let p = z2_rep(CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, -1.0]));
        let r = weyl_unitarize(&p).unwrap();
        assert!(r.gram.approx_eq(&CMatrix::from_real(2, 2, &[1.0, 0.5, 0.5, 1.5]), 1e-14));
        assert!(r.defect <= 1e-10);
        assert!(r.gram_min_eigenvalue >= r.gram_floor);

        let mut m = CMatrix::identity(3);
        m.set_block(0, 0, &CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, -1.0]));
        let r = weyl_unitarize(&z2_rep(m)).unwrap();
        assert!(r.defect <= 1e-10);
        assert!(r.w[(2, 0)].norm() < 1e-14 && r.w[(0, 2)].norm() < 1e-14);
    }

    #[test]
    fn isotropy_examples() {
        let g = FiniteGroup::cyclic(1).unwrap();
        let trivial = RepProblem::new(GroupRep::from_generator_images(g, 3, &[]).unwrap());
        assert_eq!(isotropy_lie_algebra(&trivial, 0).unwrap().algebra.dim(), 9);

        let r = isotropy_lie_algebra(&z2_rep(CMatrix::diag_real(&[1.0, -1.0])), 0).unwrap();
        assert_eq!(r.algebra.dim(), 2);
        assert!(r.exp_defect <= 1e-8);

        let r = isotropy_lie_algebra(&s3_irrep(), 0).unwrap();
        assert_eq!(r.algebra.dim(), 1);
        assert!(r.fixed_angle <= 1e-8 && r.exp_defect <= 1e-8);
    }

    #[test]
    fn plain_norm_examples() {
        let opts = ReportOptions::default();
        let z2 = z2_rep(CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, -1.0]));
        let a = z2.conjugation_action().unwrap();
        let r = plain_norm_projection(&a, MeanStrategy::Uniform, &opts, 1e-6).unwrap();
        assert!(r.bound_holds && r.sup_exact);
        let golden_sq = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((r.sup_action_norm - golden_sq).abs() < 1e-9);
        assert!(r.norm_estimate <= 2.62);

        let g = FiniteGroup::cyclic(1).unwrap();
        let trivial = RepProblem::new(GroupRep::from_generator_images(g, 2, &[]).unwrap());
        let r = plain_norm_projection(&trivial.conjugation_action().unwrap(), MeanStrategy::Uniform, &opts, 1e-6)
            .unwrap();
        assert!((r.norm_estimate - 1.0).abs() < 1e-12);

        let c = build_circle_action(&[0, 1]).unwrap();
        let r = plain_norm_projection(&c, MeanStrategy::CircleQuadrature { nodes: 3 }, &opts, 1e-6).unwrap();
        assert!(r.bound_holds);
    }

    #[test]
    fn dynsys_conditional_expectation() {
        let opts = ReportOptions::default();
        let a = s3_irrep().conjugation_action().unwrap();
        let r = dynsys_expectation(&a, MeanStrategy::Uniform, &opts, 16, 3).unwrap();
        assert!(r.bimodule_defect <= 1e-9);
        assert!(r.states.min_eigenvalue >= -1e-10);
        assert!(r.states.max_trace_error <= 1e-12);

        let bad = z2_rep(CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, -1.0]))
            .conjugation_action()
            .unwrap();
        assert!(dynsys_expectation(&bad, MeanStrategy::Uniform, &opts, 4, 0).is_err());
    }
}
