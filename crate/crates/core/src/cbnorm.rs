//! Completely bounded norms.
//!
//! The upper bound is the diamond-norm SDP for the Hilbert–Schmidt adjoint
//! `Φ†`, since `‖Φ‖_cb = ‖Φ†‖_⋄`. With `J` the Choi matrix of `Φ†` it reads
//!
//! ```text
//! minimize ½(‖Tr_out Y₀‖ + ‖Tr_out Y₁‖)  s.t.  [[Y₀, −J], [−Jᴴ, Y₁]] ⪰ 0.
//! ```
//!
//! The returned pair `(Y₀, Y₁)` is repaired to exact positivity and
//! rebalanced, and the bound is recomputed from it, so the value is a
//! certificate rather than a solver estimate.
//!
//! The lower bound comes from alternating maximization of `|uᴴ Φ_n(X) v|`
//! over unit vectors and contractions `X`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, op_norm, svd, CMatrix, C64};
use crate::sdp::{self, Entry, SdpProblem, SdpSettings};
use crate::superop::SuperOp;

pub const DEFAULT_CB_TOL: f64 = 1e-7;
pub const DEFAULT_RESTARTS: usize = 8;

#[derive(Debug, Clone)]
pub struct UpperBound {
    pub value: f64,
    /// `(Y₀, Y₁)` with `[[Y₀, −J], [−Jᴴ, Y₁]] ⪰ 0` for `J = J(Φ†)`.
    pub certificate: (CMatrix, CMatrix),
    /// Smallest eigenvalue of the certificate block matrix, relative to `‖J‖`.
    pub min_block_eigenvalue: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct LowerBound {
    pub value: f64,
    pub amplification: usize,
    /// Contraction `X ∈ M_n(M_d)` with `‖Φ_n(X)‖ = value`.
    pub witness: CMatrix,
}

#[derive(Debug, Clone)]
pub struct CbNormResult {
    pub lower: f64,
    pub upper: f64,
    pub witness: CMatrix,
    pub dual_certificate: (CMatrix, CMatrix),
}

#[derive(Debug, Clone, Copy)]
pub struct CbNormOptions {
    pub tol: f64,
    /// Amplification level for the lower bound; `None` uses the output dimension.
    pub amplify: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for CbNormOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_CB_TOL,
            amplify: None,
            restarts: DEFAULT_RESTARTS,
            seed: 0,
        }
    }
}

/// Index pairs of an orthonormal basis of `n x n` Hermitian matrices:
/// `E_pp`, `(E_pq + E_qp)/√2` and `i(E_pq − E_qp)/√2` for `p < q`.
#[derive(Clone, Copy)]
enum HermBasis {
    Diag(usize),
    Re(usize, usize),
    Im(usize, usize),
}

fn herm_basis(n: usize) -> Vec<HermBasis> {
    let mut out = Vec::with_capacity(n * n);
    for p in 0..n {
        out.push(HermBasis::Diag(p));
        for q in p + 1..n {
            out.push(HermBasis::Re(p, q));
            out.push(HermBasis::Im(p, q));
        }
    }
    out
}

/// Entries of basis element `h` placed in `block` at `offset` with factor `f`.
fn push_basis(out: &mut Vec<Entry>, h: HermBasis, block: usize, offset: usize, f: f64) {
    let r = std::f64::consts::FRAC_1_SQRT_2 * f;
    let mut push = |row: usize, col: usize, value: C64| {
        out.push(Entry {
            block,
            row: row + offset,
            col: col + offset,
            value,
        })
    };
    match h {
        HermBasis::Diag(p) => push(p, p, C64::new(f, 0.0)),
        HermBasis::Re(p, q) => {
            push(p, q, C64::new(r, 0.0));
            push(q, p, C64::new(r, 0.0));
        }
        HermBasis::Im(p, q) => {
            push(p, q, C64::new(0.0, r));
            push(q, p, C64::new(0.0, -r));
        }
    }
}

/// Partial trace over the second factor (dimension `inner`) of a basis
/// element of `Herm(outer · inner)`, as a combination in `Herm(outer)`.
fn push_traced(out: &mut Vec<Entry>, h: HermBasis, inner: usize, block: usize) {
    let (p, q) = match h {
        HermBasis::Diag(p) => (p, p),
        HermBasis::Re(p, q) | HermBasis::Im(p, q) => (p, q),
    };
    if p % inner != q % inner {
        return;
    }
    // p < q with equal inner index forces u < w
    let (u, w) = (p / inner, q / inner);
    let h = match h {
        HermBasis::Diag(_) => HermBasis::Diag(u),
        HermBasis::Re(..) => HermBasis::Re(u, w),
        HermBasis::Im(..) => HermBasis::Im(u, w),
    };
    push_basis(out, h, block, 0, 1.0);
}

/// Certified upper bound on `‖Φ‖_cb`.
pub fn cb_norm_upper(phi: &SuperOp, tol: f64) -> Result<UpperBound> {
    if !(tol > 0.0) {
        return Err(Error::Shape("tolerance must be positive".into()));
    }
    let psi = phi.hs_adjoint();
    // Ψ: M_k → M_d, Choi on ℂ^k ⊗ ℂ^d
    let k = psi.in_dim();
    let d = psi.out_dim();
    let j = psi.choi().clone();
    let nj = k * d;
    let scale = j.max_abs();
    if scale == 0.0 {
        return Ok(UpperBound {
            value: 0.0,
            certificate: (CMatrix::zeros(nj, nj), CMatrix::zeros(nj, nj)),
            min_block_eigenvalue: 0.0,
            iterations: 0,
        });
    }
    let jn = j.scale_real(1.0 / scale);

    let mut c0 = CMatrix::zeros(2 * nj, 2 * nj);
    c0.set_block(0, nj, &-&jn);
    c0.set_block(nj, 0, &-&jn.adjoint());
    let c = vec![c0, CMatrix::zeros(k, k), CMatrix::zeros(k, k)];

    let basis = herm_basis(nj);
    let mut constraints = Vec::with_capacity(2 * basis.len() + 2);
    let mut b = Vec::with_capacity(2 * basis.len() + 2);
    for (which, trace_block) in [(0usize, 1usize), (1, 2)] {
        for &h in &basis {
            let mut es = Vec::new();
            push_basis(&mut es, h, 0, which * nj, -1.0);
            push_traced(&mut es, h, d, trace_block);
            constraints.push(es);
            b.push(0.0);
        }
    }
    for blk in [1usize, 2] {
        constraints.push(
            (0..k)
                .map(|u| Entry {
                    block: blk,
                    row: u,
                    col: u,
                    value: C64::new(-1.0, 0.0),
                })
                .collect(),
        );
        b.push(-0.5);
    }
    let problem = SdpProblem::new(vec![2 * nj, k, k], c, constraints, b)?;
    let settings = SdpSettings {
        tol: (0.1 * tol).max(1e-12),
        ..SdpSettings::default()
    };
    let sol = sdp::solve(&problem, &settings)?;

    let aty = problem.apply_adjoint(&sol.y);
    let mut y0 = (-&aty[0].block(0, 0, nj, nj)).hermitian_part();
    let mut y1 = (-&aty[0].block(nj, nj, nj, nj)).hermitian_part();

    // repair to exact positivity of the block matrix
    let block_of = |y0: &CMatrix, y1: &CMatrix| {
        let mut m = CMatrix::zeros(2 * nj, 2 * nj);
        m.set_block(0, 0, y0);
        m.set_block(nj, nj, y1);
        m.set_block(0, nj, &-&jn);
        m.set_block(nj, 0, &-&jn.adjoint());
        m
    };
    let lmin = herm_eig(&block_of(&y0, &y1).hermitian_part())?.min();
    if lmin < 0.0 {
        let shift = CMatrix::identity(nj).scale_real(-lmin * (1.0 + 1e-9) + 1e-15);
        y0 = &y0 + &shift;
        y1 = &y1 + &shift;
    }
    let a0 = herm_eig(&partial_trace_second(&y0, k, d).hermitian_part())?.max().max(0.0);
    let a1 = herm_eig(&partial_trace_second(&y1, k, d).hermitian_part())?.max().max(0.0);
    // congruence by diag(√c I, I/√c) keeps positivity; optimal c balances both traces
    let (value, c_bal) = if a0 > 0.0 && a1 > 0.0 {
        ((a0 * a1).sqrt(), (a1 / a0).sqrt())
    } else {
        (0.5 * (a0 + a1), 1.0)
    };
    let min_block_eigenvalue = herm_eig(&block_of(&y0, &y1).hermitian_part())?.min();
    Ok(UpperBound {
        value: value * scale,
        certificate: (y0.scale_real(scale * c_bal), y1.scale_real(scale / c_bal)),
        min_block_eigenvalue,
        iterations: sol.iterations,
    })
}

/// `Tr_2` of a matrix on `ℂ^outer ⊗ ℂ^inner`.
pub fn partial_trace_second(m: &CMatrix, outer: usize, inner: usize) -> CMatrix {
    CMatrix::from_fn(outer, outer, |u, w| {
        (0..inner).map(|v| m[(u * inner + v, w * inner + v)]).sum()
    })
}

fn polar(z: &CMatrix) -> CMatrix {
    let s = svd(z);
    &s.u * &s.v.adjoint()
}

fn top_singular_pair(y: &CMatrix) -> (f64, Vec<C64>, Vec<C64>) {
    let s = svd(y);
    (s.sigma[0], s.u.column(0), s.v.column(0))
}

fn outer(u: &[C64], v: &[C64]) -> CMatrix {
    CMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
}

fn unit_gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let g = CMatrix::random_gaussian(n, 1, rng);
    let norm = g.frobenius_norm();
    g.column(0).into_iter().map(|z| z / norm).collect()
}

/// Lower bound on `‖Φ‖_cb` from `‖Φ_n(X)‖` over contractions found by
/// alternating maximization; the first start uses the maximally entangled
/// vector, the rest are seeded random.
pub fn cb_norm_lower(phi: &SuperOp, n: usize, restarts: usize, seed: u64) -> Result<LowerBound> {
    if n == 0 {
        return Err(Error::Shape("amplification level must be positive".into()));
    }
    let d = phi.in_dim();
    let k = phi.out_dim();
    let adj = phi.hs_adjoint();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = LowerBound {
        value: 0.0,
        amplification: n,
        witness: CMatrix::zeros(n * d, n * d),
    };
    for start in 0..=restarts {
        let (u, v) = if start == 0 {
            let r = n.min(k);
            let mut w = vec![C64::new(0.0, 0.0); n * k];
            for a in 0..r {
                w[a * k + a] = C64::new(1.0 / (r as f64).sqrt(), 0.0);
            }
            (w.clone(), w)
        } else {
            (unit_gaussian(n * k, &mut rng), unit_gaussian(n * k, &mut rng))
        };
        let mut x = polar(&adj.apply_amplified(n, &outer(&u, &v))?);
        let mut value = op_norm(&phi.apply_amplified(n, &x)?)?;
        for _ in 0..200 {
            let y = phi.apply_amplified(n, &x)?;
            let (_, u, v) = top_singular_pair(&y);
            let x_next = polar(&adj.apply_amplified(n, &outer(&u, &v))?);
            let next = op_norm(&phi.apply_amplified(n, &x_next)?)?;
            let improved = next > value;
            if improved {
                x = x_next;
            }
            if !improved || next - value <= 1e-13 * next.max(1.0) {
                value = value.max(next);
                break;
            }
            value = next;
        }
        if value > best.value {
            best.value = value;
            best.witness = x;
        }
    }
    Ok(best)
}

/// `‖Φ‖_cb = ‖Φ(I)‖` for completely positive `Φ`.
pub fn cb_norm_cp(phi: &SuperOp, tol: f64) -> Result<f64> {
    let (min_eigenvalue, norm) = phi.choi_spectrum_bounds();
    if min_eigenvalue < -tol * norm.max(1.0) {
        return Err(Error::NotCompletelyPositive { min_eigenvalue });
    }
    op_norm(&phi.apply(&CMatrix::identity(phi.in_dim()))?)
}

/// Cheap upper bound `‖Σ A_l A_lᴴ‖^{1/2} ‖Σ B_lᴴ B_l‖^{1/2}` from the
/// factorization `Φ(x) = Σ_l A_l x B_l` read off the SVD of the realigned
/// Choi matrix. Exact for single-term maps `x ↦ A x B`.
pub fn cb_norm_factorization_bound(phi: &SuperOp) -> f64 {
    let (d, k) = (phi.in_dim(), phi.out_dim());
    let j = phi.choi();
    if j.max_abs() == 0.0 {
        return 0.0;
    }
    let r = CMatrix::from_fn(k * d, d * k, |row, col| {
        let (p, i) = (row / d, row % d);
        let (jj, q) = (col / k, col % k);
        j[(i * k + p, jj * k + q)]
    });
    let s = svd(&r);
    let smax = s.max_singular();
    let mut left = CMatrix::zeros(k, k);
    let mut right = CMatrix::zeros(k, k);
    for (l, &sigma) in s.sigma.iter().enumerate() {
        if sigma <= 1e-15 * smax {
            break;
        }
        let rs = sigma.sqrt();
        let a = CMatrix::from_fn(k, d, |p, i| s.u[(p * d + i, l)] * rs);
        let b = CMatrix::from_fn(d, k, |jj, q| s.v[(jj * k + q, l)].conj() * rs);
        left = &left + &(&a * &a.adjoint());
        right = &right + &(&b.adjoint() * &b);
    }
    (op_norm(&left).unwrap_or(0.0) * op_norm(&right).unwrap_or(0.0)).sqrt()
}

/// Both bounds; `lower ≤ ‖Φ‖_cb ≤ upper`.
pub fn cb_norm(phi: &SuperOp, opts: &CbNormOptions) -> Result<CbNormResult> {
    let upper = cb_norm_upper(phi, opts.tol)?;
    let n = opts.amplify.unwrap_or(phi.out_dim());
    let lower = cb_norm_lower(phi, n, opts.restarts, opts.seed)?;
    Ok(CbNormResult {
        lower: lower.value,
        upper: upper.value,
        witness: lower.witness,
        dual_certificate: upper.certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn random_map(d: usize, k: usize, seed: u64) -> SuperOp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = CMatrix::random_gaussian(k * k, d * d, &mut rng);
        SuperOp::from_natural(d, k, n).unwrap()
    }

    fn random_cp(d: usize, k: usize, r: usize, seed: u64) -> SuperOp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ks: Vec<CMatrix> = (0..r).map(|_| CMatrix::random_gaussian(k, d, &mut rng)).collect();
        SuperOp::from_kraus(&ks).unwrap()
    }

    #[test]
    fn identity_map() {
        let r = cb_norm(&SuperOp::identity(3), &CbNormOptions::default()).unwrap();
        assert!((r.upper - 1.0).abs() < 1e-6, "{}", r.upper);
        assert!((r.lower - 1.0).abs() < 1e-6, "{}", r.lower);
    }

    #[test]
    fn transpose_on_m2() {
        let r = cb_norm(&SuperOp::transpose_map(2), &CbNormOptions::default()).unwrap();
        assert!((r.upper - 2.0).abs() < 1e-4, "{}", r.upper);
        assert!((r.lower - 2.0).abs() < 1e-4, "{}", r.lower);
    }

    #[test]
    fn transpose_norm_grows_with_dimension() {
        let up = cb_norm_upper(&SuperOp::transpose_map(3), 1e-7).unwrap();
        assert!((up.value - 3.0).abs() < 1e-5, "{}", up.value);
    }

    #[test]
    fn diagonal_sandwich() {
        let a = CMatrix::diag_real(&[1.0, 2.0]);
        let phi = SuperOp::sandwich(&a, &a).unwrap();
        let r = cb_norm(&phi, &CbNormOptions::default()).unwrap();
        assert!((r.upper - 4.0).abs() < 1e-5, "{}", r.upper);
        assert!((r.lower - 4.0).abs() < 1e-6);
        assert!((cb_norm_cp(&phi, 1e-9).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_map_is_zero() {
        let up = cb_norm_upper(&SuperOp::zero(2, 3), 1e-7).unwrap();
        assert_eq!(up.value, 0.0);
    }

    #[test]
    fn cp_shortcut_rejects_transpose() {
        assert!(matches!(
            cb_norm_cp(&SuperOp::transpose_map(2), 1e-9),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn certificate_is_feasible() {
        let phi = random_map(2, 3, 7);
        let up = cb_norm_upper(&phi, 1e-7).unwrap();
        let j = phi.hs_adjoint().choi().clone();
        let n = j.rows();
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        m.set_block(0, 0, &up.certificate.0);
        m.set_block(n, n, &up.certificate.1);
        m.set_block(0, n, &-&j);
        m.set_block(n, 0, &-&j.adjoint());
        let lmin = herm_eig(&m.hermitian_part()).unwrap().min();
        assert!(lmin >= -1e-9 * j.max_abs(), "{lmin}");
        let (k, d) = (phi.out_dim(), phi.in_dim());
        let t0 = op_norm(&partial_trace_second(&up.certificate.0, k, d)).unwrap();
        let t1 = op_norm(&partial_trace_second(&up.certificate.1, k, d)).unwrap();
        assert!((0.5 * (t0 + t1) - up.value).abs() < 1e-9 * up.value.max(1.0));
    }

    #[test]
    fn factorization_bound() {
        let rho = CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, -1.0]);
        let ad = SuperOp::conjugation(&rho).unwrap();
        let cond = crate::linalg::condition_number(&rho);
        assert!((cb_norm_factorization_bound(&ad) - cond).abs() < 1e-10);
        for seed in 0..5 {
            let phi = random_map(2, 3, seed);
            let up = cb_norm_upper(&phi, 1e-7).unwrap().value;
            assert!(cb_norm_factorization_bound(&phi) >= up * (1.0 - 1e-6));
        }
        let t = cb_norm_factorization_bound(&SuperOp::transpose_map(2));
        assert!(t >= 2.0 - 1e-9);
    }

    #[test]
    fn rectangular_maps() {
        let phi = random_map(3, 2, 11);
        let r = cb_norm(&phi, &CbNormOptions::default()).unwrap();
        assert!(r.lower <= r.upper * (1.0 + 1e-6));
        assert!(r.upper - r.lower < 1e-4 * r.upper, "{} {}", r.lower, r.upper);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn lower_never_exceeds_upper(seed in 0u64..10_000) {
            let phi = random_map(2, 2, seed);
            let r = cb_norm(&phi, &CbNormOptions { restarts: 2, ..Default::default() }).unwrap();
            prop_assert!(r.lower <= r.upper * (1.0 + 1e-6) + 1e-9);
        }

        #[test]
        fn matches_cp_formula(seed in 0u64..10_000, rank in 1usize..4) {
            let phi = random_cp(2, 2, rank, seed);
            let exact = cb_norm_cp(&phi, 1e-9).unwrap();
            let up = cb_norm_upper(&phi, 1e-7).unwrap().value;
            prop_assert!((up - exact).abs() <= 1e-5 * exact.max(1.0), "{} vs {}", up, exact);
        }

        #[test]
        fn submultiplicative(seed in 0u64..10_000) {
            let a = random_map(2, 2, seed);
            let b = random_map(2, 2, seed + 1);
            let ab = a.compose(&b).unwrap();
            let na = cb_norm_upper(&a, 1e-7).unwrap().value;
            let nb = cb_norm_upper(&b, 1e-7).unwrap().value;
            let nab = cb_norm_lower(&ab, 2, 2, seed).unwrap().value;
            prop_assert!(nab <= na * nb * (1.0 + 1e-6));
        }

        #[test]
        fn scale_equivariant(seed in 0u64..10_000, c in 0.01f64..100.0) {
            let phi = random_map(2, 2, seed);
            let base = cb_norm_upper(&phi, 1e-7).unwrap().value;
            let scaled = cb_norm_upper(&phi.scale(C64::new(0.0, c)), 1e-7).unwrap().value;
            prop_assert!((scaled - c * base).abs() <= 1e-6 * c * base);
        }
    }
}
