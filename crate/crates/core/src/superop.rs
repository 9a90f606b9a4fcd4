//! Linear maps `Φ: M_d → M_k` as first-class values.
//!
//! The natural representation is the `k² x d²` matrix acting on column-stacked
//! vectors, `vec(Φ(x)) = N vec(x)`. The Choi matrix is
//! `J(Φ) = Σ_ij E_ij ⊗ Φ(E_ij)` on `ℂ^d ⊗ ℂ^k`, i.e.
//! `J[(i k + p), (j k + q)] = Φ(E_ij)[p, q]`.
//!
//! Duality uses the bilinear pairing `⟨y, x⟩ = tr(yᵀ x)`, so the dual map is
//! the plain transpose of the natural matrix. The Hilbert–Schmidt adjoint for
//! the sesquilinear pairing `tr(yᴴ x)` is the conjugate transpose, see
//! [`SuperOp::hs_adjoint`]; the two differ by entrywise conjugation.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};

/// Default Kraus rank tolerance, relative to `‖J‖`.
pub const DEFAULT_KRAUS_TOL: f64 = 1e-9;

#[derive(Clone)]
pub struct SuperOp {
    in_dim: usize,
    out_dim: usize,
    natural: CMatrix,
    choi: OnceLock<CMatrix>,
}

impl std::fmt::Debug for SuperOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SuperOp")
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .field("natural", &self.natural)
            .finish()
    }
}

impl PartialEq for SuperOp {
    fn eq(&self, other: &Self) -> bool {
        self.in_dim == other.in_dim && self.out_dim == other.out_dim && self.natural == other.natural
    }
}

impl SuperOp {
    pub fn from_natural(in_dim: usize, out_dim: usize, natural: CMatrix) -> Result<Self> {
        if natural.shape() != (out_dim * out_dim, in_dim * in_dim) {
            return Err(Error::Shape(format!(
                "natural matrix for M_{in_dim} -> M_{out_dim} must be {}x{}, got {}x{}",
                out_dim * out_dim,
                in_dim * in_dim,
                natural.rows(),
                natural.cols()
            )));
        }
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        Ok(Self {
            in_dim,
            out_dim,
            natural,
            choi: OnceLock::new(),
        })
    }

    pub fn from_choi(in_dim: usize, out_dim: usize, choi: &CMatrix) -> Result<Self> {
        let (d, k) = (in_dim, out_dim);
        if choi.shape() != (d * k, d * k) {
            return Err(Error::Shape(format!(
                "Choi matrix for M_{d} -> M_{k} must be {0}x{0}",
                d * k
            )));
        }
        let mut nat = CMatrix::zeros(k * k, d * d);
        for i in 0..d {
            for j in 0..d {
                for p in 0..k {
                    for q in 0..k {
                        nat[(p + q * k, i + j * d)] = choi[(i * k + p, j * k + q)];
                    }
                }
            }
        }
        let op = Self::from_natural(d, k, nat)?;
        let _ = op.choi.set(choi.clone());
        Ok(op)
    }

    /// Builds the map by evaluating `f` on the matrix units of `M_d`.
    pub fn from_fn(in_dim: usize, out_dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        let d = in_dim;
        let mut cols = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                let img = f(&CMatrix::unit(d, d, i, j));
                if img.shape() != (out_dim, out_dim) {
                    return Err(Error::Shape("image has the wrong shape".into()));
                }
                cols.push(img.vec());
            }
        }
        Self::from_natural(d, out_dim, CMatrix::from_columns(out_dim * out_dim, &cols))
    }

    /// `x ↦ Σ_i A_i x A_iᴴ` for `k x d` Kraus operators.
    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Shape("empty Kraus list".into()))?;
        let (k, d) = first.shape();
        let mut nat = CMatrix::zeros(k * k, d * d);
        for a in kraus {
            if a.shape() != (k, d) {
                return Err(Error::Shape("Kraus operators must share a shape".into()));
            }
            nat = &nat + &a.conj().kron(a);
        }
        Self::from_natural(d, k, nat)
    }

    /// `x ↦ a x b` with `a: k x d`, `b: d x k`.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        let (k, d) = a.shape();
        if b.shape() != (d, k) {
            return Err(Error::Shape("sandwich factors do not conform".into()));
        }
        Self::from_natural(d, k, b.transpose().kron(a))
    }

    /// `x ↦ ρ x ρ⁻¹` for invertible `ρ`.
    pub fn conjugation(rho: &CMatrix) -> Result<Self> {
        let inv = linalg::inverse(rho)?;
        Self::sandwich(rho, &inv)
    }

    /// `x ↦ u x uᴴ`.
    pub fn unitary_conjugation(u: &CMatrix) -> Result<Self> {
        Self::sandwich(u, &u.adjoint())
    }

    pub fn identity(d: usize) -> Self {
        Self::from_natural(d, d, CMatrix::identity(d * d)).expect("shape")
    }

    pub fn zero(in_dim: usize, out_dim: usize) -> Self {
        Self::from_natural(
            in_dim,
            out_dim,
            CMatrix::zeros(out_dim * out_dim, in_dim * in_dim),
        )
        .expect("shape")
    }

    pub fn transpose_map(d: usize) -> Self {
        Self::from_fn(d, d, |x| x.transpose()).expect("shape")
    }

    /// Pinching onto the diagonal.
    pub fn pinching(d: usize) -> Self {
        Self::from_fn(d, d, |x| {
            CMatrix::from_fn(d, d, |i, j| if i == j { x[(i, i)] } else { C64::new(0.0, 0.0) })
        })
        .expect("shape")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn natural(&self) -> &CMatrix {
        &self.natural
    }

    pub fn is_square(&self) -> bool {
        self.in_dim == self.out_dim
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.in_dim, self.in_dim) {
            return Err(Error::Shape(format!(
                "map acts on {0}x{0} matrices, got {1}x{2}",
                self.in_dim,
                x.rows(),
                x.cols()
            )));
        }
        let v = self.natural.mul_vec(&x.vec());
        Ok(CMatrix::unvec(&v, self.out_dim, self.out_dim))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SuperOp) -> Result<SuperOp> {
        if other.out_dim != self.in_dim {
            return Err(Error::Shape(format!(
                "cannot compose M_{} -> M_{} after M_{} -> M_{}",
                self.in_dim, self.out_dim, other.in_dim, other.out_dim
            )));
        }
        Self::from_natural(other.in_dim, self.out_dim, &self.natural * &other.natural)
    }

    pub fn pow(&self, k: usize) -> SuperOp {
        assert!(self.is_square(), "power of a non-square map");
        Self::from_natural(self.in_dim, self.out_dim, self.natural.pow(k)).expect("shape")
    }

    pub fn choi(&self) -> &CMatrix {
        self.choi.get_or_init(|| {
            let (d, k) = (self.in_dim, self.out_dim);
            let mut j = CMatrix::zeros(d * k, d * k);
            for i1 in 0..d {
                for j1 in 0..d {
                    for p in 0..k {
                        for q in 0..k {
                            j[(i1 * k + p, j1 * k + q)] = self.natural[(p + q * k, i1 + j1 * d)];
                        }
                    }
                }
            }
            j
        })
    }

    /// Smallest eigenvalue of the Hermitian part of the Choi matrix, and the
    /// spectral norm of the Choi matrix.
    pub fn choi_spectrum_bounds(&self) -> (f64, f64) {
        let j = self.choi().hermitian_part();
        let e = linalg::decomp::herm_eig_unchecked(&j, j.rows());
        let scale = e.min().abs().max(e.max().abs());
        (e.min(), scale)
    }

    /// Hermiticity-preserving and Choi PSD within `tol ‖J‖`.
    pub fn is_completely_positive(&self, tol: f64) -> bool {
        let j = self.choi();
        let scale = j.frobenius_norm();
        if j.hermitian_residual() > 1e-10 * scale.max(1e-300) && scale > 0.0 {
            return false;
        }
        let (min, norm) = self.choi_spectrum_bounds();
        min >= -tol * norm
    }

    /// Kraus decomposition from the eigen-decomposition of the Choi matrix.
    pub fn kraus(&self, tol: f64) -> Result<Vec<CMatrix>> {
        let (d, k) = (self.in_dim, self.out_dim);
        let j = self.choi();
        let scale = j.frobenius_norm();
        if scale == 0.0 {
            return Ok(Vec::new());
        }
        let herm_res = j.hermitian_residual();
        if herm_res > 1e-10 * scale {
            return Err(Error::ChoiNotPsd {
                min_eigenvalue: -herm_res,
            });
        }
        let e = linalg::decomp::herm_eig_unchecked(&j.hermitian_part(), d * k);
        let norm = e.min().abs().max(e.max().abs());
        if e.min() < -tol * norm {
            return Err(Error::ChoiNotPsd {
                min_eigenvalue: e.min(),
            });
        }
        let mut out = Vec::new();
        for idx in (0..d * k).rev() {
            let lambda = e.values[idx];
            if lambda <= tol * norm {
                break;
            }
            let s = lambda.sqrt();
            let a = CMatrix::from_fn(k, d, |p, i| e.vectors[(i * k + p, idx)] * s);
            out.push(a);
        }
        Ok(out)
    }

    /// `id_n ⊗ Φ` on `M_n(M_d) ≅ M_{nd}`, where block `(a, b)` of an `nd x nd`
    /// matrix is the `d x d` submatrix at rows `a d ..`, columns `b d ..`.
    pub fn amplify(&self, n: usize) -> SuperOp {
        assert!(n >= 1, "amplification level must be positive");
        if n == 1 {
            return self.clone();
        }
        let (d, k) = (self.in_dim, self.out_dim);
        let (nd, nk) = (n * d, n * k);
        let mut nat = CMatrix::zeros(nk * nk, nd * nd);
        for a in 0..n {
            for b in 0..n {
                for i in 0..d {
                    for j in 0..d {
                        let col = (a * d + i) + (b * d + j) * nd;
                        for p in 0..k {
                            for q in 0..k {
                                let v = self.natural[(p + q * k, i + j * d)];
                                if v != C64::new(0.0, 0.0) {
                                    nat[((a * k + p) + (b * k + q) * nk, col)] = v;
                                }
                            }
                        }
                    }
                }
            }
        }
        Self::from_natural(nd, nk, nat).expect("shape")
    }

    /// Applies `id_n ⊗ Φ` blockwise without materializing its natural matrix.
    pub fn apply_amplified(&self, n: usize, x: &CMatrix) -> Result<CMatrix> {
        let (d, k) = (self.in_dim, self.out_dim);
        if x.shape() != (n * d, n * d) {
            return Err(Error::Shape("amplified input has the wrong shape".into()));
        }
        let mut out = CMatrix::zeros(n * k, n * k);
        for a in 0..n {
            for b in 0..n {
                let blk = self.apply(&x.block(a * d, b * d, d, d))?;
                out.set_block(a * k, b * k, &blk);
            }
        }
        Ok(out)
    }

    /// Dual map under `⟨y, x⟩ = tr(yᵀ x)`: `tr(Φ'(y)ᵀ x) = tr(yᵀ Φ(x))`.
    pub fn dual(&self) -> SuperOp {
        Self::from_natural(self.out_dim, self.in_dim, self.natural.transpose()).expect("shape")
    }

    /// Adjoint under the Hilbert–Schmidt inner product `tr(yᴴ x)`.
    pub fn hs_adjoint(&self) -> SuperOp {
        Self::from_natural(self.out_dim, self.in_dim, self.natural.adjoint()).expect("shape")
    }

    pub fn scale(&self, c: C64) -> SuperOp {
        Self::from_natural(self.in_dim, self.out_dim, self.natural.scale(c)).expect("shape")
    }

    pub fn add(&self, other: &SuperOp) -> Result<SuperOp> {
        if (self.in_dim, self.out_dim) != (other.in_dim, other.out_dim) {
            return Err(Error::Shape("cannot add maps of different shapes".into()));
        }
        Self::from_natural(self.in_dim, self.out_dim, &self.natural + &other.natural)
    }

    /// Largest entry of the difference of natural matrices.
    pub fn distance(&self, other: &SuperOp) -> f64 {
        (&self.natural - &other.natural).max_abs()
    }

    /// Spectral norm of the difference of natural matrices.
    pub fn natural_distance(&self, other: &SuperOp) -> f64 {
        linalg::op_norm(&(&self.natural - &other.natural)).unwrap_or(0.0)
    }

    /// Spectral norm of the natural matrix (the `2 → 2` norm on `M_d` with the
    /// Frobenius norm).
    pub fn natural_norm(&self) -> f64 {
        linalg::op_norm(&self.natural).unwrap_or(0.0)
    }
}

/// Tree-ordered sum of maps, so the floating-point result does not depend on
/// how the list was produced.
pub fn tree_sum(ops: &[SuperOp]) -> Result<SuperOp> {
    tree_sum_with(ops.len(), |i| Ok(ops[i].clone()))
}

/// Tree-ordered sum of `f(0), …, f(n − 1)`, generating terms on demand so at
/// most `log₂ n` partial sums are alive at once.
pub fn tree_sum_with(n: usize, f: impl Fn(usize) -> Result<SuperOp>) -> Result<SuperOp> {
    fn go(lo: usize, hi: usize, f: &dyn Fn(usize) -> Result<SuperOp>) -> Result<SuperOp> {
        if hi - lo == 1 {
            return f(lo);
        }
        let mid = lo + (hi - lo) / 2;
        go(lo, mid, f)?.add(&go(mid, hi, f)?)
    }
    if n == 0 {
        return Err(Error::Shape("sum of an empty list".into()));
    }
    go(0, n, &f)
}

pub mod format {
    //! Superoperator text format: a header line `superop d k repr` with
    //! `repr ∈ {natural, choi, kraus}`, followed by the payload in the matrix
    //! text format. A Kraus payload is a count line followed by that many
    //! `k x d` matrices.

    use super::SuperOp;
    use crate::error::{Error, Result};
    use crate::linalg::text::{next_nonempty, read_matrix, write_matrix};
    use crate::linalg::CMatrix;

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Repr {
        Natural,
        Choi,
        Kraus,
    }

    impl std::str::FromStr for Repr {
        type Err = String;

        fn from_str(s: &str) -> std::result::Result<Self, String> {
            match s {
                "natural" => Ok(Repr::Natural),
                "choi" => Ok(Repr::Choi),
                "kraus" => Ok(Repr::Kraus),
                other => Err(format!("unknown representation '{other}'")),
            }
        }
    }

    fn perr(line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn parse_superop(text: &str) -> Result<SuperOp> {
        let mut lines = text.lines();
        let mut line_no = 0;
        let header = next_nonempty(&mut lines, &mut line_no)
            .ok_or_else(|| perr(1, "missing 'superop d k repr' header"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "superop" {
            return Err(perr(line_no, "header must be 'superop d k repr'"));
        }
        let d: usize = parts[1].parse().map_err(|_| perr(line_no, "bad input dimension"))?;
        let k: usize = parts[2].parse().map_err(|_| perr(line_no, "bad output dimension"))?;
        if d == 0 || k == 0 {
            return Err(perr(line_no, "dimensions must be positive"));
        }
        let repr: Repr = parts[3].parse().map_err(|m: String| perr(line_no, m))?;
        let header_line = line_no;
        let op = match repr {
            Repr::Natural => {
                let m = read_matrix(&mut lines, &mut line_no)?;
                SuperOp::from_natural(d, k, m).map_err(|e| perr(header_line, e.to_string()))?
            }
            Repr::Choi => {
                let m = read_matrix(&mut lines, &mut line_no)?;
                SuperOp::from_choi(d, k, &m).map_err(|e| perr(header_line, e.to_string()))?
            }
            Repr::Kraus => {
                let count_line = next_nonempty(&mut lines, &mut line_no)
                    .ok_or_else(|| perr(line_no, "missing Kraus count"))?;
                let count: usize = count_line
                    .parse()
                    .map_err(|_| perr(line_no, "bad Kraus count"))?;
                if count == 0 {
                    return Err(perr(line_no, "Kraus count must be positive"));
                }
                let mut ops = Vec::with_capacity(count);
                for _ in 0..count {
                    let m = read_matrix(&mut lines, &mut line_no)?;
                    if m.shape() != (k, d) {
                        return Err(perr(line_no, format!("Kraus operator must be {k}x{d}")));
                    }
                    ops.push(m);
                }
                SuperOp::from_kraus(&ops).map_err(|e| perr(header_line, e.to_string()))?
            }
        };
        if let Some(extra) = next_nonempty(&mut lines, &mut line_no) {
            return Err(perr(line_no, format!("trailing content '{extra}'")));
        }
        Ok(op)
    }

    /// Writes `op` in the natural or Choi representation.
    pub fn write_superop(op: &SuperOp, repr: Repr) -> Result<String> {
        let mut s = String::new();
        s.push_str(&format!(
            "superop {} {} {}\n",
            op.in_dim(),
            op.out_dim(),
            match repr {
                Repr::Natural => "natural",
                Repr::Choi => "choi",
                Repr::Kraus => "kraus",
            }
        ));
        match repr {
            Repr::Natural => write_matrix(op.natural(), &mut s),
            Repr::Choi => write_matrix(op.choi(), &mut s),
            Repr::Kraus => {
                let ks = op.kraus(super::DEFAULT_KRAUS_TOL)?;
                let ks: Vec<CMatrix> = if ks.is_empty() {
                    vec![CMatrix::zeros(op.out_dim(), op.in_dim())]
                } else {
                    ks
                };
                s.push_str(&format!("{}\n", ks.len()));
                for k in &ks {
                    write_matrix(k, &mut s);
                }
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(rows: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_real(rows, data.len() / rows, data)
    }

    fn random_op(d: usize, k: usize, rng: &mut ChaCha8Rng) -> SuperOp {
        SuperOp::from_natural(d, k, CMatrix::random_gaussian(k * k, d * d, rng)).unwrap()
    }

    #[test]
    fn apply_examples() {
        let x = m(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(SuperOp::identity(2).apply(&x).unwrap(), x);
        let ad = SuperOp::unitary_conjugation(&pauli::z()).unwrap();
        assert_eq!(ad.apply(&x).unwrap(), m(2, &[1.0, -2.0, -3.0, 4.0]));
        assert_eq!(SuperOp::zero(2, 2).apply(&x).unwrap(), CMatrix::zeros(2, 2));
        assert!(SuperOp::identity(2).apply(&CMatrix::identity(3)).is_err());
    }

    #[test]
    fn compose_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = random_op(2, 2, &mut rng);
        assert_eq!(phi.compose(&SuperOp::identity(2)).unwrap(), phi);
        let u = CMatrix::random_unitary(3, &mut rng);
        let v = CMatrix::random_unitary(3, &mut rng);
        let lhs = SuperOp::unitary_conjugation(&u)
            .unwrap()
            .compose(&SuperOp::unitary_conjugation(&v).unwrap())
            .unwrap();
        let rhs = SuperOp::unitary_conjugation(&(&u * &v)).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
        let t = SuperOp::transpose_map(2);
        assert_eq!(t.compose(&t).unwrap(), SuperOp::identity(2));
        assert!(phi.compose(&SuperOp::identity(3)).is_err());
    }

    #[test]
    fn choi_examples() {
        let j = SuperOp::identity(2).choi().clone();
        let mut expected = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for l in 0..2 {
                expected = &expected + &CMatrix::unit(2, 2, i, l).kron(&CMatrix::unit(2, 2, i, l));
            }
        }
        assert_eq!(j, expected);

        let depolarize = SuperOp::from_fn(2, 2, |x| CMatrix::identity(2).scale(x.trace() * 0.5)).unwrap();
        assert_eq!(depolarize.choi(), &CMatrix::identity(4).scale_real(0.5));

        let swap = CMatrix::from_fn(4, 4, |r, c| {
            let (i, p) = (r / 2, r % 2);
            let (j, q) = (c / 2, c % 2);
            C64::new(if i == q && p == j { 1.0 } else { 0.0 }, 0.0)
        });
        assert_eq!(SuperOp::transpose_map(2).choi(), &swap);
    }

    #[test]
    fn choi_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = random_op(3, 2, &mut rng);
        let back = SuperOp::from_choi(3, 2, phi.choi()).unwrap();
        assert!(back.distance(&phi) <= 1e-12);
    }

    #[test]
    fn kraus_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = CMatrix::random_unitary(2, &mut rng);
        let ks = SuperOp::unitary_conjugation(&u).unwrap().kraus(DEFAULT_KRAUS_TOL).unwrap();
        assert_eq!(ks.len(), 1);
        // proportional to u: kᴴ u is a phase times the identity
        let ratio = &ks[0].adjoint() * &u;
        assert!((ratio[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(ratio[(0, 1)].norm() < 1e-12);

        let ks = SuperOp::pinching(2).kraus(DEFAULT_KRAUS_TOL).unwrap();
        assert_eq!(ks.len(), 2);
        let units = [CMatrix::unit(2, 2, 0, 0), CMatrix::unit(2, 2, 1, 1)];
        for k in &ks {
            assert!(units.iter().any(|e| (k - e).max_abs() < 1e-12 || (k + e).max_abs() < 1e-12));
        }

        match SuperOp::transpose_map(2).kraus(DEFAULT_KRAUS_TOL) {
            Err(Error::ChoiNotPsd { min_eigenvalue }) => assert!((min_eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("expected ChoiNotPsd, got {other:?}"),
        }
    }

    #[test]
    fn kraus_reconstruction_matches_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ks: Vec<CMatrix> = (0..3).map(|_| CMatrix::random_gaussian(3, 2, &mut rng)).collect();
        let phi = SuperOp::from_kraus(&ks).unwrap();
        let back = SuperOp::from_kraus(&phi.kraus(DEFAULT_KRAUS_TOL).unwrap()).unwrap();
        assert!((back.choi() - phi.choi()).max_abs() <= 1e-9 * phi.choi().max_abs());
        assert_eq!(phi.kraus(DEFAULT_KRAUS_TOL).unwrap().len(), 3);
    }

    #[test]
    fn amplify_examples() {
        assert_eq!(SuperOp::identity(2).amplify(3), SuperOp::identity(6));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let phi = random_op(2, 3, &mut rng);
        let psi = random_op(2, 2, &mut rng);
        let lhs = phi.compose(&psi).unwrap().amplify(2);
        let rhs = phi.amplify(2).compose(&psi.amplify(2)).unwrap();
        assert!(lhs.distance(&rhs) < 1e-12);
        let x = CMatrix::random_gaussian(4, 4, &mut rng);
        let direct = phi.amplify(2).apply(&x).unwrap();
        let blockwise = phi.apply_amplified(2, &x).unwrap();
        assert!((&direct - &blockwise).max_abs() < 1e-13);

        // The unit-norm SWAP is mapped to Σ E_ij ⊗ E_ij, which has norm 2.
        let t = SuperOp::transpose_map(2);
        let swap = t.choi().clone();
        assert!((swap.op_norm().unwrap() - 1.0).abs() < 1e-14);
        let image = t.amplify(2).apply(&swap).unwrap().op_norm().unwrap();
        assert!(image >= 2.0 - 1e-6);
    }

    #[test]
    fn dual_examples() {
        assert_eq!(SuperOp::identity(3).dual(), SuperOp::identity(3));
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = CMatrix::random_unitary(2, &mut rng);
        // tr(yᵀ u x uᴴ) = tr((uᵀ y ū)ᵀ x), so the dual of Ad(u) is Ad(uᵀ) and
        // the dual of Ad(uᴴ) (the inverse element) is Ad(ū).
        let d = SuperOp::unitary_conjugation(&u).unwrap().dual();
        let expected = SuperOp::unitary_conjugation(&u.transpose()).unwrap();
        assert!(d.distance(&expected) < 1e-12);
        let d_inv = SuperOp::unitary_conjugation(&u.adjoint()).unwrap().dual();
        let expected = SuperOp::unitary_conjugation(&u.conj()).unwrap();
        assert!(d_inv.distance(&expected) < 1e-12);
        assert!(SuperOp::pinching(3).dual().distance(&SuperOp::pinching(3)) == 0.0);
    }

    #[test]
    fn dual_pairing_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let phi = random_op(2, 3, &mut rng);
        let dual = phi.dual();
        for _ in 0..5 {
            let x = CMatrix::random_gaussian(2, 2, &mut rng);
            let y = CMatrix::random_gaussian(3, 3, &mut rng);
            let lhs = dual.apply(&y).unwrap().pairing(&x);
            let rhs = y.pairing(&phi.apply(&x).unwrap());
            assert!((lhs - rhs).norm() < 1e-12);
        }
        assert_eq!(dual.dual(), phi);
    }

    #[test]
    fn superop_file_round_trip() {
        use format::{parse_superop, write_superop, Repr};
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let phi = random_op(2, 2, &mut rng);
        for repr in [Repr::Natural, Repr::Choi] {
            let text = write_superop(&phi, repr).unwrap();
            assert_eq!(parse_superop(&text).unwrap(), phi);
        }
        let cp = SuperOp::pinching(2);
        let text = write_superop(&cp, Repr::Kraus).unwrap();
        assert!(parse_superop(&text).unwrap().distance(&cp) < 1e-12);
        let err = parse_superop("superop 2 2 bogus\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
