//! Dense decompositions: cyclic Jacobi for Hermitian eigenproblems, one-sided
//! Jacobi (Hestenes) for the SVD, plus Cholesky, LU and the matrix exponential.
//!
//! Jacobi methods are slower than Householder-based reductions but they are
//! simple, deterministic and deliver small singular values to high relative
//! accuracy, which the rank decisions downstream depend on.

use super::matrix::{CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the corresponding eigenvectors.
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) Vᴴ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = CMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let fl = f(lambda);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Hermitian eigen-decomposition by cyclic complex Jacobi rotations.
///
/// Rejects inputs with `‖a − aᴴ‖ > 1e-12 ‖a‖`.
pub fn herm_eig(a: &CMatrix) -> Result<HermEig> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "eigenproblem needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let scale = a.frobenius_norm();
    let residual = a.hermitian_residual();
    if residual > 1e-12 * scale.max(f64::MIN_POSITIVE) && residual > 0.0 {
        return Err(Error::NotHermitian { residual });
    }
    Ok(herm_eig_unchecked(&a.hermitian_part(), n))
}

/// Jacobi eigensolver without the Hermiticity check; the input is assumed to
/// have been symmetrized already.
pub(crate) fn herm_eig_unchecked(a: &CMatrix, n: usize) -> HermEig {
    let mut m = a.clone();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();
    if n > 1 && scale > 0.0 {
        let tiny = scale * 1e-18;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = m[(p, q)];
                    let r = apq.norm();
                    if r <= tiny {
                        continue;
                    }
                    let app = m[(p, p)].re;
                    let aqq = m[(q, q)].re;
                    // Skip rotations that cannot change the diagonal in floating point.
                    if r <= f64::EPSILON * 1e-2 * (app.abs() + aqq.abs()) {
                        continue;
                    }
                    rotated = true;
                    let phase = apq / r;
                    let zeta = (aqq - app) / (2.0 * r);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                    let g11 = C64::new(c, 0.0);
                    let g12 = C64::new(s, 0.0);
                    let g21 = -phase.conj() * s;
                    let g22 = phase.conj() * c;
                    // columns: M <- M G
                    for i in 0..n {
                        let mp = m[(i, p)];
                        let mq = m[(i, q)];
                        m[(i, p)] = mp * g11 + mq * g21;
                        m[(i, q)] = mp * g12 + mq * g22;
                        let vp = v[(i, p)];
                        let vq = v[(i, q)];
                        v[(i, p)] = vp * g11 + vq * g21;
                        v[(i, q)] = vp * g12 + vq * g22;
                    }
                    // rows: M <- Gᴴ M
                    for j in 0..n {
                        let mp = m[(p, j)];
                        let mq = m[(q, j)];
                        m[(p, j)] = g11.conj() * mp + g21.conj() * mq;
                        m[(q, j)] = g12.conj() * mp + g22.conj() * mq;
                    }
                    m[(p, q)] = ZERO;
                    m[(q, p)] = ZERO;
                    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                }
            }
            if !rotated {
                break;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    HermEig { values, vectors }
}

/// Thin singular value decomposition `a = U diag(σ) Vᴴ` with
/// `p = min(rows, cols)` singular triplets, σ nonincreasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn max_singular(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            for i in 0..us.rows() {
                us[(i, j)] *= s;
            }
        }
        &us * &self.v.adjoint()
    }
}

/// Full right-singular-vector basis from one-sided Jacobi: `a V = W` with
/// `W` having mutually orthogonal columns. Columns sorted by decreasing norm.
pub(crate) struct JacobiSvd {
    /// Columns of `a V`, length `rows` each.
    pub w: Vec<Vec<C64>>,
    /// Column norms of `w`, nonincreasing; length `cols`.
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns, length `cols` each (`cols` of them).
    pub v: Vec<Vec<C64>>,
}

pub(crate) fn jacobi_svd(a: &CMatrix) -> JacobiSvd {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            e
        })
        .collect();
    let mut norms: Vec<f64> = w.iter().map(|c| sq_norm(c)).collect();
    let tol = 1e-15;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dotc(&w[p], &w[q]);
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ph = phase.conj();
                for i in 0..m {
                    let xp = w[p][i];
                    let xq = w[q][i] * ph;
                    w[p][i] = xp * c - xq * s;
                    w[q][i] = xp * s + xq * c;
                }
                for i in 0..n {
                    let xp = v[p][i];
                    let xq = v[q][i] * ph;
                    v[p][i] = xp * c - xq * s;
                    v[q][i] = xp * s + xq * c;
                }
                norms[p] = sq_norm(&w[p]);
                norms[q] = sq_norm(&w[q]);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma_unsorted: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        sigma_unsorted[j]
            .total_cmp(&sigma_unsorted[i])
            .then(i.cmp(&j))
    });
    JacobiSvd {
        w: order.iter().map(|&k| w[k].clone()).collect(),
        sigma: order.iter().map(|&k| sigma_unsorted[k]).collect(),
        v: order.iter().map(|&k| v[k].clone()).collect(),
    }
}

/// Singular value decomposition by one-sided Jacobi rotations.
pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        // Work on the adjoint so the Jacobi sweep runs over the shorter side.
        let t = svd(&a.adjoint());
        return Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let js = jacobi_svd(a);
    let p = n;
    let smax = js.sigma.first().copied().unwrap_or(0.0);
    let thresh = smax * (m.max(1) as f64) * f64::EPSILON;
    let mut ucols: Vec<Vec<C64>> = Vec::with_capacity(p);
    for j in 0..p {
        let s = js.sigma[j];
        let mut cand: Vec<C64> = if s > thresh && s > 0.0 {
            js.w[j].iter().map(|&z| z / s).collect()
        } else {
            Vec::new()
        };
        let mut accepted = false;
        if !cand.is_empty() {
            orthogonalize(&mut cand, &ucols);
            let nrm = sq_norm(&cand).sqrt();
            if nrm > 0.5 {
                cand.iter_mut().for_each(|z| *z /= nrm);
                accepted = true;
            }
        }
        if !accepted {
            // the unit vector with the largest residual; those residuals
            // square-sum to m − k ≥ 1, so the best is at least 1/√m
            let mut best = (0.0f64, Vec::new());
            for i in 0..m {
                let mut e = vec![ZERO; m];
                e[i] = ONE;
                orthogonalize(&mut e, &ucols);
                let nrm = sq_norm(&e).sqrt();
                if nrm > best.0 {
                    best = (nrm, e);
                }
            }
            assert!(best.0 > 0.0, "failed to complete orthonormal basis");
            cand = best.1;
            orthogonalize(&mut cand, &ucols);
            let nrm = sq_norm(&cand).sqrt();
            cand.iter_mut().for_each(|z| *z /= nrm);
        }
        ucols.push(cand);
    }
    Svd {
        u: CMatrix::from_columns(m, &ucols),
        sigma: js.sigma[..p].to_vec(),
        v: CMatrix::from_columns(n, &js.v[..p]),
    }
}

/// Largest singular value; 0 for the zero matrix.
pub fn op_norm(a: &CMatrix) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    Ok(svd(a).max_singular())
}

/// Trace norm (sum of singular values).
pub fn trace_norm(a: &CMatrix) -> f64 {
    svd(a).sigma.iter().sum()
}

/// Thin QR by twice-iterated modified Gram–Schmidt; `R` has a real
/// nonnegative diagonal.
pub fn qr(a: &CMatrix) -> (CMatrix, CMatrix) {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut qcols: Vec<Vec<C64>> = Vec::with_capacity(k);
    let mut r = CMatrix::zeros(k, n);
    for j in 0..n {
        let mut col = a.column(j);
        for _ in 0..2 {
            for (i, q) in qcols.iter().enumerate() {
                let c = dotc(q, &col);
                r[(i, j)] += c;
                axpy(&mut col, -c, q);
            }
        }
        if qcols.len() < k {
            let nrm = sq_norm(&col).sqrt();
            r[(qcols.len(), j)] = C64::new(nrm, 0.0);
            if nrm > 0.0 {
                col.iter_mut().for_each(|z| *z /= nrm);
            } else {
                col = vec![ZERO; m];
                col[qcols.len()] = ONE;
                orthogonalize(&mut col, &qcols);
                let n2 = sq_norm(&col).sqrt();
                col.iter_mut().for_each(|z| *z /= n2);
            }
            qcols.push(col);
        }
    }
    (CMatrix::from_columns(m, &qcols), r)
}

/// Lower-triangular Cholesky factor `L` with `a = L Lᴴ`.
pub fn cholesky(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Shape("Cholesky needs a square matrix".into()));
    }
    let n = a.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_triangular_inverse(l: &CMatrix) -> CMatrix {
    let n = l.rows();
    let mut inv = CMatrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = ONE / l[(j, j)];
        for i in j + 1..n {
            let mut s = ZERO;
            for k in j..i {
                s += l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / l[(i, i)];
        }
    }
    inv
}

/// Inverse of a Hermitian positive definite matrix through its Cholesky factor.
pub fn hpd_inverse(a: &CMatrix) -> Result<CMatrix> {
    let l = cholesky(a)?;
    let li = lower_triangular_inverse(&l);
    Ok(&li.adjoint() * &li)
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape("LU needs a square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= scale * 1e-300 || pmax == 0.0 {
                return Err(Error::Singular);
            }
            if piv != k {
                perm.swap(piv, k);
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= f * t;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.rows();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let t = x[k];
                x[i] -= self.lu[(i, k)] * t;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = x[k];
                x[i] -= self.lu[(i, k)] * t;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        let cols: Vec<Vec<C64>> = (0..b.cols()).map(|j| self.solve_vec(&b.column(j))).collect();
        CMatrix::from_columns(b.rows(), &cols)
    }

    pub fn inverse(&self) -> CMatrix {
        self.solve(&CMatrix::identity(self.lu.rows()))
    }
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    Ok(Lu::new(a)?.inverse())
}

/// Condition number `σ_max / σ_min` in the spectral norm.
pub fn condition_number(a: &CMatrix) -> f64 {
    let s = svd(a);
    let min = s.sigma.last().copied().unwrap_or(0.0);
    if min == 0.0 {
        f64::INFINITY
    } else {
        s.max_singular() / min
    }
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.rows();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm1 > 0.25 {
        squarings = (norm1 / 0.25).log2().ceil() as u32;
    }
    let b = a.scale_real(0.5f64.powi(squarings as i32));
    let mut result = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=24 {
        term = (&term * &b).scale_real(1.0 / k as f64);
        result = &result + &term;
        if term.max_abs() < 1e-20 * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Principal square root of a Hermitian PSD matrix.
pub fn sqrt_psd(a: &CMatrix) -> Result<CMatrix> {
    let e = herm_eig(a)?;
    Ok(e.map(|x| x.max(0.0).sqrt()))
}

pub(crate) fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

pub(crate) fn sq_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Two passes of modified Gram–Schmidt against an orthonormal set.
pub(crate) fn orthogonalize(v: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dotc(q, v);
            axpy(v, -c, q);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unitarity_defect(u: &CMatrix) -> f64 {
        let k = u.cols();
        (&(&u.adjoint() * u) - &CMatrix::identity(k)).max_abs()
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&CMatrix::identity(3)).unwrap() - 1.0).abs() < 1e-14);
        assert!((op_norm(&CMatrix::diag_real(&[1.0, 2.0])).unwrap() - 2.0).abs() < 1e-14);
        let nil = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!((op_norm(&nil).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(op_norm(&CMatrix::zeros(2, 3)).unwrap(), 0.0);
        assert_eq!(op_norm(&CMatrix::zeros(0, 0)), Err(Error::EmptyMatrix));
    }

    #[test]
    fn herm_eig_examples() {
        let e = herm_eig(&CMatrix::diag_real(&[3.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 3.0]);
        let e = herm_eig(&pauli::x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let e = herm_eig(&CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0]);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let a = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(herm_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn herm_eig_reconstructs_random_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[1usize, 5, 17, 64] {
            let a = CMatrix::random_hermitian(n, &mut rng);
            let e = herm_eig(&a).unwrap();
            let rec = e.map(|x| x);
            let scale = op_norm(&a).unwrap();
            assert!((&rec - &a).frobenius_norm() <= 1e-10 * scale, "n = {n}");
            assert!(unitarity_defect(&e.vectors) <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn svd_examples() {
        let s = svd(&CMatrix::identity(2));
        assert_eq!(s.sigma, vec![1.0, 1.0]);
        let a = CMatrix::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        let s = svd(&a);
        assert!((s.sigma[0] - 2.0).abs() < 1e-15 && s.sigma[1].abs() < 1e-15);
        assert!((&s.reconstruct() - &a).max_abs() < 1e-14);

        let x = CMatrix::from_real(3, 1, &[0.6, 0.8, 0.0]);
        let y = CMatrix::from_real(3, 1, &[0.0, 0.0, 1.0]);
        let s = svd(&(&x * &y.adjoint()));
        assert!((s.sigma[0] - 1.0).abs() < 1e-14);
        assert!(s.sigma[1..].iter().all(|&v| v.abs() < 1e-14));
    }

    #[test]
    fn svd_rectangular_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(m, n) in &[(7usize, 3usize), (3, 7), (9, 9), (1, 4)] {
            let a = CMatrix::random_gaussian(m, n, &mut rng);
            let s = svd(&a);
            let scale = s.max_singular();
            assert!((&s.reconstruct() - &a).max_abs() <= 1e-10 * scale);
            assert!(unitarity_defect(&s.u) < 1e-12 && unitarity_defect(&s.v) < 1e-12);
            assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_rank_deficient_has_orthonormal_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = CMatrix::random_gaussian(6, 2, &mut rng);
        let a = &b * &b.adjoint();
        let s = svd(&a);
        assert!(unitarity_defect(&s.u) < 1e-12);
        assert!(s.sigma[2..].iter().all(|&x| x < 1e-13 * s.sigma[0]));
    }

    #[test]
    fn cholesky_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = CMatrix::random_gaussian(5, 5, &mut rng);
        let a = &(&g * &g.adjoint()) + &CMatrix::identity(5);
        let l = cholesky(&a).unwrap();
        assert!((&(&l * &l.adjoint()) - &a).max_abs() < 1e-12);
        let inv = hpd_inverse(&a).unwrap();
        assert!((&(&inv * &a) - &CMatrix::identity(5)).max_abs() < 1e-12);
        let inv2 = inverse(&g).unwrap();
        assert!((&(&inv2 * &g) - &CMatrix::identity(5)).max_abs() < 1e-10);
        assert!(cholesky(&CMatrix::diag_real(&[1.0, -1.0])).is_err());
        assert_eq!(inverse(&CMatrix::zeros(2, 2)).unwrap_err(), Error::Singular);
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(t [[0, -1], [1, 0]]) is the rotation by t.
        let t = 0.7f64;
        let g = CMatrix::from_real(2, 2, &[0.0, -t, t, 0.0]);
        let r = expm(&g);
        let expected = CMatrix::from_real(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!((&r - &expected).max_abs() < 1e-14);
        let big = CMatrix::diag_real(&[5.0, -3.0]);
        let e = expm(&big);
        assert!((e[(0, 0)].re - 5f64.exp()).abs() < 1e-10 * 5f64.exp());
        assert!((e[(1, 1)].re - (-3f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn qr_random_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = CMatrix::random_unitary(6, &mut rng);
        assert!(unitarity_defect(&u) < 1e-13);
    }

    #[test]
    fn svd_completes_basis_for_low_rank_tall_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(76);
        let x = CMatrix::random_gaussian(16, 1, &mut rng);
        let a = &x * &x.adjoint();
        let s = svd(&a);
        let gram = &s.u.adjoint() * &s.u;
        assert!((&gram - &CMatrix::identity(16)).max_abs() < 1e-12);
        assert!((&s.reconstruct() - &a).max_abs() < 1e-12 * a.max_abs());
    }

}
