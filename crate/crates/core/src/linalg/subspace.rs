use super::decomp::{dotc, jacobi_svd, orthogonalize, sq_norm, svd};
use super::matrix::{CMatrix, C64};

/// Default relative tolerance for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Orthonormal basis of a subspace of `ℂ^ambient_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    basis: Vec<Vec<C64>>,
}

impl SubspaceBasis {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|k| {
                let mut e = vec![C64::new(0.0, 0.0); ambient_dim];
                e[k] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        Self { ambient_dim, basis }
    }

    /// Orthonormalizes the given spanning vectors, dropping those that are
    /// dependent at relative tolerance `tol`.
    pub fn span(ambient_dim: usize, vectors: &[Vec<C64>], tol: f64) -> Self {
        if vectors.is_empty() {
            return Self::zero(ambient_dim);
        }
        let m = CMatrix::from_columns(ambient_dim, vectors);
        range_space(&m, tol)
    }

    pub(crate) fn from_orthonormal(ambient_dim: usize, basis: Vec<Vec<C64>>) -> Self {
        debug_assert!(basis.iter().all(|v| v.len() == ambient_dim));
        Self { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.basis
    }

    /// Basis vectors as columns of an `ambient_dim x dim` matrix.
    pub fn as_matrix(&self) -> CMatrix {
        CMatrix::from_columns(self.ambient_dim, &self.basis)
    }

    /// Largest entry of `|G − I|` where `G` is the Gram matrix.
    pub fn gram_defect(&self) -> f64 {
        let k = self.basis.len();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let g = dotc(&self.basis[i], &self.basis[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.ambient_dim];
        for b in &self.basis {
            let c = dotc(b, v);
            for (o, &bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }

    /// `‖v − proj(v)‖ / ‖v‖`, zero for `v = 0`.
    pub fn distance_ratio(&self, v: &[C64]) -> f64 {
        let n = sq_norm(v).sqrt();
        if n == 0.0 {
            return 0.0;
        }
        let mut r = v.to_vec();
        orthogonalize(&mut r, &self.basis);
        sq_norm(&r).sqrt() / n
    }
}

/// Orthonormal basis of `{v : ‖a v‖ ≤ tol σ_max(a) ‖v‖}` built from right
/// singular vectors; the whole space when `a = 0`.
pub fn null_space(a: &CMatrix, tol: f64) -> SubspaceBasis {
    null_space_scaled(a, tol, 0.0)
}

/// As [`null_space`], with the threshold `tol · max(σ_max(a), scale)`.
/// Use it for differences like `N − I`, whose own size says nothing about
/// what counts as zero: `scale` is the size of the operands.
pub fn null_space_scaled(a: &CMatrix, tol: f64, scale: f64) -> SubspaceBasis {
    let n = a.cols();
    if a.rows() == 0 || a.max_abs() == 0.0 {
        return SubspaceBasis::full(n);
    }
    let js = jacobi_svd(a);
    let smax = js.sigma[0].max(scale);
    let basis = js
        .sigma
        .iter()
        .zip(js.v)
        .filter(|(&s, _)| s <= tol * smax)
        .map(|(_, v)| v)
        .collect();
    SubspaceBasis::from_orthonormal(n, basis)
}

/// Orthonormal basis of the column space, keeping singular values above
/// `tol σ_max`.
pub fn range_space(a: &CMatrix, tol: f64) -> SubspaceBasis {
    range_space_scaled(a, tol, 0.0)
}

/// As [`range_space`], with the threshold `tol · max(σ_max(a), scale)`.
pub fn range_space_scaled(a: &CMatrix, tol: f64, scale: f64) -> SubspaceBasis {
    let m = a.rows();
    if a.cols() == 0 || a.max_abs() == 0.0 {
        return SubspaceBasis::zero(m);
    }
    let s = svd(a);
    let smax = s.max_singular().max(scale);
    let basis = s
        .sigma
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > tol * smax)
        .map(|(j, _)| s.u.column(j))
        .collect();
    SubspaceBasis::from_orthonormal(m, basis)
}

/// Numerical rank at relative tolerance `tol`.
pub fn rank(a: &CMatrix, tol: f64) -> usize {
    range_space(a, tol).dim()
}

/// Largest principal angle between two subspaces of equal dimension.
///
/// Uses the sine route (`‖(I − Q_a Q_aᴴ) Q_b‖`) for small angles, where the
/// cosine route loses half the significant digits.
pub fn max_principal_angle(a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    if a.dim() == 0 {
        return 0.0;
    }
    let qa = a.as_matrix();
    let qb = b.as_matrix();
    let cross = &qa.adjoint() * &qb;
    let sig = svd(&cross).sigma;
    let cos_min = sig.last().copied().unwrap_or(0.0).min(1.0);
    if cos_min < std::f64::consts::FRAC_1_SQRT_2 {
        return cos_min.acos();
    }
    let resid = &qb - &(&qa * &cross);
    let sin_max = svd(&resid).max_singular().min(1.0);
    sin_max.asin()
}
