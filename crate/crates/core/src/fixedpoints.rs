//! Fixed-point subspaces and commutants, computed directly from kernels and
//! independent of the averaging engine.

use crate::actions::{Assignment, SemigroupAction};
use crate::linalg::{max_principal_angle, null_space_scaled, op_norm, CMatrix, SubspaceBasis, C64, DEFAULT_RANK_TOL};
use crate::superop::SuperOp;

/// A subspace of `M_d`, stored as column-stacked vectors in `ℂ^{d²}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSubspace {
    pub basis: SubspaceBasis,
    /// What was intersected, for reports.
    pub source: String,
}

impl FixedSubspace {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Side length `d` of the matrices.
    pub fn matrix_dim(&self) -> usize {
        (self.basis.ambient_dim() as f64).sqrt().round() as usize
    }

    /// Basis elements as `d x d` matrices.
    pub fn matrices(&self) -> Vec<CMatrix> {
        let d = self.matrix_dim();
        self.basis.vectors().iter().map(|v| CMatrix::unvec(v, d, d)).collect()
    }

    /// `max_{b, op} ‖op(b) − b‖` over basis elements.
    pub fn max_residual(&self, ops: &[SuperOp]) -> f64 {
        let mut worst = 0.0f64;
        for b in self.matrices() {
            for op in ops {
                let r = &op.apply(&b).expect("shape") - &b;
                worst = worst.max(r.frobenius_norm());
            }
        }
        worst
    }
}

/// `∩_g ker(N_g − I)` via one SVD of the stacked matrix.
pub fn common_fixed_space(d: usize, ops: &[SuperOp], tol: f64) -> SubspaceBasis {
    let n = d * d;
    if ops.is_empty() {
        return SubspaceBasis::full(n);
    }
    let mut stacked = CMatrix::zeros(n * ops.len(), n);
    // `N_g − I` may be pure roundoff; measure it against `‖N_g‖ ≥ 1`-sized
    // operands, not against itself
    let scale = ops.iter().map(|op| op.natural_norm()).fold(1.0, f64::max);
    for (k, op) in ops.iter().enumerate() {
        let mut m = op.natural().clone();
        for i in 0..n {
            m[(i, i)] -= C64::new(1.0, 0.0);
        }
        stacked.set_block(k * n, 0, &m);
    }
    null_space_scaled(&stacked, tol, scale)
}

/// `X^S = {x : α_s(x) = x ∀ s}`. Circle actions use the exact pattern of
/// entries with `w_i = w_j`; other kinds intersect the kernels of
/// `α_g − id` over generators.
pub fn fixed_subspace(a: &SemigroupAction) -> FixedSubspace {
    match a.assignment() {
        Assignment::Circle(w) => {
            let d = w.len();
            let vectors: Vec<Vec<C64>> = (0..d * d)
                .filter(|&v| w[v % d] == w[v / d])
                .map(|v| {
                    let mut e = vec![C64::new(0.0, 0.0); d * d];
                    e[v] = C64::new(1.0, 0.0);
                    e
                })
                .collect();
            FixedSubspace {
                basis: SubspaceBasis::span(d * d, &vectors, DEFAULT_RANK_TOL),
                source: "circle frequency-zero entries".into(),
            }
        }
        _ => {
            let ops = a.generator_ops();
            FixedSubspace {
                basis: common_fixed_space(a.dim(), &ops, DEFAULT_RANK_TOL),
                source: format!("kernel of {} stacked generator maps", ops.len()),
            }
        }
    }
}

/// `{x : Φ(x) = x}` for a single map.
pub fn fixed_points_of_map(phi: &SuperOp) -> FixedSubspace {
    FixedSubspace {
        basis: common_fixed_space(phi.in_dim(), std::slice::from_ref(phi), DEFAULT_RANK_TOL),
        source: "kernel of Φ − id".into(),
    }
}

/// `{x : x m = m x ∀ m}` from the stacked equations
/// `(mᵀ ⊗ I − I ⊗ m) vec(x) = 0`.
pub fn commutant(mats: &[CMatrix]) -> FixedSubspace {
    let d = mats.first().map(|m| m.rows()).unwrap_or(0);
    assert!(
        mats.iter().all(|m| m.shape() == (d, d)),
        "commutant needs square matrices of one size"
    );
    let n = d * d;
    let id = CMatrix::identity(d);
    let mut stacked = CMatrix::zeros(n * mats.len().max(1), n);
    let scale = mats.iter().map(|m| op_norm(m).unwrap_or(0.0)).fold(0.0, f64::max);
    for (k, m) in mats.iter().enumerate() {
        let eq = &m.transpose().kron(&id) - &id.kron(m);
        stacked.set_block(k * n, 0, &eq);
    }
    FixedSubspace {
        basis: null_space_scaled(&stacked, DEFAULT_RANK_TOL, scale),
        source: format!("commutant of {} matrices", mats.len()),
    }
}

/// Result of comparing two subspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceMatch {
    /// Largest principal angle in radians; `π/2` when dimensions differ.
    pub angle: f64,
    pub dim_mismatch: bool,
}

pub fn subspace_match(a: &SubspaceBasis, b: &SubspaceBasis) -> SubspaceMatch {
    assert_eq!(a.ambient_dim(), b.ambient_dim(), "subspaces of different spaces");
    if a.dim() != b.dim() {
        return SubspaceMatch {
            angle: std::f64::consts::FRAC_PI_2,
            dim_mismatch: true,
        };
    }
    SubspaceMatch {
        angle: max_principal_angle(a, b),
        dim_mismatch: false,
    }
}
