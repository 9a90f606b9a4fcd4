//! Dense complex linear algebra.

pub mod decomp;
pub mod matrix;
pub mod subspace;
pub mod text;

pub use decomp::{
    cholesky, condition_number, expm, herm_eig, hpd_inverse, inverse, op_norm, qr, sqrt_psd, svd,
    trace_norm, HermEig, Lu, Svd,
};
pub use matrix::{pauli, CMatrix, C64};
pub use subspace::{
    max_principal_angle, null_space, null_space_scaled, range_space, range_space_scaled, rank, SubspaceBasis,
    DEFAULT_RANK_TOL,
};
pub use text::{format_matrix, parse_matrix};
