use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty matrix")]
    EmptyMatrix,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("singular matrix")]
    Singular,

    #[error("matrix not positive definite")]
    NotPositiveDefinite,

    #[error("Choi not PSD (min eigenvalue {min_eigenvalue:.3e})")]
    ChoiNotPsd { min_eigenvalue: f64 },

    #[error("not completely positive (min Choi eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("not completely contractive (cb norm {cb_norm:.6})")]
    NotCompletelyContractive { cb_norm: f64 },

    #[error("SDP solver did not converge after {iterations} iterations (gap {gap:.3e}, primal infeasibility {primal_infeasibility:.3e}, dual infeasibility {dual_infeasibility:.3e})")]
    SolverFailed {
        iterations: usize,
        gap: f64,
        primal_infeasibility: f64,
        dual_infeasibility: f64,
    },

    #[error("invalid semigroup: {0}")]
    InvalidSemigroup(String),

    #[error("representation is not a homomorphism at pair ({left}, {right}), residual {residual:.3e}")]
    NotHomomorphism {
        left: usize,
        right: usize,
        residual: f64,
    },

    #[error("generators {left} and {right} do not commute (residual {residual:.3e})")]
    NotCommuting {
        left: usize,
        right: usize,
        residual: f64,
    },

    #[error("representation value of element {element} is not safely invertible (condition number {condition:.3e})")]
    NotInvertible { element: usize, condition: f64 },

    #[error("ill-conditioned matrix (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("insufficient quadrature: {nodes} nodes, at least {required} required")]
    InsufficientQuadrature { nodes: usize, required: usize },

    #[error("not power-bounded up to horizon {horizon} (generator {generator}, growth {growth:.3e})")]
    NotPowerBounded {
        generator: usize,
        horizon: usize,
        growth: f64,
    },

    #[error("eigenvalue 1 of generator {generator} is defective (fixed space dim {fixed_dim}, range dim {range_dim}, ambient {ambient}); Cesàro means diverge")]
    DefectiveEigenvalue {
        generator: usize,
        fixed_dim: usize,
        range_dim: usize,
        ambient: usize,
    },

    #[error("contraction required: generator norm {norm:.6} exceeds 1")]
    NotContraction { norm: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// True for errors caused by the input violating a precondition, as
    /// opposed to a numerical failure inside a computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::SolverFailed { .. } | Error::IllConditioned { .. } | Error::Singular
        )
    }
}
