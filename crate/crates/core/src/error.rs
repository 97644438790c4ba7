use thiserror::Error;

pub type Result<T> = std::result::Result<T, ZenoError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZenoError {
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("register labels do not match: {0}")]
    LabelMismatch(String),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("expectation value has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("variance is negative ({0:.3e}) beyond tolerance")]
    NegativeVariance(f64),

    #[error("{qubits} qubits exceeds the dense cap of {cap}")]
    DenseCapExceeded { qubits: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("survival probability {0:.3e} is too small to condition on")]
    VanishingSurvival(f64),

    #[error("generator residue {0:.3e} indicates U(0) != I")]
    GeneratorResidue(f64),

    #[error("trigonometric denominator {0:.3e} is too close to a pole")]
    PoleProximity(f64),

    #[error("finite-difference step did not converge (relative change {0:.3e})")]
    StepNotConverged(f64),

    #[error("eigendecomposition inaccurate (reconstruction residual {0:.3e})")]
    EigenNotConverged(f64),
}
