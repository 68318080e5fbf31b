use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: String, found: String },

    #[error("matrix has odd dimension ({rows}x{cols}); the complex map needs even shapes")]
    OddDimension { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("matrix is defective or nearly so (eigenvector condition {condition:.3e})")]
    DefectiveMatrix { condition: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not real symmetric (deviation {deviation:.3e})")]
    NotSymmetric { deviation: f64 },

    #[error("conjugate extension is inconsistent (residue {residue:.3e})")]
    InconsistentConjugate { residue: f64 },

    #[error("model evaluation failed: {0}")]
    EvaluationFailure(String),

    #[error("mixing weight {0} outside (0, 1)")]
    BadMixingWeight(f64),

    #[error("Bloch vector norm {0} is not below 1")]
    BlochOverflow(f64),

    #[error("state is rank deficient (minimum eigenvalue {min_eigenvalue:.3e}); use the pure-state path")]
    RankDeficient { min_eigenvalue: f64 },

    #[error("Fisher information matrix is singular (determinant {determinant:.3e}); no Cramér-Rao bound exists")]
    SingularSqfim { determinant: f64 },

    #[error("block {block} is singular")]
    SingularBlock { block: &'static str },

    #[error("encoding is not invertible (determinant {determinant:.3e})")]
    NonInvertibleEncoding { determinant: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
