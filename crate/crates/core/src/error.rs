use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {0} out of range 1..=4")]
    IndexOutOfRange(usize),
    #[error("form degree {0} exceeds 4")]
    DegreeTooHigh(usize),
    #[error("repeated index {0} in exterior monomial")]
    RepeatedIndex(usize),
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("matrix is singular or has negative determinant")]
    Singular,
    #[error("endomorphism has nonzero trace {0:e}")]
    NonzeroTrace(f64),
    #[error("endomorphism is not hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("grid size {0} must be even and at least 4")]
    BadGrid(usize),
    #[error("path leaves the positive definite cone at t = {0}")]
    LeftSpdCone(f64),
    #[error("configuration is reducible (spinor vanishes identically)")]
    Reducible,
    #[error("configuration is not a monopole (relative residual {0:e})")]
    NotMonopole(f64),
    #[error("invalid Dolbeault degree transition from {0}")]
    InvalidDegree(usize),
    #[error("not a complex structure: {0}")]
    InvalidComplexStructure(String),
    #[error("2-form is not of type (1,1) (defect {0:e})")]
    NotType11(f64),
    #[error("no clear spectral gap (ratio {0:e})")]
    Indeterminate(f64),
    #[error("dense assembly needs {0} entries, above the limit {1}")]
    TooLarge(usize, usize),
    #[error("field file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
