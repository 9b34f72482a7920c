use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error(
        "precision insufficient at N={n}, z2={z2}, sigma2={sigma2} with {bits} bits (relative error bound {bound:e})"
    )]
    PrecisionInsufficient {
        n: usize,
        z2: String,
        sigma2: String,
        bits: usize,
        bound: f64,
    },
}

impl Error {
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::PrecisionInsufficient { .. } | Error::Pole(_) | Error::DivisionByZero(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
