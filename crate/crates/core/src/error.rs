use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index out of range: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("quantum Fisher matrix is singular: F_Q[{param},{param}] vanishes")]
    SingularQfi { param: &'static str },

    #[error("quantum Fisher matrix is singular: determinant vanishes")]
    DegenerateQfi,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid state specification `{0}`: expected ghb:<n>,<N-n> | hb:<N> | noon:<N>")]
    StateSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
