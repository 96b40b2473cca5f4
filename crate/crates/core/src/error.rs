use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {dim}: need at least {min}")]
    InvalidDimension { dim: usize, min: usize },

    #[error("non-finite numeric input: {0}")]
    NonFinite(&'static str),

    #[error("|alpha|^2 = {alpha_sq} exceeds dim/4 for dim = {dim}; need dim >= {min_dim}")]
    Truncation {
        alpha_sq: f64,
        dim: usize,
        min_dim: usize,
    },

    #[error("loop overlap {overlap} below 0.99 at dim = {dim}: truncation corrupts the state")]
    TruncationCorruption { overlap: f64, dim: usize },

    #[error("invalid duration {0}: must be positive")]
    InvalidDuration(f64),

    #[error("K = {k} is not commensurate with the period; nearest valid K = {nearest}")]
    Commensurability { k: f64, nearest: f64 },

    #[error("frequency shift of {modes} modes aliases; at most {max} allowed")]
    Aliasing { modes: i64, max: i64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("path is not closed")]
    NotClosed,

    #[error("degenerate path with {vertices} vertices")]
    DegeneratePath { vertices: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sweep has {points} distinct offsets; need at least 2")]
    InsufficientSweep { points: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("parse: {0}")]
    Parse(String),
}
