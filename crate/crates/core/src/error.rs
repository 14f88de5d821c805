use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("unphysical covariance matrix: symplectic eigenvalue {0} is below 1")]
    Unphysical(f64),

    #[error("hypergeometric series diverges at x = {0} (need 0 <= x < 1)")]
    Divergent(f64),

    #[error(
        "{series} did not reach tol {tol:e} within {cap} terms \
         (partial value {partial}, truncation bound {bound:e}); {hint}"
    )]
    TruncationCap {
        series: &'static str,
        tol: f64,
        cap: usize,
        partial: f64,
        bound: f64,
        hint: &'static str,
    },

    #[error(
        "von Neumann series needs s >= {min} (got s = {s}); use the small-squeezing \
         limit (vn_small_s_limit, `limits --regime small`) instead"
    )]
    SmallSqueezing { s: f64, min: f64 },

    #[error("sample {index} failed: {source}")]
    SampleFailed { index: u64, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
