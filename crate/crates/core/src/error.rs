use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested operation only exists when `2·N·c1` is an integer.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("empty channel: no pilot response above threshold {threshold}")]
    EmptyChannel { threshold: f64 },

    #[error(
        "insufficient spectral resolution: expected shift {expected} is below one bin \
         ({bin} frame bins); use fft_len >= {required_fft_len}"
    )]
    Resolution {
        expected: f64,
        bin: f64,
        required_fft_len: usize,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
