use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: &'static str },

    #[error("window exhausted: a window of length 1 cannot be advanced")]
    WindowExhausted,

    #[error("enumeration of {requested} bonds exceeds the configured cap of {cap}")]
    Resource { requested: usize, cap: usize },

    #[error("numeric failure: {0}")]
    Numeric(&'static str),

    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("series divergent: spectral radius {lambda} is not below 1")]
    SeriesDivergent { lambda: f64 },
}
