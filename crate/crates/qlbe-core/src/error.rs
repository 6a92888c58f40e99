use alloc::string::String;

/// Errors raised by the kernel library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("quadrature did not converge (residual {residual:.3e})")]
    Quadrature { residual: f64 },
    #[error("series did not converge after {terms} terms")]
    Series { terms: usize },
    #[error("model `{0}` carries no scattering phase; only |f|^2 is defined")]
    PhaseFree(&'static str),
    #[error("rejection sampler stalled after {0} proposals")]
    SamplerStall(u64),
    #[error("fit needs at least 4 usable points, got {0}")]
    TooFewPoints(usize),
    #[error("expected a two-component superposition, got {0} components")]
    NotTwoComponent(usize),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: &str) -> Error {
    Error::InvalidParameter {
        name,
        reason: String::from(reason),
    }
}
