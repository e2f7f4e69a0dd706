use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("product degree {degree} exceeds the degree cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },
    #[error("field is not real-valued (conjugate-symmetry defect {defect:e})")]
    NotReal { defect: f64 },
    #[error("Neumann data has nonzero mean {mean:e}")]
    NeumannIncompatible { mean: f64 },
    #[error("field is not a harmonic gradient (stray coefficient {residual:e})")]
    NotHarmonicGradient { residual: f64 },
    #[error("power {power} is undefined on the zero-eigenvalue mode")]
    SingularPower { power: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

pub type Result<V> = std::result::Result<V, Error>;

pub(crate) fn invalid<V>(msg: impl Into<String>) -> Result<V> {
    Err(Error::InvalidParameter(msg.into()))
}
