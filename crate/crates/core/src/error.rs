use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error("sample time {t} s is not after the previous sample at {t_last} s")]
    NonMonotonicTime { t: f64, t_last: f64 },
    #[error("matrix is near-singular (det = {det:e})")]
    NearSingular { det: f64 },
    #[error("matrix is not orthonormal (||C^T C - I|| = {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("pitch {pitch} rad is too close to +-90 degrees")]
    GimbalProximity { pitch: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl AlignError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidParameter { name, reason: reason.into() }
    }
}
