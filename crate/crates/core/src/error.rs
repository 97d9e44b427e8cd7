use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// An azimuth angle fell outside the open interval where the cosine
    /// gain model is defined (the target sits behind or in the surface plane).
    #[error("infeasible geometry: {which} = {angle_rad} rad is outside (-pi/2, pi/2)")]
    DegenerateGeometry { which: &'static str, angle_rad: f64 },

    #[error("phase undefined: entry {index} of the eigenvector is zero")]
    UndefinedPhase { index: usize },

    #[error("effective channel phi^H H is zero; MRT precoder undefined")]
    ZeroEffectiveChannel,

    #[error("fading vector is identically zero")]
    ZeroFading,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("infeasible within cap: no feasible element count in (0, {cap}]")]
    InfeasibleWithinCap { cap: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
