use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("adjacent eigenvalue gap {gap:e} below degeneracy tolerance {tolerance:e}")]
    DegeneracyEncountered { gap: f64, tolerance: f64 },

    #[error("reduced density matrix eigenvalue gap {gap:e} below tolerance {tolerance:e}")]
    ReducedDegeneracy { gap: f64, tolerance: f64 },

    #[error("overlap modulus {modulus:e} at loop step {step} is too small; loop under-sampled")]
    NullOverlap { step: usize, modulus: f64 },

    #[error("gauge-fixed amplitudes retain imaginary part {residual:e}")]
    RealityViolation { residual: f64 },

    #[error("continuity lost at loop step {step}: overlap {overlap:.6} with previous frame")]
    ContinuityLost { step: usize, overlap: f64 },

    #[error("reduced eigenvalue drifted by {drift:e} along the loop")]
    PopulationDrift { drift: f64 },

    #[error("loop needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("level {0} out of range 1..=4")]
    InvalidLevel(usize),

    #[error("state vectors have mismatched dimensions ({expected} vs {got})")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state {index} has norm {norm} (expected 1)")]
    NotNormalized { index: usize, norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short stable identifier, suitable for a CSV column.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::DegeneracyEncountered { .. } => "degeneracy",
            Error::ReducedDegeneracy { .. } => "reduced-degeneracy",
            Error::NullOverlap { .. } => "null-overlap",
            Error::RealityViolation { .. } => "reality-violation",
            Error::ContinuityLost { .. } => "continuity-lost",
            Error::PopulationDrift { .. } => "population-drift",
            Error::TooFewSamples { .. } => "too-few-samples",
            Error::InvalidLevel(_) => "invalid-level",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NotNormalized { .. } => "not-normalized",
            Error::InvalidParams(_) => "invalid-params",
        }
    }
}
