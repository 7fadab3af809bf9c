use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    InvalidParameter { what: &'static str, reason: String },
    #[error("empty scene")]
    EmptyScene,
    #[error("object index {index} out of range for scene with {count} objects")]
    ObjectIndex { index: usize, count: usize },
    #[error("shape has an unbounded member and cannot be baked into a grid")]
    UnboundedShape,
    #[error("opening exceeds gripper limit ({opening} > {max_opening})")]
    OpeningExceedsLimit { opening: f64, max_opening: f64 },
    #[error("no path within penetration cap (final delta_g = {delta_g})")]
    NoPathWithinCap { delta_g: f64 },
    #[error("expected {expected} waypoints, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("refinement diverged")]
    RefinementDiverged,
    #[error("dynamics diverged")]
    DynamicsDiverged,
    #[error("synthesis failed")]
    SynthesisFailed,
    #[error("no collision-free pre-grasp found after {attempts} attempts")]
    NoPregrasp { attempts: usize },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            what,
            reason: reason.into(),
        }
    }
}
