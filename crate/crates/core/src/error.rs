use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("every phase mobility is zero, the multiplier operator is not invertible")]
    AllMobilitiesZero,
    #[error("partition defect has mean {mean:e}, mass conservation broke upstream")]
    UnbalancedDefect { mean: f64 },
    #[error("tension triple violates the triangle inequality ({0})")]
    TriangleInequalityViolated(String),
    #[error("no wetting equilibrium: |cos theta| = {cos:.4} exceeds 1")]
    NoWettingEquilibrium { cos: f64 },
    #[error("solid support leaves no room for the liquid: {0}")]
    GeometryTooLarge(String),
    #[error("no contact line found between liquid and support")]
    NoContactLine,
    #[error("level set is empty")]
    EmptyLevelSet,
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("shapes of phases {0} and {1} overlap")]
    OverlappingShapes(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("divergence detected at step {step}: {reason}")]
    DivergenceDetected { step: u64, reason: String },
}
