pub mod biphasic;
pub mod contour;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod initial;
pub mod mch;
pub mod nmnch;
pub mod physics;
pub mod scheme;
pub mod solver;
pub mod spectral;
mod splitting;
pub mod wetting;

pub use error::{Error, Result};
pub use grid::{Grid, Spectrum};
pub use mch::MchSolver;
pub use nmnch::NmnchSolver;
pub use physics::Model;
pub use scheme::{PhaseSystem, SchemeParams, Stepper};
pub use solver::Solver;
pub use spectral::SpectralField;
pub use splitting::{HalfStep, DEFECT_MEAN_TOLERANCE};
