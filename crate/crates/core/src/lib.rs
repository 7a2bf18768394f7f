pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod mittag_leffler;
pub mod operators;
pub mod parameter_choice;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{RealField, SpectralField};
pub use grid::{make_grid, GridSpec};
