//! Executable checks of the isometry, orthonormality, Parseval, band-limited,
//! kernel and intertwining identities, each producing a [`Report`].

pub mod bandlimited;
pub mod discrete;
pub mod gram;
pub mod intertwine;
pub mod isometry;
pub mod kernel;
pub mod parseval;
pub mod report;
pub mod testfns;

pub use report::{par_map, try_par_map, workers, Defect, Report, REPORT_SCHEMA_VERSION};
