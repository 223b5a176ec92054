//! Manufactured solutions, error norms, convergence studies, table replication and exports.

pub mod cases;
pub mod checks;
pub mod export;
pub mod norms;
pub mod study;
pub mod tables;

pub use cases::{CaseKind, ManufacturedCase};
pub use export::{export_field, parse_coefficients, sample_field, write_coefficients, FieldSamples};
pub use norms::{error_norms, ErrorNorms};
pub use study::{convergence_study, loglog_slope, ConvergenceReport, ConvergenceRow};
pub use tables::{run_tab2, run_tab5, Tab2, Tab5};
