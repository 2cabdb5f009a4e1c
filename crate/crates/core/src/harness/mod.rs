//! Test functions, reference integrals and convergence studies.

mod config;
mod functions;
mod reference;
mod study;

pub use config::{default_constraint, ExperimentConfig};
pub use functions::{franke, renka, runge_center, FunctionKind, TestFunction};
pub use reference::{reference_integral, reference_integral_with, ReferenceTolerance, Target};
pub use study::{
    cell_rule, fit_eoc, rms, run_study, studied_functions, study_references, CellResult, ErrorReport,
    ReferenceSource, StudyRow, EOC_ERROR_FLOOR, EOC_MIN_POINTS, STUDIED,
};
