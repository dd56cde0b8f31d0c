//! Random instances, batch experiments and their reports.

pub mod experiment;
pub mod generate;
pub mod report;
pub mod sweep;

pub use experiment::{
    carath_rows, classify_rows, derive_seed, run_experiment, run_trials, CarathRow, ClassifyRow, ExperimentMode,
    ExperimentReport, ExperimentSpec, KernelBin, TableRows, TrialRecord,
};
pub use generate::{boundedness_check, random_defining_tuple, random_interior_point, random_tuple};
pub use report::{write_report, ReportFiles};
pub use sweep::{tolerance_sweep, SweepGrid, SweepRow};
