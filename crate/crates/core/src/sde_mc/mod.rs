//! Killed diffusions with piecewise-constant coefficients: path simulation,
//! window density estimates of the Green's function and survival probabilities.

mod estimate;
mod paths;
mod schedule;

use thiserror::Error;

pub use estimate::{
    default_window, estimate_green, estimate_green_from, survival_probability, window_volume, GreenEstimate,
};
pub use paths::{kill_times, simulate_batch, simulate_paths, EnsembleSummary, KilledEnsemble, PathRecord, SimulationMeta};
pub use schedule::{
    builtin_schedule, load_schedule, parse_schedule_json, CoefficientSchedule, ScheduleSpec,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdeError {
    #[error("coefficient piece {piece} is not symmetric (max |a - aᵀ| = {asymmetry:e})")]
    NonSymmetric { piece: usize, asymmetry: f64 },
    #[error("coefficient piece {piece} is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { piece: usize, min_eigenvalue: f64 },
    #[error("schedule: {0}")]
    BadSchedule(String),
    #[error("start point lies on the boundary")]
    StartOnBoundary,
    #[error("start point lies outside the domain")]
    StartOutside,
    #[error("end time {t} precedes start time {s}")]
    BadInterval { s: f64, t: f64 },
    #[error("step {dt} must be positive and at most t - s = {span}")]
    StepTooLarge { dt: f64, span: f64 },
    #[error("need at least one path")]
    NoPaths,
    #[error("window radius must be positive, got {0}")]
    NonpositiveWindow(f64),
    #[error("window around the evaluation point has no volume inside the domain")]
    EmptyWindowVolume,
}

#[cfg(test)]
mod tests;
