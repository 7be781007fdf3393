//! Batch experiments turning the regularity and vanishing-diffusivity
//! estimates into refinement-stable empirical checks.
//!
//! The constants of the estimates are existential, so each experiment reports
//! the smallest admissible constant on its data. A constant that stays put
//! (±25%) when the grid is doubled is the falsifiable surrogate for "there
//! exists C"; one that drifts flags a resolution problem.

mod config;
mod report;
mod runs;

pub use config::{ExperimentConfig, ExperimentKind, OutputPaths};
pub use report::{emit, BoundCheck, ExperimentReport, OutputFormat, RateBoundInputs, RateFit, Records};
pub use runs::{
    log_rate, refinement_stable, run, run_diffusive, run_mixing, run_regularity, run_zero_diffusivity_sweep, weak_scale,
};
