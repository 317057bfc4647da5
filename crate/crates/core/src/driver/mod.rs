//! Scenario configuration and the adaptive time loop.

mod compare;
mod config;
mod run;

pub use compare::{run_comparison, write_comparison, ComparedRun, COMPARISON_HEADER};
pub use config::{Mode, Preset, SimulationConfig};
pub use run::{
    adaptive_iterate, initial_space, run, run_file, steps_header, IterateOutcome, RunOutput, StepContext, StepRecord,
};
