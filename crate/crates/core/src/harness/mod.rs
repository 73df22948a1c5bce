//! Experiment orchestration: instances x seeds x solvers, aggregation and sweeps.

mod experiment;
mod pipeline;
mod spec;
mod stats;
mod sweep;

pub use experiment::{
    aggregate, initial_condition_study, run_experiment, write_outputs, AggregateReport, AggregateRow,
    ExperimentOutput, FailureKind, RunFailure, StudyReport, StudyRow,
};
pub use pipeline::{run_baseline, run_pipeline, run_pipelines, RunRecord};
pub use spec::{ExperimentSpec, GeneratorKind, Instance, MdSettings, Pipeline, ProblemSource};
pub use stats::Stats;
pub use sweep::{adiabaticity_sweep, reference_line, AdiabaticityTable, ReferenceKind};
