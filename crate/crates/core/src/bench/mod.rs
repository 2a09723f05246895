//! Benchmark registry, experiment drivers and result files.

pub mod experiment;
pub mod online;
pub mod output;
pub mod registry;
pub mod warm_start;

pub use experiment::{
    evaluate_errors, residual_history, test_set, ErrorRow, Experiment, ExperimentPlan, PointErrors,
    ReferenceSet,
};
pub use online::{parse_size, run_online, OnlineLevel, OnlinePlan, OnlineTiming};
pub use registry::{lookup, registry, Benchmark, Preset};
pub use warm_start::{run_warm_start, IterationStats, WarmStartPlan, WarmStartReport};
