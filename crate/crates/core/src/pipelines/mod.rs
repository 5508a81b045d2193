//! Experiment protocols: node selection by mixed-variable search, the
//! relax-and-round comparison method, and exhaustive/random baselines.

mod baseline;
mod methods;
mod spec;

pub use baseline::{exhaustive_baseline, random_baseline, BaselineDistribution, BaselineMethod, DEFAULT_EXHAUSTIVE_CAP};
pub use methods::{algorithm1, error_vs_steps, relax_round_pipeline, uncontrolled_response};
pub use spec::{DesiredPolicy, Experiment, ExperimentSpec, InitialPolicy, ModelSpec, SettleSettings, SolverSettings};
