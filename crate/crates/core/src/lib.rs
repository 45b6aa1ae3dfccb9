//! Optimized time-step schedules for multistep exponential-integrator
//! samplers of diffusion probability-flow ODEs.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the command-line tool uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod objective;
pub mod optimizer;
pub mod scalar;
pub mod schedules;
pub mod simulator;
pub mod weights;

pub use error::{Error, Result};
pub use objective::{objective_gradient, objective_value, ObjectiveSpec};
pub use optimizer::{
    feasibility_project, optimize_best_of, optimize_steps, standard_inits, Initialization,
    OptimizedSchedule, OptimizerConfig,
};
pub use scalar::Real;
pub use schedules::{BaselineScheme, LambdaGrid, NoiseSchedule, ScheduleFamily};
pub use simulator::{
    evaluate_candidates, evaluate_schedules, AnalyticModel, Candidate, SimulationReport,
};
pub use weights::{
    aggregate, exp_poly_integral, weight_table, OrderSchedule, PolynomialKind, WeightTable,
};

pub type Schedule = NoiseSchedule<f64>;
pub type Grid = LambdaGrid<f64>;
pub type Spec = ObjectiveSpec<f64>;
pub type Config = OptimizerConfig<f64>;
pub type Optimized = OptimizedSchedule<f64>;
pub type Model = AnalyticModel<f64>;
pub type Report = SimulationReport<f64>;
pub type Weights = WeightTable<f64>;
