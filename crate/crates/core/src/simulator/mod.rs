//! Desk-scale validation of step schedules on analytic diffusion models.

pub mod evaluate;
pub mod model;
pub mod reference;
pub mod sampler;

pub use evaluate::{
    evaluate_candidates, evaluate_schedules, initial_state, Candidate, SimulationReport,
};
pub use model::{AnalyticModel, Component, ConstantPredictor, DataPredictor, ModelFile};
pub use reference::{gaussian_flow, integrate_flow, reference_solution, AdaptiveOptions};
pub use sampler::{multistep_sample, Sampler};
