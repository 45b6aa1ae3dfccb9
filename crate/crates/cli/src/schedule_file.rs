//! On-disk JSON form of a step schedule.

use serde::{Deserialize, Serialize};
use stepopt::{Grid, Schedule, ScheduleFamily};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Non-default schedule parameters; omitted when the family defaults are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleParams {
    Linear { beta_min: f64, beta_max: f64 },
    Cosine { s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub schema_version: u32,
    pub schedule_family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule_params: Option<ScheduleParams>,
    #[serde(rename = "T")]
    pub t_start: f64,
    pub eps: f64,
    #[serde(rename = "N")]
    pub steps: usize,
    pub lambda: Vec<f64>,
    pub t: Vec<f64>,
    pub orders: Vec<usize>,
    pub polynomial_kind: String,
    pub p: u32,
    pub objective: f64,
    pub init: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

/// Extra fields written by `optimize`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunInfo {
    pub initial_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_seconds: f64,
}

pub fn schedule_params(schedule: &Schedule) -> Option<ScheduleParams> {
    let default = Schedule::default_for(schedule.family());
    if *schedule == default {
        return None;
    }
    match *schedule {
        Schedule::VpLinear { beta_min, beta_max } => {
            Some(ScheduleParams::Linear { beta_min, beta_max })
        }
        Schedule::VpCosine { s } => Some(ScheduleParams::Cosine { s }),
        Schedule::VeEdm => None,
    }
}

impl ScheduleFile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        schedule: &Schedule,
        grid: &Grid,
        orders: &[usize],
        kind: stepopt::PolynomialKind,
        p: u32,
        objective: f64,
        init: String,
        run: Option<RunInfo>,
    ) -> Self {
        ScheduleFile {
            schema_version: SCHEMA_VERSION,
            schedule_family: schedule.family().as_str().to_string(),
            schedule_params: schedule_params(schedule),
            t_start: grid.t_start(),
            eps: grid.t_end(),
            steps: grid.steps(),
            lambda: grid.lambdas().to_vec(),
            t: grid.times().to_vec(),
            orders: orders.to_vec(),
            polynomial_kind: kind.as_str().to_string(),
            p,
            objective,
            init,
            tool_version: TOOL_VERSION.to_string(),
            initial_objective: run.map(|r| r.initial_objective),
            iterations: run.map(|r| r.iterations),
            converged: run.map(|r| r.converged),
            wall_time_seconds: run.map(|r| r.wall_time_seconds),
        }
    }

    pub fn schedule(&self) -> Result<Schedule, CliError> {
        let family: ScheduleFamily = self.schedule_family.parse().map_err(CliError::usage)?;
        let schedule = match (family, &self.schedule_params) {
            (_, None) => Schedule::default_for(family),
            (ScheduleFamily::VpLinear, Some(ScheduleParams::Linear { beta_min, beta_max })) => {
                Schedule::vp_linear(*beta_min, *beta_max).map_err(CliError::usage)?
            }
            (ScheduleFamily::VpCosine, Some(ScheduleParams::Cosine { s })) => {
                Schedule::vp_cosine(*s).map_err(CliError::usage)?
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "schedule_params do not match family {}",
                    self.schedule_family
                )))
            }
        };
        Ok(schedule)
    }

    /// Checks internal consistency and rebuilds the grid from the stored `λ`.
    pub fn grid(&self) -> Result<Grid, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let n = self.steps;
        if self.lambda.len() != n + 1 || self.t.len() != n + 1 || self.orders.len() != n {
            return Err(CliError::Usage(format!(
                "array lengths (lambda {}, t {}, orders {}) inconsistent with N = {n}",
                self.lambda.len(),
                self.t.len(),
                self.orders.len()
            )));
        }
        if self.t.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(CliError::Usage("t must be strictly decreasing".into()));
        }
        let schedule = self.schedule()?;
        Grid::from_lambdas(&schedule, self.t_start, self.eps, self.lambda.clone())
            .map_err(CliError::usage)
    }

    pub fn orders(&self) -> Result<stepopt::OrderSchedule, CliError> {
        stepopt::OrderSchedule::new(self.orders.clone()).map_err(CliError::usage)
    }

    pub fn kind(&self) -> Result<stepopt::PolynomialKind, CliError> {
        self.polynomial_kind.parse().map_err(CliError::usage)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("schedule file serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Usage(format!("invalid schedule file: {e}")))
    }
}
