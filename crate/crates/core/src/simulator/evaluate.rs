use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::schedules::{LambdaGrid, NoiseSchedule};
use crate::simulator::model::AnalyticModel;
use crate::simulator::reference::reference_between;
use crate::simulator::sampler::Sampler;
use crate::weights::{OrderSchedule, PolynomialKind};

/// One schedule to be compared.
#[derive(Debug, Clone)]
pub struct Candidate<T> {
    pub label: String,
    pub grid: LambdaGrid<T>,
    pub orders: OrderSchedule,
    pub kind: PolynomialKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport<T> {
    pub schedule_label: String,
    pub steps: usize,
    pub mean_l2_error: T,
    pub median_l2_error: T,
    pub per_seed_errors: Vec<T>,
}

/// Starting state of trajectory `seed`: a ChaCha8 stream selected by the seed
/// index, scaled by the exact marginal standard deviation at `T`.
pub fn initial_state<T: Real>(dim: usize, std: T, rng_seed: u64, seed: usize) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(seed as u64);
    (0..dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            std * T::lit(z)
        })
        .collect()
}

fn l2_distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

fn median<T: Real>(values: &[T]) -> T {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) * T::lit(0.5)
    }
}

/// Runs every candidate on the same `seeds` initial states and reports terminal
/// L2 errors against the reference flow. Trajectories run in parallel on the
/// current rayon pool; results do not depend on the number of workers.
pub fn evaluate_candidates<T: Real>(
    model: &AnalyticModel<T>,
    schedule: &NoiseSchedule<T>,
    candidates: &[Candidate<T>],
    seeds: usize,
    rng_seed: u64,
) -> Result<Vec<SimulationReport<T>>> {
    if seeds == 0 {
        return Err(Error::InvalidArgument("seeds must be at least 1".into()));
    }
    let first = candidates
        .first()
        .ok_or_else(|| Error::InvalidArgument("no schedules to evaluate".into()))?;
    let (lambda_start, lambda_end) = (first.grid.lambda_start(), first.grid.lambda_end());
    for c in candidates {
        if c.grid.t_start() != first.grid.t_start() || c.grid.t_end() != first.grid.t_end() {
            return Err(Error::InvalidArgument(format!(
                "schedule `{}` spans [{}, {}] but `{}` spans [{}, {}]",
                c.label,
                c.grid.t_end(),
                c.grid.t_start(),
                first.label,
                first.grid.t_end(),
                first.grid.t_start()
            )));
        }
    }
    let samplers = candidates
        .iter()
        .map(|c| Sampler::new(schedule, c.grid.clone(), c.orders.clone(), c.kind))
        .collect::<Result<Vec<_>>>()?;
    let (alpha_start, sigma_start) = schedule.alpha_sigma_of_lambda(lambda_start);
    let std = model.marginal_variance(alpha_start, sigma_start).sqrt();

    let per_seed: Vec<Vec<T>> = (0..seeds)
        .into_par_iter()
        .map(|seed| -> Result<Vec<T>> {
            let x_start = initial_state(model.dim(), std, rng_seed, seed);
            let truth = reference_between(model, schedule, &x_start, lambda_start, lambda_end)?;
            samplers
                .iter()
                .map(|s| s.sample(model, &x_start).map(|x| l2_distance(&x, &truth)))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let denom = T::from_usize_lossy(seeds);
    Ok(candidates
        .iter()
        .enumerate()
        .map(|(c, cand)| {
            let errors: Vec<T> = per_seed.iter().map(|row| row[c]).collect();
            let mean = errors.iter().fold(T::zero(), |acc, &e| acc + e) / denom;
            SimulationReport {
                schedule_label: cand.label.clone(),
                steps: cand.grid.steps(),
                mean_l2_error: mean,
                median_l2_error: median(&errors),
                per_seed_errors: errors,
            }
        })
        .collect())
}

/// Compares several grids sharing one order schedule and polynomial kind.
/// Reports are labelled by position (`schedule-0`, `schedule-1`, …).
#[allow(clippy::too_many_arguments)]
pub fn evaluate_schedules<T: Real>(
    model: &AnalyticModel<T>,
    schedule: &NoiseSchedule<T>,
    grids: &[LambdaGrid<T>],
    orders: &OrderSchedule,
    kind: PolynomialKind,
    seeds: usize,
    rng_seed: u64,
) -> Result<Vec<SimulationReport<T>>> {
    let candidates: Vec<Candidate<T>> = grids
        .iter()
        .enumerate()
        .map(|(i, g)| Candidate {
            label: format!("schedule-{i}"),
            grid: g.clone(),
            orders: orders.clone(),
            kind,
        })
        .collect();
    evaluate_candidates(model, schedule, &candidates, seeds, rng_seed)
}
