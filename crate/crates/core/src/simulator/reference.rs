//! Ground-truth terminal states of the probability-flow ODE.
//!
//! With `y = x/σ` the ODE in `λ` reads `dy/dλ = e^λ x_θ(σ y, λ)`, which is
//! smooth and non-stiff for analytic models. Mixtures are integrated with an
//! adaptive Dormand–Prince 5(4) pair; single Gaussians have a closed form.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::schedules::NoiseSchedule;
use crate::simulator::model::{AnalyticModel, DataPredictor};

/// Tolerance used for mixture references.
pub const REFERENCE_TOLERANCE: f64 = 1e-10;

/// Closed-form flow of a single Gaussian `N(μ, s² I)`:
/// `x_ε = α_ε μ + (σ̂_ε/σ̂_T)(x_T − α_T μ)` with `σ̂_t² = α_t² s² + σ_t²`.
pub fn gaussian_flow<T: Real>(
    mean: &[T],
    std: T,
    schedule: &NoiseSchedule<T>,
    x_start: &[T],
    lambda_start: T,
    lambda_end: T,
) -> Vec<T> {
    let (a0, s0) = schedule.alpha_sigma_of_lambda(lambda_start);
    let (a1, s1) = schedule.alpha_sigma_of_lambda(lambda_end);
    let spread0 = (a0 * a0 * std * std + s0 * s0).sqrt();
    let spread1 = (a1 * a1 * std * std + s1 * s1).sqrt();
    let ratio = spread1 / spread0;
    x_start
        .iter()
        .zip(mean)
        .map(|(&x, &m)| a1 * m + ratio * (x - a0 * m))
        .collect()
}

/// Adaptive-step settings for [`integrate_flow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for AdaptiveOptions<T> {
    fn default() -> Self {
        AdaptiveOptions {
            rtol: T::lit(REFERENCE_TOLERANCE),
            atol: T::lit(REFERENCE_TOLERANCE),
            max_steps: 1_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates the probability flow of `predictor` from `λ_start` to `λ_end`.
pub fn integrate_flow<T: Real, P: DataPredictor<T> + ?Sized>(
    predictor: &P,
    schedule: &NoiseSchedule<T>,
    x_start: &[T],
    lambda_start: T,
    lambda_end: T,
    options: &AdaptiveOptions<T>,
) -> Result<Vec<T>> {
    let rhs = |lambda: T, y: &[T]| -> Vec<T> {
        let (alpha, sigma) = schedule.alpha_sigma_of_lambda(lambda);
        let x: Vec<T> = y.iter().map(|&v| sigma * v).collect();
        let scale = lambda.exp();
        predictor
            .predict(&x, alpha, sigma)
            .into_iter()
            .map(|v| scale * v)
            .collect()
    };
    let dim = x_start.len();
    let (_, sigma_start) = schedule.alpha_sigma_of_lambda(lambda_start);
    let (_, sigma_end) = schedule.alpha_sigma_of_lambda(lambda_end);
    let mut y: Vec<T> = x_start.iter().map(|&v| v / sigma_start).collect();
    let mut lambda = lambda_start;
    let span = lambda_end - lambda_start;
    let mut h = span * T::lit(1e-3);
    let mut k: [Vec<T>; 7] = Default::default();
    k[0] = rhs(lambda, &y);
    let mut stage = vec![T::zero(); dim];
    let mut steps = 0usize;

    while lambda < lambda_end {
        if steps >= options.max_steps {
            return Err(Error::Integrator(format!(
                "exceeded {} steps at lambda = {lambda}",
                options.max_steps
            )));
        }
        steps += 1;
        let last = lambda + h >= lambda_end;
        if last {
            h = lambda_end - lambda;
        }
        for s in 1..7 {
            for (i, st) in stage.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (r, row) in k.iter().enumerate().take(s) {
                    acc += T::lit(A[s][r]) * row[i];
                }
                *st = y[i] + h * acc;
            }
            k[s] = rhs(lambda + T::lit(C[s]) * h, &stage);
        }
        // Stage 7 is evaluated at the 5th-order solution (FSAL).
        let y_new = stage.clone();
        let mut err = T::zero();
        for i in 0..dim {
            let mut e = T::zero();
            for (s, row) in k.iter().enumerate() {
                e += T::lit(E[s]) * row[i];
            }
            let tol = options.atol + options.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((h * e).abs() / tol);
        }
        if !err.is_finite() {
            return Err(Error::Integrator(format!(
                "non-finite error estimate at lambda = {lambda}"
            )));
        }
        if err <= T::one() {
            lambda = if last { lambda_end } else { lambda + h };
            y = y_new;
            k[0] = k[6].clone();
        }
        let factor = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2)))
                .max(T::lit(0.2))
                .min(T::lit(5.0))
        };
        h *= factor;
        if h.abs() <= T::epsilon() * lambda.abs().max(T::one()) {
            return Err(Error::Integrator(format!(
                "step size underflow at lambda = {lambda}"
            )));
        }
    }
    Ok(y.into_iter().map(|v| sigma_end * v).collect())
}

/// Exact (single Gaussian) or high-accuracy (mixture) terminal state.
pub fn reference_solution<T: Real>(
    model: &AnalyticModel<T>,
    schedule: &NoiseSchedule<T>,
    x_start: &[T],
    t_start: T,
    t_end: T,
) -> Result<Vec<T>> {
    let lambda_start = schedule.lambda_of_t(t_start)?;
    let lambda_end = schedule.lambda_of_t(t_end)?;
    reference_between(model, schedule, x_start, lambda_start, lambda_end)
}

pub(crate) fn reference_between<T: Real>(
    model: &AnalyticModel<T>,
    schedule: &NoiseSchedule<T>,
    x_start: &[T],
    lambda_start: T,
    lambda_end: T,
) -> Result<Vec<T>> {
    match model.single_gaussian() {
        Some(c) => Ok(gaussian_flow(
            &c.mean,
            c.std,
            schedule,
            x_start,
            lambda_start,
            lambda_end,
        )),
        None => integrate_flow(
            model,
            schedule,
            x_start,
            lambda_start,
            lambda_end,
            &AdaptiveOptions::default(),
        ),
    }
}
