use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::schedules::{LambdaGrid, NoiseSchedule};
use crate::simulator::model::DataPredictor;
use crate::weights::{step_weights, OrderSchedule, PolynomialKind};

/// Explicit multistep exponential-integrator sampler (data-prediction form).
///
/// Step `n` computes
/// `x_n = (σ_n/σ_{n−1}) x_{n−1} + α_n Σ_j (w_{n;k_n,j} e^{−λ_n}) f(λ_{n−k_n+j})`,
/// using `σ_n e^{λ_n} = α_n` so the weights never leave order one.
#[derive(Debug, Clone)]
pub struct Sampler<T> {
    grid: LambdaGrid<T>,
    orders: OrderSchedule,
    kind: PolynomialKind,
    alphas: Vec<T>,
    sigmas: Vec<T>,
    sigma_ratios: Vec<T>,
    weights: Vec<Vec<T>>,
}

impl<T: Real> Sampler<T> {
    pub fn new(
        schedule: &NoiseSchedule<T>,
        grid: LambdaGrid<T>,
        orders: OrderSchedule,
        kind: PolynomialKind,
    ) -> Result<Self> {
        let n_steps = grid.steps();
        if orders.steps() != n_steps {
            return Err(Error::InvalidArgument(format!(
                "order schedule has {} entries for a grid with {n_steps} steps",
                orders.steps()
            )));
        }
        let lambdas = grid.lambdas();
        let log_pairs: Vec<(T, T)> = lambdas
            .iter()
            .map(|&l| schedule.log_alpha_sigma_of_lambda(l))
            .collect();
        let alphas = log_pairs.iter().map(|p| p.0.exp()).collect();
        let sigmas = log_pairs.iter().map(|p| p.1.exp()).collect();
        let sigma_ratios = log_pairs
            .windows(2)
            .map(|w| (w[1].1 - w[0].1).exp())
            .collect();
        let weights = (1..=n_steps)
            .map(|n| step_weights(kind, lambdas, n, orders.order(n), lambdas[n]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Sampler {
            grid,
            orders,
            kind,
            alphas,
            sigmas,
            sigma_ratios,
            weights,
        })
    }

    pub fn grid(&self) -> &LambdaGrid<T> {
        &self.grid
    }

    pub fn orders(&self) -> &OrderSchedule {
        &self.orders
    }

    pub fn kind(&self) -> PolynomialKind {
        self.kind
    }

    /// Runs the sampler from `x_T` and returns the terminal state `x̃_ε`.
    pub fn sample<P: DataPredictor<T> + ?Sized>(
        &self,
        predictor: &P,
        x_start: &[T],
    ) -> Result<Vec<T>> {
        let n_steps = self.grid.steps();
        let mut x = x_start.to_vec();
        let mut history: Vec<Vec<T>> = Vec::with_capacity(n_steps);
        for n in 1..=n_steps {
            history.push(predictor.predict(&x, self.alphas[n - 1], self.sigmas[n - 1]));
            let k = self.orders.order(n);
            let ratio = self.sigma_ratios[n - 1];
            let alpha = self.alphas[n];
            let mut next: Vec<T> = x.iter().map(|&v| ratio * v).collect();
            for (j, &w) in self.weights[n - 1].iter().enumerate() {
                let f = &history[n - k + j];
                for (o, &fi) in next.iter_mut().zip(f) {
                    *o += alpha * w * fi;
                }
            }
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState(n));
            }
            x = next;
        }
        Ok(x)
    }
}

/// One-shot convenience wrapper around [`Sampler`].
pub fn multistep_sample<T: Real, P: DataPredictor<T> + ?Sized>(
    schedule: &NoiseSchedule<T>,
    grid: &LambdaGrid<T>,
    orders: &OrderSchedule,
    kind: PolynomialKind,
    predictor: &P,
    x_start: &[T],
) -> Result<Vec<T>> {
    Sampler::new(schedule, grid.clone(), orders.clone(), kind)?.sample(predictor, x_start)
}
