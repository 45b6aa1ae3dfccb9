//! Error-bound objective `Σ_i ε̃(λ_i) · |Σ_{n−k_n+j=i} w_{n;k_n,j}|` over the
//! interior half log-SNR values of a schedule.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::schedules::{check_endpoints, check_increasing, NoiseSchedule};
use crate::weights::{aggregate, weight_table, OrderSchedule, PolynomialKind};

/// Default smoothing of the absolute value, `s_μ(x) = √(x² + μ²)`.
pub const DEFAULT_SMOOTHING: f64 = 1e-10;

/// Everything the objective depends on besides the interior `λ` values.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec<T> {
    schedule: NoiseSchedule<T>,
    steps: usize,
    t_start: T,
    t_end: T,
    lambda_start: T,
    lambda_end: T,
    orders: OrderSchedule,
    p: u32,
    kind: PolynomialKind,
    smoothing: T,
}

impl<T: Real> ObjectiveSpec<T> {
    pub fn new(
        schedule: NoiseSchedule<T>,
        t_start: T,
        t_end: T,
        orders: OrderSchedule,
        p: u32,
        kind: PolynomialKind,
    ) -> Result<Self> {
        check_endpoints(&schedule, t_start, t_end)?;
        if p > 3 {
            return Err(Error::InvalidArgument(format!(
                "error exponent p must be in 0..=3, got {p}"
            )));
        }
        if kind == PolynomialKind::Taylor && orders.max_order() > crate::weights::MAX_TAYLOR_ORDER {
            return Err(Error::InvalidArgument(format!(
                "Taylor polynomials support orders up to {}",
                crate::weights::MAX_TAYLOR_ORDER
            )));
        }
        let lambda_start = schedule.lambda_of_t(t_start)?;
        let lambda_end = schedule.lambda_of_t(t_end)?;
        Ok(ObjectiveSpec {
            schedule,
            steps: orders.steps(),
            t_start,
            t_end,
            lambda_start,
            lambda_end,
            orders,
            p,
            kind,
            smoothing: T::lit(DEFAULT_SMOOTHING),
        })
    }

    /// Replaces the absolute-value smoothing `μ` (must satisfy `0 ≤ μ < 1e-6`).
    pub fn with_smoothing(mut self, mu: T) -> Result<Self> {
        if !(mu >= T::zero() && mu < T::lit(1e-6)) {
            return Err(Error::InvalidArgument(format!(
                "smoothing must lie in [0, 1e-6), got {mu}"
            )));
        }
        self.smoothing = mu;
        Ok(self)
    }

    pub fn schedule(&self) -> &NoiseSchedule<T> {
        &self.schedule
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn lambda_start(&self) -> T {
        self.lambda_start
    }

    pub fn lambda_end(&self) -> T {
        self.lambda_end
    }

    pub fn orders(&self) -> &OrderSchedule {
        &self.orders
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn kind(&self) -> PolynomialKind {
        self.kind
    }

    pub fn smoothing(&self) -> T {
        self.smoothing
    }

    /// Full `λ_0 … λ_N` from the interior values, validated for strict increase.
    pub fn full_lambdas(&self, interior: &[T]) -> Result<Vec<T>> {
        if interior.len() + 1 != self.steps {
            return Err(Error::InvalidArgument(format!(
                "expected {} interior values for N = {}, got {}",
                self.steps.saturating_sub(1),
                self.steps,
                interior.len()
            )));
        }
        let mut lambdas = Vec::with_capacity(self.steps + 1);
        lambdas.push(self.lambda_start);
        lambdas.extend_from_slice(interior);
        lambdas.push(self.lambda_end);
        check_increasing(&lambdas)?;
        Ok(lambdas)
    }
}

/// Score-error proxy `ε̃ = σ^p / α` at the time whose half log-SNR is `lambda`.
pub fn epsilon_tilde<T: Real>(schedule: &NoiseSchedule<T>, lambda: T, p: u32) -> Result<T> {
    schedule.check_lambda(lambda)?;
    let (log_alpha, log_sigma) = schedule.log_alpha_sigma_of_lambda(lambda);
    Ok((T::from_u32(p).expect("small integer") * log_sigma - log_alpha).exp())
}

/// Objective value at `interior`, with weights anchored at `λ_ε`.
pub fn objective_value<T: Real>(spec: &ObjectiveSpec<T>, interior: &[T]) -> Result<T> {
    objective_value_anchored(spec, interior, spec.lambda_end)
}

/// Objective value with weights scaled by `e^{−anchor}`. Different anchors
/// differ by the constant factor `e^{anchor₁ − anchor₂}` when `μ = 0`.
pub fn objective_value_anchored<T: Real>(
    spec: &ObjectiveSpec<T>,
    interior: &[T],
    anchor: T,
) -> Result<T> {
    let terms = objective_terms_anchored(spec, interior, anchor)?;
    let total = terms.value(spec.smoothing);
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::NonFinite("objective value".into()))
    }
}

/// Per-point ingredients of the objective: the proxies `ε̃(λ_i)` and the
/// signed group sums `c_i`, for `i = 0…N−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveTerms<T> {
    pub eps: Vec<T>,
    pub signed: Vec<T>,
}

impl<T: Real> ObjectiveTerms<T> {
    /// `ε̃_i · s_μ(c_i)` with `s_μ(c) = √(c² + μ²)` (exactly `|c|` when `μ = 0`).
    pub fn term(&self, i: usize, mu: T) -> T {
        let c = self.signed[i];
        let magnitude = if mu == T::zero() {
            c.abs()
        } else {
            c.hypot(mu)
        };
        self.eps[i] * magnitude
    }

    pub fn value(&self, mu: T) -> T {
        let mut total = T::zero();
        for i in 0..self.eps.len() {
            total += self.term(i, mu);
        }
        total
    }
}

/// [`ObjectiveTerms`] with weights anchored at `λ_ε`.
pub fn objective_terms<T: Real>(
    spec: &ObjectiveSpec<T>,
    interior: &[T],
) -> Result<ObjectiveTerms<T>> {
    objective_terms_anchored(spec, interior, spec.lambda_end)
}

fn objective_terms_anchored<T: Real>(
    spec: &ObjectiveSpec<T>,
    interior: &[T],
    anchor: T,
) -> Result<ObjectiveTerms<T>> {
    let lambdas = spec.full_lambdas(interior)?;
    let table = weight_table(spec.kind, &lambdas, &spec.orders, anchor)?;
    let groups = aggregate(&table, &spec.orders)?;
    let eps = lambdas[..spec.steps]
        .iter()
        .map(|&l| epsilon_tilde(&spec.schedule, l, spec.p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ObjectiveTerms {
        eps,
        signed: groups.signed().to_vec(),
    })
}

/// Base finite-difference step: 1e-6 in double precision, `ε^{1/3}` for
/// coarser types.
pub fn fd_step<T: Real>() -> T {
    if T::epsilon() < T::lit(1e-12) {
        T::lit(1e-6)
    } else {
        T::epsilon().cbrt()
    }
}

/// Central finite-difference gradient with per-coordinate step
/// `h_i = 1e-6 · max(1, |λ_i|)`.
pub fn objective_gradient<T: Real>(spec: &ObjectiveSpec<T>, interior: &[T]) -> Result<Vec<T>> {
    spec.full_lambdas(interior)?;
    let base = fd_step::<T>();
    let mut probe = interior.to_vec();
    let mut grad = Vec::with_capacity(interior.len());
    for i in 0..interior.len() {
        let x = interior[i];
        let h = base * T::one().max(x.abs());
        let (plus, minus) = (x + h, x - h);
        probe[i] = plus;
        let f_plus = objective_value(spec, &probe)?;
        probe[i] = minus;
        let f_minus = objective_value(spec, &probe)?;
        probe[i] = x;
        grad.push((f_plus - f_minus) / (plus - minus));
    }
    Ok(grad)
}
