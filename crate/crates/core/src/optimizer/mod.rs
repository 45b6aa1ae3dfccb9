//! Constrained trust-region minimization of the step objective over the
//! interior `λ_1 … λ_{N−1}`, subject to `λ_{n+1} − λ_n ≥ δ`.
//!
//! The objective is a sum of absolute values `Σ_i |p_i(x)|` with
//! `p_i = ε̃(λ_i) c_i`, and its minimizers typically sit where some `c_i`
//! vanishes. Each iteration therefore keeps the absolute values in the model,
//! `Σ_i |p_i + J_i s| + ½ sᵀBs`, with `J` from central differences and `B` a
//! damped BFGS approximation to the curvature of `Σ_i u_i p_i` (`u` the model
//! multipliers). The model is minimized over an ∞-norm box and the gap
//! constraints, which lets steps land exactly on kinks.

mod subproblem;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::objective::{fd_step, objective_terms, objective_value, ObjectiveSpec};
use crate::scalar::Real;
use crate::schedules::{BaselineScheme, LambdaGrid};

/// Starting point of the optimization.
#[derive(Debug, Clone, PartialEq)]
pub enum Initialization<T> {
    UniformT,
    UniformLambda,
    Edm {
        rho: u32,
    },
    /// Explicit interior `λ` values (projected onto the feasible set first).
    Explicit(Vec<T>),
}

impl<T: Real> Initialization<T> {
    pub fn label(&self) -> String {
        match self {
            Initialization::UniformT => "uniform-t".into(),
            Initialization::UniformLambda => "uniform-lambda".into(),
            Initialization::Edm { rho } => format!("edm-rho{rho}"),
            Initialization::Explicit(_) => "explicit".into(),
        }
    }

    fn interior(&self, spec: &ObjectiveSpec<T>) -> Result<Vec<T>> {
        let scheme = match self {
            Initialization::Explicit(values) => return Ok(values.clone()),
            Initialization::UniformT => BaselineScheme::UniformT,
            Initialization::UniformLambda => BaselineScheme::UniformLambda,
            Initialization::Edm { rho } => BaselineScheme::Edm { rho: *rho },
        };
        let grid = scheme.build(spec.schedule(), spec.steps(), spec.t_start(), spec.t_end())?;
        Ok(grid.interior().to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    pub init: Initialization<T>,
    /// Minimum gap `δ`; `None` selects `max(1e-4, 1e-3 · span / N)`.
    pub margin: Option<T>,
    pub max_iters: usize,
    /// Tolerance on the first-order criticality measure: the decrease of the
    /// linearized objective over the unit ℓ1 ball within the feasible set
    /// (the max-norm of the projected gradient where the objective is smooth).
    pub grad_tol: T,
    /// Tolerance on accepted step length and on the trust radius.
    pub step_tol: T,
    /// Initial trust radius; `None` selects `span / (4N)`.
    pub tr_radius0: Option<T>,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        OptimizerConfig {
            init: Initialization::UniformLambda,
            margin: None,
            max_iters: 500,
            grad_tol: T::lit(1e-8),
            step_tol: T::lit(1e-10),
            tr_radius0: None,
        }
    }
}

impl<T: Real> OptimizerConfig<T> {
    pub fn with_init(init: Initialization<T>) -> Self {
        OptimizerConfig {
            init,
            ..Self::default()
        }
    }
}

/// Smallest admissible margin.
pub const MIN_MARGIN: f64 = 1e-4;

pub fn default_margin<T: Real>(span: T, steps: usize) -> T {
    (T::lit(1e-3) * span / T::from_usize_lossy(steps)).max(T::lit(MIN_MARGIN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedSchedule<T> {
    pub grid: LambdaGrid<T>,
    pub objective: T,
    pub initial_objective: T,
    pub iterations: usize,
    pub converged: bool,
    pub margin: T,
    pub wall_time_seconds: f64,
    /// Objective at the start and after every accepted step.
    pub history: Vec<T>,
}

/// Moves `interior` onto `{λ_T + δ ≤ x_1, x_{i+1} − x_i ≥ δ, x_{N−1} ≤ λ_ε − δ}`
/// with one forward sweep (raising values) and one backward sweep (lowering
/// them). Feasible input is returned unchanged.
pub fn feasibility_project<T: Real>(
    interior: &[T],
    lambda_start: T,
    lambda_end: T,
    margin: T,
) -> Result<Vec<T>> {
    let steps = interior.len() + 1;
    let span = lambda_end - lambda_start;
    if !(margin > T::zero()) || !(span >= T::from_usize_lossy(steps) * margin) {
        return Err(Error::Infeasible {
            span: span.as_f64(),
            steps,
            margin: margin.as_f64(),
        });
    }
    if interior.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("interior lambda values".into()));
    }
    let mut out = interior.to_vec();
    let mut prev = lambda_start;
    for x in out.iter_mut() {
        if *x - prev < margin {
            *x = prev + margin;
        }
        prev = *x;
    }
    let mut next = lambda_end;
    for x in out.iter_mut().rev() {
        if next - *x < margin {
            *x = next - margin;
        }
        next = *x;
    }
    Ok(out)
}

/// Solves the constrained step-placement problem from `config.init`.
pub fn optimize_steps<T: Real>(
    spec: &ObjectiveSpec<T>,
    config: &OptimizerConfig<T>,
) -> Result<OptimizedSchedule<T>> {
    let started = Instant::now();
    let steps = spec.steps();
    let (lo, hi) = (spec.lambda_start(), spec.lambda_end());
    let span = hi - lo;
    if !(span > T::zero()) {
        return Err(Error::InvalidArgument(
            "lambda(T) must be smaller than lambda(eps)".into(),
        ));
    }
    let margin = match config.margin {
        Some(m) => m,
        None => default_margin(span, steps),
    };
    if !(margin >= T::lit(MIN_MARGIN)) {
        return Err(Error::InvalidArgument(format!(
            "margin must be at least {MIN_MARGIN}, got {margin}"
        )));
    }
    if !(config.grad_tol > T::zero() && config.step_tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }

    let build = |interior: &[T]| {
        LambdaGrid::from_interior(spec.schedule(), spec.t_start(), spec.t_end(), interior)
    };

    if steps == 1 {
        let objective = objective_value(spec, &[])?;
        return Ok(OptimizedSchedule {
            grid: build(&[])?,
            objective,
            initial_objective: objective,
            iterations: 0,
            converged: true,
            margin,
            wall_time_seconds: started.elapsed().as_secs_f64(),
            history: vec![objective],
        });
    }

    let start = config.init.interior(spec)?;
    if start.len() != steps - 1 {
        return Err(Error::InvalidArgument(format!(
            "initialization has {} interior values, expected {}",
            start.len(),
            steps - 1
        )));
    }
    let x0 = feasibility_project(&start, lo, hi, margin)?;
    let radius0 = config
        .tr_radius0
        .unwrap_or(span / (T::lit(4.0) * T::from_usize_lossy(steps)));
    let mut state = TrustRegion::new(spec, x0, margin, radius0)?;
    let initial_objective = state.f;
    let (iterations, converged) = state.run(config)?;

    Ok(OptimizedSchedule {
        grid: build(&state.x)?,
        objective: state.f,
        initial_objective,
        iterations,
        converged,
        margin,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        history: state.history,
    })
}

/// Runs [`optimize_steps`] from each of `inits` and keeps the lowest final
/// objective (the earliest on ties). Returns the winning index with its result.
pub fn optimize_best_of<T: Real>(
    spec: &ObjectiveSpec<T>,
    config: &OptimizerConfig<T>,
    inits: &[Initialization<T>],
) -> Result<(usize, OptimizedSchedule<T>)> {
    let mut best: Option<(usize, OptimizedSchedule<T>)> = None;
    for (k, init) in inits.iter().enumerate() {
        let run = OptimizerConfig {
            init: init.clone(),
            ..config.clone()
        };
        let out = optimize_steps(spec, &run)?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| out.objective < b.objective)
        {
            best = Some((k, out));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("no initialization given".into()))
}

/// The three standard starting points: uniform in `t`, uniform in `λ`, EDM.
pub fn standard_inits<T: Real>(rho: u32) -> [Initialization<T>; 3] {
    [
        Initialization::UniformT,
        Initialization::UniformLambda,
        Initialization::Edm { rho },
    ]
}

struct TrustRegion<'a, T> {
    spec: &'a ObjectiveSpec<T>,
    x: Vec<T>,
    f: T,
    lin: Linearization<T>,
    /// Dense row-major BFGS approximation.
    hess: Vec<T>,
    hess_scaled: bool,
    radius: T,
    max_radius: T,
    margin: T,
    history: Vec<T>,
}

/// Term values `p_i = ε̃_i c_i`, their smoothing floors `ε̃_i μ` and the
/// row-major `N × d` central-difference Jacobian of `p`.
struct Linearization<T> {
    p: Vec<T>,
    floor: Vec<T>,
    jac: Vec<T>,
}

impl<T: Real> Linearization<T> {
    fn at(spec: &ObjectiveSpec<T>, x: &[T]) -> Result<Self> {
        let products = |v: &[T]| -> Result<(Vec<T>, Vec<T>)> {
            let terms = objective_terms(spec, v)?;
            let p = terms
                .eps
                .iter()
                .zip(&terms.signed)
                .map(|(e, c)| *e * *c)
                .collect();
            Ok((p, terms.eps))
        };
        let (p, eps) = products(x)?;
        let floor = eps.iter().map(|&e| e * spec.smoothing()).collect();
        let (terms, d) = (p.len(), x.len());
        let mut jac = vec![T::zero(); terms * d];
        let base = fd_step::<T>();
        let mut probe = x.to_vec();
        for j in 0..d {
            let h = base * T::one().max(x[j].abs());
            let (plus, minus) = (x[j] + h, x[j] - h);
            probe[j] = plus;
            let (p_plus, _) = products(&probe)?;
            probe[j] = minus;
            let (p_minus, _) = products(&probe)?;
            probe[j] = x[j];
            for i in 0..terms {
                jac[i * d + j] = (p_plus[i] - p_minus[i]) / (plus - minus);
            }
        }
        Ok(Linearization { p, floor, jac })
    }

    /// `Σ_i s_μ(p_i + J_i s)`, the model without its curvature term.
    fn model(&self, s: &[T]) -> T {
        let d = s.len();
        let mut total = T::zero();
        for (i, (&p, &floor)) in self.p.iter().zip(&self.floor).enumerate() {
            let v = p + dot(&self.jac[i * d..(i + 1) * d], s);
            total += if floor == T::zero() {
                v.abs()
            } else {
                v.hypot(floor)
            };
        }
        total
    }

    /// `Jᵀu`, the gradient of `Σ_i u_i p_i`.
    fn weighted_gradient(&self, u: &[T]) -> Vec<T> {
        let d = self.jac.len() / self.p.len();
        let mut g = vec![T::zero(); d];
        for (i, &ui) in u.iter().enumerate() {
            for (gj, &a) in g.iter_mut().zip(&self.jac[i * d..(i + 1) * d]) {
                *gj += ui * a;
            }
        }
        g
    }
}

fn to_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

impl<'a, T: Real> TrustRegion<'a, T> {
    fn new(spec: &'a ObjectiveSpec<T>, x: Vec<T>, margin: T, radius: T) -> Result<Self> {
        let n = x.len();
        let f = objective_value(spec, &x)?;
        let lin = Linearization::at(spec, &x)?;
        let mut hess = vec![T::zero(); n * n];
        for i in 0..n {
            hess[i * n + i] = T::one();
        }
        let span = spec.lambda_end() - spec.lambda_start();
        Ok(TrustRegion {
            spec,
            x,
            f,
            lin,
            hess,
            hess_scaled: false,
            radius,
            max_radius: span,
            margin,
            history: vec![f],
        })
    }

    fn dim(&self) -> usize {
        self.x.len()
    }

    /// Node value with fixed endpoints: node 0 is `λ_T`, node N is `λ_ε`.
    fn node(&self, i: usize) -> T {
        if i == 0 {
            self.spec.lambda_start()
        } else if i == self.dim() + 1 {
            self.spec.lambda_end()
        } else {
            self.x[i - 1]
        }
    }

    /// Slack `λ_{i+1} − λ_i − δ` of every gap.
    fn slacks(&self) -> Vec<f64> {
        (0..=self.dim())
            .map(|g| (self.node(g + 1) - self.node(g) - self.margin).as_f64())
            .collect()
    }

    fn run(&mut self, config: &OptimizerConfig<T>) -> Result<(usize, bool)> {
        let mut iterations = 0;
        loop {
            let (p, jac, slack) = (to_f64(&self.lin.p), to_f64(&self.lin.jac), self.slacks());
            let model = subproblem::LinearModel {
                p: &p,
                jac: &jac,
                slack: &slack,
            };
            let stationary =
                subproblem::criticality(&model).is_some_and(|chi| chi <= config.grad_tol.as_f64());
            if stationary || self.radius < config.step_tol {
                return Ok((iterations, true));
            }
            if iterations >= config.max_iters {
                return Ok((iterations, false));
            }
            iterations += 1;

            let Some(solution) =
                subproblem::trust_region_step(&model, &to_f64(&self.hess), self.radius.as_f64())
            else {
                self.radius = T::lit(0.25) * self.radius;
                continue;
            };
            let step: Vec<T> = solution.step.iter().map(|&v| T::lit(v)).collect();
            let predicted = self.lin.model(&vec![T::zero(); self.dim()])
                - self.lin.model(&step)
                - T::lit(0.5) * self.quad(&step);
            let mut trial = self.apply(&step)?;
            let mut f_trial = objective_value(self.spec, &trial)?;
            if let Some(corrected) =
                self.second_order_correction(&step, &trial, &solution.landed)?
            {
                let f_corrected = objective_value(self.spec, &corrected)?;
                if f_corrected < f_trial {
                    trial = corrected;
                    f_trial = f_corrected;
                }
            }
            let actual: Vec<T> = trial.iter().zip(&self.x).map(|(a, b)| *a - *b).collect();
            let step_inf = actual.iter().fold(T::zero(), |m, d| m.max(d.abs()));
            let reduction = self.f - f_trial;
            let ratio = if predicted > T::zero() {
                reduction / predicted
            } else {
                -T::one()
            };

            if ratio < T::lit(0.25) {
                self.radius = T::lit(0.25) * step_inf.min(self.radius);
            } else if ratio > T::lit(0.75) && step_inf >= T::lit(0.8) * self.radius {
                self.radius = (T::lit(2.0) * self.radius).min(self.max_radius);
            }

            if ratio > T::lit(1e-4) && f_trial <= self.f {
                let lin_trial = Linearization::at(self.spec, &trial)?;
                let u: Vec<T> = solution.multipliers.iter().map(|&v| T::lit(v)).collect();
                let y: Vec<T> = lin_trial
                    .weighted_gradient(&u)
                    .iter()
                    .zip(&self.lin.weighted_gradient(&u))
                    .map(|(a, b)| *a - *b)
                    .collect();
                self.update_hessian(&actual, &y);
                self.x = trial;
                self.f = f_trial;
                self.lin = lin_trial;
                self.history.push(f_trial);
                if step_inf < config.step_tol {
                    return Ok((iterations, true));
                }
            }
        }
    }

    /// Minimum-norm correction that returns the landed terms to zero at the
    /// trial point while keeping gaps closed by the step closed.
    fn second_order_correction(
        &self,
        step: &[T],
        trial: &[T],
        landed: &[usize],
    ) -> Result<Option<Vec<T>>> {
        if landed.is_empty() {
            return Ok(None);
        }
        let d = self.dim();
        let terms = objective_terms(self.spec, trial)?;
        let mut rows: Vec<Vec<T>> = Vec::new();
        let mut rhs = Vec::new();
        for &i in landed {
            rows.push(self.lin.jac[i * d..(i + 1) * d].to_vec());
            rhs.push(-(terms.eps[i] * terms.signed[i]));
        }
        let node_step = |k: usize| {
            if k == 0 || k == d + 1 {
                T::zero()
            } else {
                step[k - 1]
            }
        };
        let tol = T::lit(1e-6) * self.radius;
        for g in 0..=d {
            let slack = self.node(g + 1) - self.node(g) - self.margin;
            if slack + node_step(g + 1) - node_step(g) <= tol {
                let mut row = vec![T::zero(); d];
                if g >= 1 {
                    row[g - 1] = -T::one();
                }
                if g < d {
                    row[g] = T::one();
                }
                rows.push(row);
                rhs.push(T::zero());
            }
        }
        let m = rows.len();
        let mut gram = vec![T::zero(); m * m];
        for a in 0..m {
            for b in 0..m {
                gram[a * m + b] = dot(&rows[a], &rows[b]);
            }
        }
        let Some(coef) = cholesky_solve(&gram, &rhs) else {
            return Ok(None);
        };
        let mut total = step.to_vec();
        for (row, &c) in rows.iter().zip(&coef) {
            for (t, &r) in total.iter_mut().zip(row) {
                *t += c * r;
            }
        }
        let correction_inf = total
            .iter()
            .zip(step)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()));
        if !(correction_inf <= self.radius) {
            return Ok(None);
        }
        self.apply(&total).map(Some)
    }

    fn quad(&self, v: &[T]) -> T {
        let n = self.dim();
        let mut acc = T::zero();
        for i in 0..n {
            let row = &self.hess[i * n..(i + 1) * n];
            acc += v[i] * dot(row, v);
        }
        acc
    }

    /// Takes the step and re-establishes the margin lost to rounding.
    fn apply(&self, step: &[T]) -> Result<Vec<T>> {
        let moved: Vec<T> = self.x.iter().zip(step).map(|(a, b)| *a + *b).collect();
        feasibility_project(
            &moved,
            self.spec.lambda_start(),
            self.spec.lambda_end(),
            self.margin,
        )
    }

    /// Powell-damped BFGS update with step `s` and gradient change `y`.
    fn update_hessian(&mut self, s: &[T], y: &[T]) {
        let n = self.dim();
        let sy = dot(s, y);
        if !self.hess_scaled && sy > T::zero() {
            let scale = dot(y, y) / sy;
            if scale.is_finite() && scale > T::zero() {
                for i in 0..n {
                    for j in 0..n {
                        self.hess[i * n + j] = if i == j { scale } else { T::zero() };
                    }
                }
                self.hess_scaled = true;
            }
        }
        let bs: Vec<T> = (0..n)
            .map(|i| dot(&self.hess[i * n..(i + 1) * n], s))
            .collect();
        let sbs = dot(s, &bs);
        if !(sbs > T::zero()) {
            return;
        }
        let theta = if sy >= T::lit(0.2) * sbs {
            T::one()
        } else {
            T::lit(0.8) * sbs / (sbs - sy)
        };
        let r: Vec<T> = y
            .iter()
            .zip(&bs)
            .map(|(&yi, &bi)| theta * yi + (T::one() - theta) * bi)
            .collect();
        let sr = dot(s, &r);
        if !(sr > T::zero()) {
            return;
        }
        for i in 0..n {
            for j in 0..n {
                let v = self.hess[i * n + j] - bs[i] * bs[j] / sbs + r[i] * r[j] / sr;
                self.hess[i * n + j] = v;
            }
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

/// Solves `M x = b` for symmetric positive definite `M`; `None` otherwise.
fn cholesky_solve<T: Real>(m: &[T], b: &[T]) -> Option<Vec<T>> {
    let r = b.len();
    let mut l = vec![T::zero(); r * r];
    for i in 0..r {
        for j in 0..=i {
            let mut acc = m[i * r + j];
            for k in 0..j {
                acc -= l[i * r + k] * l[j * r + k];
            }
            if i == j {
                if !(acc > T::epsilon() * m[i * r + i].abs()) {
                    return None;
                }
                l[i * r + i] = acc.sqrt();
            } else {
                l[i * r + j] = acc / l[j * r + j];
            }
        }
    }
    let mut y = vec![T::zero(); r];
    for i in 0..r {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[i * r + k] * y[k];
        }
        y[i] = acc / l[i * r + i];
    }
    let mut x = vec![T::zero(); r];
    for i in (0..r).rev() {
        let mut acc = y[i];
        for k in i + 1..r {
            acc -= l[k * r + i] * x[k];
        }
        x[i] = acc / l[i * r + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
