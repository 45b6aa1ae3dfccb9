//! Noise-schedule families and the baseline time discretizations.
//!
//! A schedule is described by `α_t` (signal scale) and `σ_t` (noise scale).
//! Everything downstream works in the half log-SNR `λ_t = log(α_t/σ_t)`,
//! which is strictly decreasing in `t`, so grids are stored in both `λ` and
//! `t` form.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest start time accepted by the cosine schedule; `λ → −∞` at `t = 1`.
pub const VP_COSINE_T_MAX: f64 = 0.992;

/// Default cosine shift.
pub const VP_COSINE_DEFAULT_S: f64 = 0.008;

/// Parametric noise schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSchedule<T> {
    /// Variance preserving, linear `β(t)` between `beta_min` and `beta_max`.
    VpLinear { beta_min: T, beta_max: T },
    /// Variance preserving cosine schedule with shift `s`.
    VpCosine { s: T },
    /// Variance exploding with `α_t = 1`, `σ_t = t`.
    VeEdm,
}

impl<T: Real> NoiseSchedule<T> {
    pub fn vp_linear(beta_min: T, beta_max: T) -> Result<Self> {
        if !(beta_min >= T::zero() && beta_max >= beta_min && beta_max > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "vp-linear needs 0 <= beta_min <= beta_max, beta_max > 0 (got {beta_min}, {beta_max})"
            )));
        }
        Ok(NoiseSchedule::VpLinear { beta_min, beta_max })
    }

    pub fn vp_cosine(s: T) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "vp-cosine shift must lie in (0, 1), got {s}"
            )));
        }
        Ok(NoiseSchedule::VpCosine { s })
    }

    /// Builds a schedule from its CLI / JSON name with default parameters
    /// (`β ∈ [0.1, 20]`, `s = 0.008`).
    pub fn from_name(name: &str) -> Result<Self> {
        name.parse::<ScheduleFamily>().map(Self::default_for)
    }

    pub fn default_for(family: ScheduleFamily) -> Self {
        match family {
            ScheduleFamily::VpLinear => NoiseSchedule::VpLinear {
                beta_min: T::lit(0.1),
                beta_max: T::lit(20.0),
            },
            ScheduleFamily::VpCosine => NoiseSchedule::VpCosine {
                s: T::lit(VP_COSINE_DEFAULT_S),
            },
            ScheduleFamily::VeEdm => NoiseSchedule::VeEdm,
        }
    }

    pub fn family(&self) -> ScheduleFamily {
        match self {
            NoiseSchedule::VpLinear { .. } => ScheduleFamily::VpLinear,
            NoiseSchedule::VpCosine { .. } => ScheduleFamily::VpCosine,
            NoiseSchedule::VeEdm => ScheduleFamily::VeEdm,
        }
    }

    pub fn is_variance_preserving(&self) -> bool {
        !matches!(self, NoiseSchedule::VeEdm)
    }

    /// Upper end of the valid time domain. The lower end is an open bound at 0.
    pub fn t_max(&self) -> T {
        match self {
            NoiseSchedule::VpLinear { .. } => T::one(),
            NoiseSchedule::VpCosine { .. } => T::lit(VP_COSINE_T_MAX),
            NoiseSchedule::VeEdm => T::infinity(),
        }
    }

    /// Default `(T, ε)` pair used by the CLI when none is given.
    pub fn default_endpoints(&self) -> (T, T) {
        match self {
            NoiseSchedule::VpLinear { .. } => (T::one(), T::lit(1e-3)),
            NoiseSchedule::VpCosine { .. } => (T::lit(VP_COSINE_T_MAX), T::lit(1e-3)),
            NoiseSchedule::VeEdm => (T::lit(80.0), T::lit(0.002)),
        }
    }

    pub fn check_time(&self, t: T) -> Result<()> {
        if t.is_finite() && t > T::zero() && t <= self.t_max() {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "t",
                value: t.as_f64(),
                lo: 0.0,
                hi: self.t_max().as_f64(),
            })
        }
    }

    /// Valid half log-SNR range `[λ(t_max), +∞)`.
    pub fn lambda_min(&self) -> T {
        match self {
            NoiseSchedule::VeEdm => T::neg_infinity(),
            _ => self.lambda_unchecked(self.t_max()),
        }
    }

    pub fn check_lambda(&self, lambda: T) -> Result<()> {
        let lo = self.lambda_min();
        if lambda.is_finite() && lambda >= lo {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "lambda",
                value: lambda.as_f64(),
                lo: lo.as_f64(),
                hi: f64::INFINITY,
            })
        }
    }

    fn log_alpha_unchecked(&self, t: T) -> T {
        let half = T::lit(0.5);
        match *self {
            NoiseSchedule::VpLinear { beta_min, beta_max } => {
                -T::lit(0.25) * t * t * (beta_max - beta_min) - half * t * beta_min
            }
            NoiseSchedule::VpCosine { s } => {
                let scale = T::FRAC_PI_2() / (T::one() + s);
                ((t + s) * scale).cos().ln() - (s * scale).cos().ln()
            }
            NoiseSchedule::VeEdm => T::zero(),
        }
    }

    fn log_sigma_unchecked(&self, t: T) -> T {
        match self {
            NoiseSchedule::VeEdm => t.ln(),
            _ => {
                let two = T::lit(2.0);
                T::lit(0.5) * (-(two * self.log_alpha_unchecked(t)).exp_m1()).ln()
            }
        }
    }

    fn lambda_unchecked(&self, t: T) -> T {
        self.log_alpha_unchecked(t) - self.log_sigma_unchecked(t)
    }

    pub fn log_alpha(&self, t: T) -> Result<T> {
        self.check_time(t)?;
        Ok(self.log_alpha_unchecked(t))
    }

    pub fn alpha(&self, t: T) -> Result<T> {
        self.log_alpha(t).map(T::exp)
    }

    pub fn sigma(&self, t: T) -> Result<T> {
        self.check_time(t)?;
        Ok(match self {
            NoiseSchedule::VeEdm => t,
            _ => self.log_sigma_unchecked(t).exp(),
        })
    }

    /// `κ_t = σ_t / α_t = e^{−λ_t}`.
    pub fn kappa(&self, t: T) -> Result<T> {
        self.lambda_of_t(t).map(|l| (-l).exp())
    }

    /// Half log-SNR `λ_t = log(α_t / σ_t)`.
    pub fn lambda_of_t(&self, t: T) -> Result<T> {
        self.check_time(t)?;
        let lambda = self.lambda_unchecked(t);
        if lambda.is_finite() {
            Ok(lambda)
        } else {
            Err(Error::Domain {
                what: "t",
                value: t.as_f64(),
                lo: 0.0,
                hi: self.t_max().as_f64(),
            })
        }
    }

    /// Drift coefficient `f(t) = d log α_t / dt`.
    pub fn drift(&self, t: T) -> Result<T> {
        self.check_time(t)?;
        let half = T::lit(0.5);
        Ok(match *self {
            NoiseSchedule::VpLinear { beta_min, beta_max } => {
                -half * t * (beta_max - beta_min) - half * beta_min
            }
            NoiseSchedule::VpCosine { s } => {
                let scale = T::FRAC_PI_2() / (T::one() + s);
                -scale * ((t + s) * scale).tan()
            }
            NoiseSchedule::VeEdm => T::zero(),
        })
    }

    /// Squared diffusion coefficient `g²(t) = dσ²/dt − 2 f(t) σ²`.
    pub fn diffusion_sq(&self, t: T) -> Result<T> {
        match self {
            NoiseSchedule::VeEdm => {
                self.check_time(t)?;
                Ok(T::lit(2.0) * t)
            }
            _ => Ok(-T::lit(2.0) * self.drift(t)?),
        }
    }

    /// `dλ/dt = −g²(t) / (2σ_t²)`, always negative.
    pub fn dlambda_dt(&self, t: T) -> Result<T> {
        let g2 = self.diffusion_sq(t)?;
        let log_sigma = self.log_sigma_unchecked(t);
        Ok(-g2 / (T::lit(2.0) * (T::lit(2.0) * log_sigma).exp()))
    }

    /// `log α` and `log σ` as functions of `λ` alone.
    pub fn log_alpha_sigma_of_lambda(&self, lambda: T) -> (T, T) {
        match self {
            NoiseSchedule::VeEdm => (T::zero(), -lambda),
            _ => {
                let two = T::lit(2.0);
                let half = T::lit(0.5);
                (
                    -half * (-two * lambda).softplus(),
                    -half * (two * lambda).softplus(),
                )
            }
        }
    }

    /// `(α, σ)` at the time whose half log-SNR equals `lambda`.
    pub fn alpha_sigma_of_lambda(&self, lambda: T) -> (T, T) {
        let (la, ls) = self.log_alpha_sigma_of_lambda(lambda);
        (la.exp(), ls.exp())
    }

    /// Inverse of [`lambda_of_t`](Self::lambda_of_t).
    pub fn t_of_lambda(&self, lambda: T) -> Result<T> {
        self.check_lambda(lambda)?;
        let t = match *self {
            NoiseSchedule::VeEdm => (-lambda).exp(),
            NoiseSchedule::VpLinear { beta_min, beta_max } => {
                // ¼Δβ t² + ½β_min t − c = 0 with c = −log α ≥ 0.
                let (log_alpha, _) = self.log_alpha_sigma_of_lambda(lambda);
                let c = -log_alpha;
                let a = T::lit(0.25) * (beta_max - beta_min);
                let b = T::lit(0.5) * beta_min;
                let two = T::lit(2.0);
                two * c / (b + (b * b + T::lit(4.0) * a * c).sqrt())
            }
            NoiseSchedule::VpCosine { .. } => self.invert_lambda(lambda)?,
        };
        if t.is_finite() && t > T::zero() {
            Ok(t.min(self.t_max()))
        } else {
            Err(Error::Domain {
                what: "lambda",
                value: lambda.as_f64(),
                lo: self.lambda_min().as_f64(),
                hi: f64::INFINITY,
            })
        }
    }

    /// Bracketed bisection in `log t` down to a relative width of 1e-6,
    /// followed by three Newton steps on `λ(t) − target`.
    fn invert_lambda(&self, target: T) -> Result<T> {
        let mut hi = self.t_max();
        if !hi.is_finite() {
            return Err(Error::InvalidArgument(
                "generic inversion needs a bounded time domain".into(),
            ));
        }
        let mut lo = hi * T::lit(0.5);
        let mut guard = 0;
        while self.lambda_unchecked(lo) < target {
            hi = lo;
            lo *= T::lit(0.5);
            guard += 1;
            if guard > 2000 || lo <= T::min_positive_value() {
                return Err(Error::Domain {
                    what: "lambda",
                    value: target.as_f64(),
                    lo: self.lambda_min().as_f64(),
                    hi: f64::INFINITY,
                });
            }
        }
        let rel = T::lit(1e-6);
        while hi - lo > rel * hi {
            let mid = (lo * hi).sqrt();
            if self.lambda_unchecked(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = (lo * hi).sqrt();
        for _ in 0..3 {
            let slope = self.dlambda_dt(t)?;
            let next = t - (self.lambda_unchecked(t) - target) / slope;
            if !(next.is_finite() && next > T::zero()) {
                break;
            }
            t = next.min(self.t_max());
        }
        Ok(t)
    }
}

/// Name-only view of a schedule family, used for parsing and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleFamily {
    VpLinear,
    VpCosine,
    VeEdm,
}

impl ScheduleFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScheduleFamily::VpLinear => "vp-linear",
            ScheduleFamily::VpCosine => "vp-cosine",
            ScheduleFamily::VeEdm => "ve-edm",
        }
    }
}

impl fmt::Display for ScheduleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScheduleFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vp-linear" => Ok(ScheduleFamily::VpLinear),
            "vp-cosine" => Ok(ScheduleFamily::VpCosine),
            "ve-edm" => Ok(ScheduleFamily::VeEdm),
            other => Err(Error::InvalidArgument(format!(
                "unknown schedule family `{other}` (expected vp-linear, vp-cosine or ve-edm)"
            ))),
        }
    }
}

/// Time steps `T = t_0 > … > t_N = ε` together with their half log-SNRs
/// `λ_0 < … < λ_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid<T> {
    lambda: Vec<T>,
    t: Vec<T>,
    t_start: T,
    t_end: T,
}

impl<T: Real> LambdaGrid<T> {
    /// Builds a grid from a full `λ` sequence. The endpoints must match
    /// `λ(T)` and `λ(ε)` to within 1e-12 (relative) and are then pinned to
    /// the exact values.
    pub fn from_lambdas(
        schedule: &NoiseSchedule<T>,
        t_start: T,
        t_end: T,
        mut lambda: Vec<T>,
    ) -> Result<Self> {
        check_endpoints(schedule, t_start, t_end)?;
        if lambda.len() < 2 {
            return Err(Error::InvalidArgument(
                "a grid needs at least two nodes (N >= 1)".into(),
            ));
        }
        let first = schedule.lambda_of_t(t_start)?;
        let last = schedule.lambda_of_t(t_end)?;
        let n = lambda.len() - 1;
        let close = |a: T, b: T| (a - b).abs() <= T::lit(1e-12) * T::one().max(b.abs());
        if !close(lambda[0], first) || !close(lambda[n], last) {
            return Err(Error::InvalidArgument(format!(
                "grid endpoints ({}, {}) do not match lambda(T) = {first}, lambda(eps) = {last}",
                lambda[0], lambda[n]
            )));
        }
        lambda[0] = first;
        lambda[n] = last;
        check_increasing(&lambda)?;
        let mut t = Vec::with_capacity(n + 1);
        t.push(t_start);
        for &l in &lambda[1..n] {
            t.push(schedule.t_of_lambda(l)?);
        }
        t.push(t_end);
        for i in 1..t.len() {
            if t[i] >= t[i - 1] {
                return Err(Error::InvalidArgument(format!(
                    "time steps not strictly decreasing at index {i}"
                )));
            }
        }
        Ok(LambdaGrid {
            lambda,
            t,
            t_start,
            t_end,
        })
    }

    /// Builds a grid from interior `λ_1 … λ_{N−1}` between the fixed endpoints.
    pub fn from_interior(
        schedule: &NoiseSchedule<T>,
        t_start: T,
        t_end: T,
        interior: &[T],
    ) -> Result<Self> {
        check_endpoints(schedule, t_start, t_end)?;
        let mut lambda = Vec::with_capacity(interior.len() + 2);
        lambda.push(schedule.lambda_of_t(t_start)?);
        lambda.extend_from_slice(interior);
        lambda.push(schedule.lambda_of_t(t_end)?);
        Self::from_lambdas(schedule, t_start, t_end, lambda)
    }

    /// Builds a grid from explicit time steps (strictly decreasing, first `T`,
    /// last `ε`).
    pub fn from_times(schedule: &NoiseSchedule<T>, times: Vec<T>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidArgument(
                "a grid needs at least two nodes (N >= 1)".into(),
            ));
        }
        let t_start = times[0];
        let t_end = times[times.len() - 1];
        check_endpoints(schedule, t_start, t_end)?;
        let lambda = times
            .iter()
            .map(|&t| schedule.lambda_of_t(t))
            .collect::<Result<Vec<_>>>()?;
        check_increasing(&lambda)?;
        Ok(LambdaGrid {
            lambda,
            t: times,
            t_start,
            t_end,
        })
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambda
    }

    pub fn times(&self) -> &[T] {
        &self.t
    }

    pub fn interior(&self) -> &[T] {
        &self.lambda[1..self.lambda.len() - 1]
    }

    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn lambda_start(&self) -> T {
        self.lambda[0]
    }

    pub fn lambda_end(&self) -> T {
        self.lambda[self.lambda.len() - 1]
    }

    /// Step sizes `h_n = λ_{n+1} − λ_n`.
    pub fn step_sizes(&self) -> Vec<T> {
        self.lambda.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub(crate) fn check_endpoints<T: Real>(
    schedule: &NoiseSchedule<T>,
    t_start: T,
    t_end: T,
) -> Result<()> {
    if !(t_start > t_end) {
        return Err(Error::InvalidRange {
            t_start: t_start.as_f64(),
            t_end: t_end.as_f64(),
        });
    }
    schedule.check_time(t_start)?;
    schedule.check_time(t_end)
}

pub(crate) fn check_increasing<T: Real>(lambda: &[T]) -> Result<()> {
    for (i, w) in lambda.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NotIncreasing { index: i + 1 });
        }
    }
    if lambda.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFinite("lambda grid".into()));
    }
    Ok(())
}

fn check_steps(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("N must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Times evenly spaced between `T` and `ε`.
pub fn uniform_t_grid<T: Real>(
    schedule: &NoiseSchedule<T>,
    n: usize,
    t_start: T,
    t_end: T,
) -> Result<LambdaGrid<T>> {
    check_steps(n)?;
    check_endpoints(schedule, t_start, t_end)?;
    let nn = T::from_usize_lossy(n);
    let times = (0..=n)
        .map(|i| {
            if i == n {
                t_end
            } else {
                t_start + T::from_usize_lossy(i) / nn * (t_end - t_start)
            }
        })
        .collect();
    LambdaGrid::from_times(schedule, times)
}

/// Half log-SNR evenly spaced between `λ_T` and `λ_ε`.
pub fn uniform_lambda_grid<T: Real>(
    schedule: &NoiseSchedule<T>,
    n: usize,
    t_start: T,
    t_end: T,
) -> Result<LambdaGrid<T>> {
    check_steps(n)?;
    check_endpoints(schedule, t_start, t_end)?;
    let first = schedule.lambda_of_t(t_start)?;
    let last = schedule.lambda_of_t(t_end)?;
    let nn = T::from_usize_lossy(n);
    let lambda = (0..=n)
        .map(|i| {
            if i == n {
                last
            } else {
                first + T::from_usize_lossy(i) / nn * (last - first)
            }
        })
        .collect();
    LambdaGrid::from_lambdas(schedule, t_start, t_end, lambda)
}

/// `κ^{1/ρ}` evenly spaced between `κ_T^{1/ρ}` and `κ_ε^{1/ρ}`, `κ = σ/α`.
pub fn edm_grid<T: Real>(
    schedule: &NoiseSchedule<T>,
    n: usize,
    t_start: T,
    t_end: T,
    rho: u32,
) -> Result<LambdaGrid<T>> {
    check_steps(n)?;
    check_endpoints(schedule, t_start, t_end)?;
    if rho == 0 {
        return Err(Error::InvalidArgument("rho must be at least 1".into()));
    }
    let rho_t = T::from_u32(rho).expect("rho representable");
    let first = schedule.lambda_of_t(t_start)?;
    let last = schedule.lambda_of_t(t_end)?;
    // κ^{1/ρ} = e^{−λ/ρ}
    let root_start = (-first / rho_t).exp();
    let root_end = (-last / rho_t).exp();
    let nn = T::from_usize_lossy(n);
    let lambda = (0..=n)
        .map(|i| {
            if i == 0 {
                first
            } else if i == n {
                last
            } else {
                let root = root_start + T::from_usize_lossy(i) / nn * (root_end - root_start);
                -rho_t * root.ln()
            }
        })
        .collect();
    LambdaGrid::from_lambdas(schedule, t_start, t_end, lambda)
}

/// Baseline discretization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineScheme {
    UniformT,
    UniformLambda,
    Edm { rho: u32 },
}

impl BaselineScheme {
    pub fn build<T: Real>(
        &self,
        schedule: &NoiseSchedule<T>,
        n: usize,
        t_start: T,
        t_end: T,
    ) -> Result<LambdaGrid<T>> {
        match *self {
            BaselineScheme::UniformT => uniform_t_grid(schedule, n, t_start, t_end),
            BaselineScheme::UniformLambda => uniform_lambda_grid(schedule, n, t_start, t_end),
            BaselineScheme::Edm { rho } => edm_grid(schedule, n, t_start, t_end, rho),
        }
    }

    pub fn label(&self) -> String {
        match self {
            BaselineScheme::UniformT => "uniform-t".into(),
            BaselineScheme::UniformLambda => "uniform-lambda".into(),
            BaselineScheme::Edm { rho } => format!("edm-rho{rho}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vp() -> NoiseSchedule<f64> {
        NoiseSchedule::from_name("vp-linear").unwrap()
    }

    fn cosine() -> NoiseSchedule<f64> {
        NoiseSchedule::from_name("vp-cosine").unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn ve_lambda_values() {
        let ve = NoiseSchedule::<f64>::VeEdm;
        assert_eq!(ve.lambda_of_t(1.0).unwrap(), 0.0);
        assert!((ve.lambda_of_t(80.0).unwrap() - (-4.382_026_634_673_881)).abs() < 1e-14);
        assert_eq!(ve.t_of_lambda(0.0).unwrap(), 1.0);
        assert!((ve.t_of_lambda(6.21461).unwrap() - 0.001_999_996_196_848).abs() < 1e-15);
        assert_eq!(ve.alpha(3.0).unwrap(), 1.0);
        assert_eq!(ve.sigma(3.0).unwrap(), 3.0);
    }

    #[test]
    fn vp_linear_equal_signal_and_noise() {
        // t where α = σ, from the closed-form quadratic evaluated in high precision.
        let t = 0.258_960_262_432_796_6;
        let s = vp();
        assert!(s.lambda_of_t(t).unwrap().abs() < 1e-14);
        assert!(rel(s.t_of_lambda(0.0).unwrap(), t) < 1e-14);
        assert!(rel(s.lambda_of_t(1.0).unwrap(), -5.024_978_406_659_204) < 1e-13);
        assert!(rel(s.lambda_of_t(1e-3).unwrap(), 4.557_714_932_729_898) < 1e-13);
    }

    #[test]
    fn domain_errors() {
        let s = vp();
        assert!(matches!(s.lambda_of_t(0.0), Err(Error::Domain { .. })));
        assert!(matches!(s.lambda_of_t(1.5), Err(Error::Domain { .. })));
        assert!(matches!(
            cosine().lambda_of_t(0.995),
            Err(Error::Domain { .. })
        ));
        assert!(s.t_of_lambda(-6.0).is_err());
        assert!(NoiseSchedule::<f64>::VeEdm.lambda_of_t(-1.0).is_err());
        assert!(NoiseSchedule::<f64>::from_name("vp-quadratic").is_err());
    }

    #[test]
    fn cosine_inverse_matches_closed_form() {
        let s = cosine();
        let shift = VP_COSINE_DEFAULT_S;
        for &t in &[1e-4, 0.01, 0.3, 0.7, 0.95, 0.992] {
            let lambda = s.lambda_of_t(t).unwrap();
            // α from λ, then θ = acos(α cos θ₀).
            let (alpha, _) = s.alpha_sigma_of_lambda(lambda);
            let theta0 = std::f64::consts::FRAC_PI_2 * shift / (1.0 + shift);
            let closed =
                (alpha * theta0.cos()).acos() / std::f64::consts::FRAC_PI_2 * (1.0 + shift) - shift;
            assert!(rel(s.t_of_lambda(lambda).unwrap(), t) < 1e-10, "t = {t}");
            assert!(rel(closed, t) < 1e-8, "closed form t = {t}");
        }
    }

    #[test]
    fn drift_matches_finite_difference() {
        for s in [vp(), cosine()] {
            for &t in &[0.05, 0.4, 0.9] {
                let h = 1e-6;
                let fd = (s.log_alpha(t + h).unwrap() - s.log_alpha(t - h).unwrap()) / (2.0 * h);
                assert!(rel(s.drift(t).unwrap(), fd) < 1e-7);
                let fd_l =
                    (s.lambda_of_t(t + h).unwrap() - s.lambda_of_t(t - h).unwrap()) / (2.0 * h);
                assert!(rel(s.dlambda_dt(t).unwrap(), fd_l) < 1e-6);
            }
        }
    }

    #[test]
    fn uniform_t_examples() {
        let g = uniform_t_grid(&vp(), 2, 1.0, 0.001).unwrap();
        assert_eq!(g.times(), &[1.0, 0.5005, 0.001]);
        let g = uniform_t_grid(&vp(), 1, 1.0, 0.001).unwrap();
        assert_eq!(g.times(), &[1.0, 0.001]);
        let g = uniform_t_grid(&NoiseSchedule::VeEdm, 2, 80.0, 0.002).unwrap();
        assert_eq!(g.times(), &[80.0, 40.001, 0.002]);
        assert!(matches!(
            uniform_t_grid(&vp(), 2, 0.001, 1.0),
            Err(Error::InvalidRange { .. })
        ));
        assert!(uniform_t_grid(&vp(), 0, 1.0, 0.001).is_err());
    }

    #[test]
    fn uniform_lambda_examples() {
        let ve = NoiseSchedule::VeEdm;
        let g = uniform_lambda_grid(&ve, 2, 80.0, 0.002).unwrap();
        assert!(rel(g.times()[1], 0.4) < 1e-13);
        let g = uniform_lambda_grid(&vp(), 1, 1.0, 0.001).unwrap();
        assert_eq!(
            g.lambdas(),
            &[
                vp().lambda_of_t(1.0).unwrap(),
                vp().lambda_of_t(0.001).unwrap()
            ]
        );
        let g = uniform_lambda_grid(&ve, 4, 80.0, 0.002).unwrap();
        let ratio = (0.002f64 / 80.0).powf(0.25);
        for (i, &t) in g.times().iter().enumerate() {
            assert!(rel(t, 80.0 * ratio.powi(i as i32)) < 1e-12);
        }
    }

    #[test]
    fn edm_examples() {
        let ve = NoiseSchedule::VeEdm;
        let g = edm_grid(&ve, 2, 80.0, 0.002, 7).unwrap();
        // ((80^{1/7} + 0.002^{1/7}) / 2)^7 evaluated with 40-digit arithmetic.
        assert!(rel(g.times()[1], 2.515_218_976_147_158_6) < 1e-12);
        let g = edm_grid(&ve, 1, 80.0, 0.002, 7).unwrap();
        assert_eq!(g.times(), &[80.0, 0.002]);
        // ρ = 1 is uniform in κ, which for VE is uniform in t.
        let g1 = edm_grid(&ve, 5, 80.0, 0.002, 1).unwrap();
        let gt = uniform_t_grid(&ve, 5, 80.0, 0.002).unwrap();
        for (a, b) in g1.times().iter().zip(gt.times()) {
            assert!(rel(*a, *b) < 1e-12);
        }
        assert!(edm_grid(&ve, 3, 80.0, 0.002, 0).is_err());
    }

    #[test]
    fn grid_rejects_bad_endpoints() {
        let s = vp();
        let l0 = s.lambda_of_t(1.0).unwrap();
        assert!(LambdaGrid::from_lambdas(&s, 1.0, 1e-3, vec![l0, 0.0, 1.0]).is_err());
        assert!(matches!(
            LambdaGrid::from_interior(&s, 1.0, 1e-3, &[1.0, 0.0]),
            Err(Error::NotIncreasing { .. })
        ));
    }

    #[test]
    fn f32_schedule_smoke() {
        let s = NoiseSchedule::<f32>::from_name("vp-linear").unwrap();
        let g = uniform_lambda_grid(&s, 4, 1.0, 1e-3).unwrap();
        assert_eq!(g.steps(), 4);
        assert!((s.t_of_lambda(s.lambda_of_t(0.3).unwrap()).unwrap() - 0.3).abs() < 1e-5);
    }
}
