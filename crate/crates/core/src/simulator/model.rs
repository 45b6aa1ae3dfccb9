use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::schedules::NoiseSchedule;

/// Maps a noisy state to its predicted clean datum given `(α, σ)`.
pub trait DataPredictor<T>: Sync {
    fn predict(&self, x: &[T], alpha: T, sigma: T) -> Vec<T>;
}

/// Predictor returning the same vector everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantPredictor<T>(pub Vec<T>);

impl<T: Real> DataPredictor<T> for ConstantPredictor<T> {
    fn predict(&self, _x: &[T], _alpha: T, _sigma: T) -> Vec<T> {
        self.0.clone()
    }
}

/// Isotropic Gaussian mixture component.
#[derive(Debug, Clone, PartialEq)]
pub struct Component<T> {
    pub weight: T,
    pub mean: Vec<T>,
    pub std: T,
}

/// Gaussian-mixture data distribution with a closed-form posterior mean.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticModel<T> {
    dim: usize,
    components: Vec<Component<T>>,
}

pub const MAX_DIM: usize = 16;

impl<T: Real> AnalyticModel<T> {
    pub fn new(components: Vec<Component<T>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("model needs at least one component".into()))?;
        let dim = first.mean.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "model dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        let mut total = T::zero();
        for (i, c) in components.iter().enumerate() {
            if c.mean.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "component {i} has dimension {} instead of {dim}",
                    c.mean.len()
                )));
            }
            if !(c.weight >= T::zero()) || !(c.std > T::zero()) {
                return Err(Error::InvalidArgument(format!(
                    "component {i} needs weight >= 0 and std > 0"
                )));
            }
            if c.mean.iter().any(|m| !m.is_finite()) || !c.std.is_finite() {
                return Err(Error::NonFinite(format!("component {i}")));
            }
            total += c.weight;
        }
        if (total - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
            return Err(Error::InvalidArgument(format!(
                "component weights sum to {total}, expected 1"
            )));
        }
        Ok(AnalyticModel { dim, components })
    }

    /// Two well-separated components in 2-D: means `±(2, 2)`, std 0.5.
    pub fn standard_mixture() -> Self {
        let comp = |m: f64| Component {
            weight: T::lit(0.5),
            mean: vec![T::lit(m), T::lit(m)],
            std: T::lit(0.5),
        };
        AnalyticModel::new(vec![comp(2.0), comp(-2.0)]).expect("valid standard mixture")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component<T>] {
        &self.components
    }

    /// Single-Gaussian models admit a closed-form probability-flow solution.
    pub fn single_gaussian(&self) -> Option<&Component<T>> {
        let live: Vec<_> = self
            .components
            .iter()
            .filter(|c| c.weight > T::zero())
            .collect();
        (live.len() == 1).then(|| live[0])
    }

    /// Per-coordinate variance of the noised marginal at `(α, σ)`:
    /// `α² Σ π_k (‖μ_k‖²/dim + s_k²) + σ²`.
    pub fn marginal_variance(&self, alpha: T, sigma: T) -> T {
        let d = T::from_usize_lossy(self.dim);
        let second_moment: T = self
            .components
            .iter()
            .map(|c| {
                let norm2: T = c.mean.iter().map(|&m| m * m).sum();
                c.weight * (norm2 / d + c.std * c.std)
            })
            .sum();
        alpha * alpha * second_moment + sigma * sigma
    }

    /// Posterior mean `E[x_0 | x_t = x]` at time `t`.
    pub fn data_prediction(&self, x: &[T], schedule: &NoiseSchedule<T>, t: T) -> Result<Vec<T>> {
        let alpha = schedule.alpha(t)?;
        let sigma = schedule.sigma(t)?;
        Ok(self.predict(x, alpha, sigma))
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            dim: self.dim,
            components: self
                .components
                .iter()
                .map(|c| ComponentFile {
                    pi: c.weight.as_f64(),
                    mu: c.mean.iter().map(|m| m.as_f64()).collect(),
                    s: c.std.as_f64(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        let model = AnalyticModel::new(
            file.components
                .iter()
                .map(|c| Component {
                    weight: T::lit(c.pi),
                    mean: c.mu.iter().map(|&m| T::lit(m)).collect(),
                    std: T::lit(c.s),
                })
                .collect(),
        )?;
        if model.dim != file.dim {
            return Err(Error::InvalidArgument(format!(
                "declared dim {} does not match component dimension {}",
                file.dim, model.dim
            )));
        }
        Ok(model)
    }
}

impl<T: Real> DataPredictor<T> for AnalyticModel<T> {
    /// `Σ_k r_k(x) (α s_k² x + σ² μ_k) / v_k` with `v_k = α² s_k² + σ²` and
    /// responsibilities `r_k ∝ π_k N(x; α μ_k, v_k I)` normalized in log space.
    fn predict(&self, x: &[T], alpha: T, sigma: T) -> Vec<T> {
        let half = T::lit(0.5);
        let d = T::from_usize_lossy(self.dim);
        let sigma2 = sigma * sigma;
        let mut logits = Vec::with_capacity(self.components.len());
        for c in &self.components {
            if c.weight <= T::zero() {
                logits.push(T::neg_infinity());
                continue;
            }
            let v = alpha * alpha * c.std * c.std + sigma2;
            let dist2: T = x
                .iter()
                .zip(&c.mean)
                .map(|(&xi, &mi)| {
                    let r = xi - alpha * mi;
                    r * r
                })
                .sum();
            logits.push(c.weight.ln() - half * d * v.ln() - half * dist2 / v);
        }
        let top = logits.iter().copied().fold(T::neg_infinity(), T::max);
        let unnorm: Vec<T> = logits.iter().map(|&l| (l - top).exp()).collect();
        let norm: T = unnorm.iter().copied().sum();

        let mut out = vec![T::zero(); self.dim];
        for (c, &u) in self.components.iter().zip(&unnorm) {
            if u == T::zero() {
                continue;
            }
            let r = u / norm;
            let v = alpha * alpha * c.std * c.std + sigma2;
            let a = alpha * c.std * c.std / v;
            let b = sigma2 / v;
            for ((o, &xi), &mi) in out.iter_mut().zip(x).zip(&c.mean) {
                *o += r * (a * xi + b * mi);
            }
        }
        out
    }
}

/// JSON form `{"dim": d, "components": [{"pi": …, "mu": […], "s": …}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub dim: usize,
    pub components: Vec<ComponentFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFile {
    pub pi: f64,
    pub mu: Vec<f64>,
    pub s: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_gaussian_prediction() {
        let model = AnalyticModel::new(vec![Component {
            weight: 1.0,
            mean: vec![0.0],
            std: 1.0,
        }])
        .unwrap();
        let vp = NoiseSchedule::<f64>::from_name("vp-linear").unwrap();
        let (a, s) = vp.alpha_sigma_of_lambda(0.0);
        let out = model.predict(&[1.0], a, s);
        assert!((out[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn vanishing_noise_returns_rescaled_input() {
        let model = AnalyticModel::<f64>::standard_mixture();
        let x = [1.7, 2.3];
        let alpha = 0.9;
        let out = model.predict(&x, alpha, 1e-9);
        for (o, xi) in out.iter().zip(&x) {
            assert!((o - xi / alpha).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_mixture_at_origin() {
        let model = AnalyticModel::<f64>::standard_mixture();
        let out = model.predict(&[0.0, 0.0], 0.6, 0.8);
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn far_states_do_not_underflow() {
        let model = AnalyticModel::<f64>::standard_mixture();
        let out = model.predict(&[400.0, -400.0], 0.999, 0.01);
        assert!(out.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn validation() {
        let c = |w: f64, m: Vec<f64>, s: f64| Component {
            weight: w,
            mean: m,
            std: s,
        };
        assert!(AnalyticModel::new(vec![c(0.5, vec![0.0], 1.0)]).is_err());
        assert!(AnalyticModel::new(vec![c(1.0, vec![0.0], 0.0)]).is_err());
        assert!(
            AnalyticModel::new(vec![c(0.5, vec![0.0], 1.0), c(0.5, vec![0.0, 1.0], 1.0)]).is_err()
        );
        assert!(AnalyticModel::new(vec![c(1.0, vec![0.0; 17], 1.0)]).is_err());
        assert!(AnalyticModel::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let model = AnalyticModel::<f64>::standard_mixture();
        let text = serde_json::to_string(&model.to_file()).unwrap();
        let file: ModelFile = serde_json::from_str(&text).unwrap();
        assert_eq!(AnalyticModel::from_file(&file).unwrap(), model);
        let bad = ModelFile { dim: 3, ..file };
        assert!(AnalyticModel::<f64>::from_file(&bad).is_err());
    }
}
