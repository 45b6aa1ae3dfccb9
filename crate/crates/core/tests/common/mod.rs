#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stepopt::simulator::{AnalyticModel, Component};
use stepopt::{LambdaGrid, NoiseSchedule, OrderSchedule, PolynomialKind};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1], from
/// Newton iteration on the three-term Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite-free 64-point Gauss–Legendre quadrature of `f` on `[a, b]`.
/// Returns `(∫f, ∫|f|)`; the second value sets the scale of rounding error.
pub fn gl64<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> (f64, f64) {
    let (x, w) = gauss_legendre(64);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut total = 0.0;
    let mut abs_total = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        let v = f(mid + half * xi);
        total += wi * v;
        abs_total += wi * v.abs();
    }
    (half * total, half * abs_total)
}

pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Lagrange interpolant through `(nodes, values)` evaluated at `x`.
pub fn lagrange_eval(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    for (j, (&xj, &vj)) in nodes.iter().zip(values).enumerate() {
        let mut basis = 1.0;
        for (i, &xi) in nodes.iter().enumerate() {
            if i != j {
                basis *= (x - xi) / (xj - xi);
            }
        }
        total += vj * basis;
    }
    total
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vp_linear() -> NoiseSchedule<f64> {
    NoiseSchedule::from_name("vp-linear").unwrap()
}

pub fn all_schedules() -> Vec<NoiseSchedule<f64>> {
    ["vp-linear", "vp-cosine", "ve-edm"]
        .iter()
        .map(|n| NoiseSchedule::from_name(n).unwrap())
        .collect()
}

/// Strictly increasing `λ` sequence with `steps` steps and gaps in `[0.05, 1.5]`.
pub fn random_lambdas(r: &mut ChaCha8Rng, steps: usize) -> Vec<f64> {
    let mut l = vec![r.random_range(-6.0..2.0)];
    for _ in 0..steps {
        let last = *l.last().unwrap();
        l.push(last + r.random_range(0.05..1.5));
    }
    l
}

/// Random order schedule with `k_n ≤ min(n, max_order)`.
pub fn random_orders(r: &mut ChaCha8Rng, steps: usize, max_order: usize) -> OrderSchedule {
    OrderSchedule::new(
        (1..=steps)
            .map(|n| r.random_range(1..=n.min(max_order)))
            .collect(),
    )
    .unwrap()
}

pub fn random_kind(r: &mut ChaCha8Rng) -> PolynomialKind {
    if r.random_bool(0.5) {
        PolynomialKind::Lagrange
    } else {
        PolynomialKind::Taylor
    }
}

/// Random grid between the given endpoints: sorted uniform draws inside the
/// λ range, pushed apart to keep every gap above `min_gap`.
pub fn random_grid(
    r: &mut ChaCha8Rng,
    schedule: &NoiseSchedule<f64>,
    steps: usize,
    t_start: f64,
    t_end: f64,
) -> LambdaGrid<f64> {
    let lo = schedule.lambda_of_t(t_start).unwrap();
    let hi = schedule.lambda_of_t(t_end).unwrap();
    let span = hi - lo;
    let mut cuts: Vec<f64> = (0..steps).map(|_| r.random_range(0.2..1.0)).collect();
    let total: f64 = cuts.iter().sum();
    cuts.iter_mut().for_each(|c| *c *= span / total);
    let mut interior = Vec::with_capacity(steps - 1);
    let mut acc = lo;
    for c in &cuts[..steps - 1] {
        acc += c;
        interior.push(acc);
    }
    LambdaGrid::from_interior(schedule, t_start, t_end, &interior).unwrap()
}

/// Random isotropic 2-D Gaussian mixture used by the schedule-comparison tests:
/// 2 or 3 components, weights ∝ U(0.2, 1), means U[-3, 3]², stds U(0.3, 1).
pub fn random_mixture(seed: u64) -> AnalyticModel<f64> {
    let mut r = rng(seed);
    let k = r.random_range(2..=3usize);
    let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let components = raw
        .iter()
        .map(|w| Component {
            weight: w / total,
            mean: vec![r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)],
            std: r.random_range(0.3..1.0),
        })
        .collect();
    AnalyticModel::new(components).unwrap()
}

/// Relative closeness with an absolute floor of `scale`.
pub fn close(a: f64, b: f64, rel: f64, scale: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(scale)
}
