//! Multistep solver weights `w_{n;k_n,j} = ∫_{λ_{n−1}}^{λ_n} e^λ ℓ_{n;k_n,j}(λ) dλ`.
//!
//! Weights are returned pre-multiplied by `e^{−λ*}` for a caller-chosen
//! anchor `λ*` (by default the last node `λ_N`, the largest value), which keeps
//! every magnitude of order one regardless of how far `λ` ranges.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::schedules::LambdaGrid;

/// Highest local order supported by the weight builders.
pub const MAX_ORDER: usize = 4;

/// Highest local order the Taylor variant has derivative stencils for.
pub const MAX_TAYLOR_ORDER: usize = 3;

const MAX_DEGREE: usize = MAX_ORDER - 1;

/// Local orders `k_1 … k_N` with `1 ≤ k_n ≤ min(n, 4)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderSchedule(Vec<usize>);

impl OrderSchedule {
    pub fn new(orders: Vec<usize>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::InvalidArgument("order schedule is empty".into()));
        }
        for (i, &k) in orders.iter().enumerate() {
            let step = i + 1;
            if k == 0 || k > step {
                return Err(Error::InvalidOrders {
                    step,
                    reason: format!("k = {k} violates 1 <= k <= n"),
                });
            }
            if k > MAX_ORDER {
                return Err(Error::InvalidOrders {
                    step,
                    reason: format!("k = {k} exceeds the supported maximum {MAX_ORDER}"),
                });
            }
        }
        Ok(OrderSchedule(orders))
    }

    /// Warm-up pattern `k_n = min(n, order)` of a fixed-order multistep method.
    pub fn warmup(order: usize, steps: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("order must be at least 1".into()));
        }
        Self::new((1..=steps).map(|n| n.min(order)).collect())
    }

    /// Parses either a single order (expanded with [`warmup`](Self::warmup))
    /// or an explicit comma-separated list `k1,k2,…`.
    pub fn parse(text: &str, steps: usize) -> Result<Self> {
        let parts = text
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad order `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if parts.len() == 1 {
            Self::warmup(parts[0], steps)
        } else if parts.len() == steps {
            Self::new(parts)
        } else {
            Err(Error::InvalidArgument(format!(
                "order list has {} entries but N = {steps}",
                parts.len()
            )))
        }
    }

    pub fn steps(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Order of step `n` (1-based).
    pub fn order(&self, n: usize) -> usize {
        self.0[n - 1]
    }

    pub fn max_order(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Local polynomial used to approximate the data prediction on each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PolynomialKind {
    /// Interpolates the `k_n` most recent evaluations.
    #[default]
    Lagrange,
    /// Truncated Taylor expansion at `λ_{n−1}` with finite-difference derivatives.
    Taylor,
}

impl PolynomialKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolynomialKind::Lagrange => "lagrange",
            PolynomialKind::Taylor => "taylor",
        }
    }
}

impl fmt::Display for PolynomialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolynomialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lagrange" => Ok(PolynomialKind::Lagrange),
            "taylor" => Ok(PolynomialKind::Taylor),
            other => Err(Error::InvalidArgument(format!(
                "unknown polynomial kind `{other}` (expected lagrange or taylor)"
            ))),
        }
    }
}

/// `∫_0^h e^{−u} u^m du`, the lower incomplete gamma function `γ(m+1, h)`.
fn lower_incomplete_gamma<T: Real>(m: usize, h: T) -> T {
    let mp1 = T::from_usize_lossy(m + 1);
    if h <= T::lit(20.0) {
        // e^{−h} h^{m+1} Σ_k h^k / ((m+1)(m+2)…(m+1+k)); every term positive.
        let mut term = T::one() / mp1;
        let mut sum = term;
        let mut k = 1usize;
        while k < 400 {
            term = term * h / T::from_usize_lossy(m + 1 + k);
            sum += term;
            if term <= T::epsilon() * sum {
                break;
            }
            k += 1;
        }
        (-h).exp() * h.powi(m as i32 + 1) * sum
    } else {
        // m! (1 − e^{−h} Σ_{i≤m} h^i / i!)
        let mut partial = T::one();
        let mut term = T::one();
        let mut factorial = T::one();
        for i in 1..=m {
            term = term * h / T::from_usize_lossy(i);
            partial += term;
            factorial *= T::from_usize_lossy(i);
        }
        factorial * (T::one() - (-h).exp() * partial)
    }
}

/// Coefficients of `p(x + shift)` given those of `p(x)` (lowest degree first).
fn taylor_shift<T: Real>(coeffs: &mut [T], shift: T) {
    let deg = coeffs.len().saturating_sub(1);
    for i in 0..deg {
        for j in (i..deg).rev() {
            let next = coeffs[j + 1];
            coeffs[j] += shift * next;
        }
    }
}

/// Exact value of `∫_a^b e^{λ − shift} p(λ) dλ` for a polynomial `p` of
/// degree at most 3 (coefficients lowest degree first).
///
/// The polynomial is re-expanded about `b`, so each monomial contributes
/// `e^{b−shift} (−1)^m γ(m+1, b−a)`. The incomplete gamma values come from the
/// closed-form antiderivative `m!(1 − e^{−h} Σ h^i/i!)` on long intervals and
/// from its positive power series on short ones, where the closed form cancels.
pub fn exp_poly_integral<T: Real>(coeffs: &[T], a: T, b: T, shift: T) -> Result<T> {
    if coeffs.len() > MAX_DEGREE + 1 {
        return Err(Error::DegreeOverflow {
            degree: coeffs.len() - 1,
            max: MAX_DEGREE,
        });
    }
    if !(a.is_finite() && b.is_finite() && shift.is_finite()) {
        return Err(Error::NonFinite("integral bounds".into()));
    }
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "integration interval [{a}, {b}] is empty or reversed"
        )));
    }
    let mut local = [T::zero(); MAX_DEGREE + 1];
    local[..coeffs.len()].copy_from_slice(coeffs);
    let local = &mut local[..coeffs.len()];
    taylor_shift(local, b);

    let h = b - a;
    let mut total = T::zero();
    for (m, &c) in local.iter().enumerate() {
        if c == T::zero() {
            continue;
        }
        let g = lower_incomplete_gamma(m, h);
        total += if m % 2 == 0 { c * g } else { -c * g };
    }
    let value = (b - shift).exp() * total;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(format!(
            "exp_poly_integral on [{a}, {b}] with shift {shift}"
        )))
    }
}

/// Expanded coefficients of the `j`-th Lagrange basis polynomial
/// `Π_{i≠j} (λ − x_i) / (x_j − x_i)`.
pub fn lagrange_basis<T: Real>(nodes: &[T], j: usize) -> Result<Vec<T>> {
    if j >= nodes.len() {
        return Err(Error::InvalidArgument(format!(
            "basis index {j} out of range for {} nodes",
            nodes.len()
        )));
    }
    for (i, &x) in nodes.iter().enumerate() {
        if nodes[..i].contains(&x) {
            return Err(Error::DuplicateNodes(i));
        }
    }
    let mut poly = vec![T::one()];
    for (i, &root) in nodes.iter().enumerate() {
        if i == j {
            continue;
        }
        let denom = nodes[j] - root;
        let mut next = vec![T::zero(); poly.len() + 1];
        for (d, &c) in poly.iter().enumerate() {
            next[d + 1] += c / denom;
            next[d] -= c * root / denom;
        }
        poly = next;
    }
    Ok(poly)
}

/// Coefficients of the three-point second-derivative estimate at `λ_{n−1}`
/// applied to `(f_{n−3}, f_{n−2}, f_{n−1})`, where
/// `h_{n−2} = λ_{n−1} − λ_{n−2}` and `h_{n−3} = λ_{n−2} − λ_{n−3}`.
pub fn second_derivative_stencil<T: Real>(h_prev: T, h_prev2: T) -> [T; 3] {
    let two = T::lit(2.0);
    let sum = h_prev + h_prev2;
    [
        two / (h_prev2 * sum),
        -two / (h_prev * h_prev2),
        two / (h_prev * sum),
    ]
}

fn check_step<T: Real>(lambdas: &[T], n: usize, k: usize) -> Result<()> {
    if n == 0 || n >= lambdas.len() {
        return Err(Error::InvalidArgument(format!(
            "step {n} out of range for a grid with {} steps",
            lambdas.len().saturating_sub(1)
        )));
    }
    if k == 0 || k > n || k > MAX_ORDER {
        return Err(Error::InvalidOrders {
            step: n,
            reason: format!("k = {k} violates 1 <= k <= min(n, {MAX_ORDER})"),
        });
    }
    Ok(())
}

/// Weights `w_{n;k,j} e^{−anchor}` for `j = 0…k−1` of step `n` (1-based),
/// multiplying `f(λ_{n−k+j})`.
pub fn step_weights<T: Real>(
    kind: PolynomialKind,
    lambdas: &[T],
    n: usize,
    k: usize,
    anchor: T,
) -> Result<Vec<T>> {
    check_step(lambdas, n, k)?;
    match kind {
        PolynomialKind::Lagrange => lagrange_step(lambdas, n, k, anchor),
        PolynomialKind::Taylor => taylor_step(lambdas, n, k, anchor),
    }
}

fn lagrange_step<T: Real>(lambdas: &[T], n: usize, k: usize, anchor: T) -> Result<Vec<T>> {
    let end = lambdas[n];
    // Work in u = λ − λ_n so the expanded basis stays well conditioned.
    let nodes: Vec<T> = lambdas[n - k..n].iter().map(|&l| l - end).collect();
    let start = lambdas[n - 1] - end;
    let shift = anchor - end;
    (0..k)
        .map(|j| {
            let basis = lagrange_basis(&nodes, j)?;
            exp_poly_integral(&basis, start, T::zero(), shift)
        })
        .collect()
}

fn taylor_step<T: Real>(lambdas: &[T], n: usize, k: usize, anchor: T) -> Result<Vec<T>> {
    if k > MAX_TAYLOR_ORDER {
        return Err(Error::InvalidOrders {
            step: n,
            reason: format!("Taylor variant supports k <= {MAX_TAYLOR_ORDER}, got {k}"),
        });
    }
    let origin = lambdas[n - 1];
    let width = lambdas[n] - origin;
    let shift = anchor - origin;
    // ∫ e^{λ−anchor} (λ − λ_{n−1})^m / m! dλ over the step.
    let moment = |m: usize| -> Result<T> {
        let mut coeffs = vec![T::zero(); m + 1];
        let factorial: T = (1..=m)
            .map(T::from_usize_lossy)
            .fold(T::one(), |a, b| a * b);
        coeffs[m] = T::one() / factorial;
        exp_poly_integral(&coeffs, T::zero(), width, shift)
    };
    let i0 = moment(0)?;
    match k {
        1 => Ok(vec![i0]),
        2 => {
            let h_prev = lambdas[n - 1] - lambdas[n - 2];
            let d1 = moment(1)? / h_prev;
            Ok(vec![-d1, i0 + d1])
        }
        _ => {
            let h_prev = lambdas[n - 1] - lambdas[n - 2];
            let h_prev2 = lambdas[n - 2] - lambdas[n - 3];
            let d1 = moment(1)? / h_prev;
            let i2 = moment(2)?;
            let [s3, s2, s1] = second_derivative_stencil(h_prev, h_prev2);
            Ok(vec![i2 * s3, -d1 + i2 * s2, i0 + d1 + i2 * s1])
        }
    }
}

/// Solver weights for every step, stored as `w · e^{−anchor}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable<T> {
    steps: Vec<Vec<T>>,
    anchor: T,
}

impl<T: Real> WeightTable<T> {
    pub fn anchor(&self) -> T {
        self.anchor
    }

    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    /// Scaled weights of step `n` (1-based), indexed by `j`.
    pub fn step(&self, n: usize) -> &[T] {
        &self.steps[n - 1]
    }

    pub fn weight(&self, n: usize, j: usize) -> T {
        self.steps[n - 1][j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> {
        self.steps.iter().map(Vec::as_slice)
    }

    pub fn to_dump(&self) -> WeightDump {
        WeightDump {
            anchor: self.anchor.as_f64(),
            steps: self
                .steps
                .iter()
                .map(|w| {
                    w.iter()
                        .enumerate()
                        .map(|(j, &x)| (j, x.as_f64()))
                        .collect()
                })
                .collect(),
        }
    }
}

/// JSON shape of a weight table: `{"anchor": λ*, "steps": [[[j, w], …], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightDump {
    pub anchor: f64,
    pub steps: Vec<Vec<(usize, f64)>>,
}

/// Builds the weight table for an arbitrary `λ` sequence and anchor.
pub fn weight_table<T: Real>(
    kind: PolynomialKind,
    lambdas: &[T],
    orders: &OrderSchedule,
    anchor: T,
) -> Result<WeightTable<T>> {
    let n_steps = lambdas.len().saturating_sub(1);
    if orders.steps() != n_steps {
        return Err(Error::InvalidArgument(format!(
            "order schedule has {} entries for a grid with {n_steps} steps",
            orders.steps()
        )));
    }
    let steps = (1..=n_steps)
        .map(|n| step_weights(kind, lambdas, n, orders.order(n), anchor))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightTable { steps, anchor })
}

/// Lagrange weights anchored at `λ_N`.
pub fn weights_lagrange<T: Real>(
    grid: &LambdaGrid<T>,
    orders: &OrderSchedule,
) -> Result<WeightTable<T>> {
    weight_table(
        PolynomialKind::Lagrange,
        grid.lambdas(),
        orders,
        grid.lambda_end(),
    )
}

/// Taylor weights anchored at `λ_N`.
pub fn weights_taylor<T: Real>(
    grid: &LambdaGrid<T>,
    orders: &OrderSchedule,
) -> Result<WeightTable<T>> {
    weight_table(
        PolynomialKind::Taylor,
        grid.lambdas(),
        orders,
        grid.lambda_end(),
    )
}

/// Total weight multiplying each evaluation point `i = n − k_n + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedCoefficients<T> {
    signed: Vec<T>,
    anchor: T,
}

impl<T: Real> AggregatedCoefficients<T> {
    /// Signed group sums `Σ_{n−k_n+j=i} w_{n;k_n,j}`, scaled by `e^{−anchor}`.
    pub fn signed(&self) -> &[T] {
        &self.signed
    }

    /// `c_i = |signed_i|`.
    pub fn magnitude(&self, i: usize) -> T {
        self.signed[i].abs()
    }

    pub fn magnitudes(&self) -> Vec<T> {
        self.signed.iter().map(|c| c.abs()).collect()
    }

    pub fn anchor(&self) -> T {
        self.anchor
    }

    pub fn len(&self) -> usize {
        self.signed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signed.is_empty()
    }
}

pub fn aggregate<T: Real>(
    table: &WeightTable<T>,
    orders: &OrderSchedule,
) -> Result<AggregatedCoefficients<T>> {
    let n_steps = table.steps();
    if orders.steps() != n_steps {
        return Err(Error::InvalidArgument(format!(
            "order schedule has {} entries for a table with {n_steps} steps",
            orders.steps()
        )));
    }
    let mut signed = vec![T::zero(); n_steps];
    for n in 1..=n_steps {
        let k = orders.order(n);
        let w = table.step(n);
        if w.len() != k {
            return Err(Error::InvalidArgument(format!(
                "step {n} has {} weights but order {k}",
                w.len()
            )));
        }
        for (j, &wj) in w.iter().enumerate() {
            signed[n - k + j] += wj;
        }
    }
    Ok(AggregatedCoefficients {
        signed,
        anchor: table.anchor(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn integral_examples() {
        assert!(close(
            exp_poly_integral(&[1.0], 0.0, 1.0, 0.0).unwrap(),
            E - 1.0,
            1e-15
        ));
        assert!(close(
            exp_poly_integral(&[0.0, 1.0], 0.0, 1.0, 0.0).unwrap(),
            1.0,
            1e-15
        ));
        assert!(close(
            exp_poly_integral(&[0.0, 0.0, 1.0], 0.0, 1.0, 0.0).unwrap(),
            E - 2.0,
            1e-15
        ));
        assert!(exp_poly_integral::<f64>(&[], 0.0, 1.0, 0.0).unwrap() == 0.0);
    }

    #[test]
    fn integral_errors() {
        assert!(matches!(
            exp_poly_integral(&[1.0; 5], 0.0, 1.0, 0.0),
            Err(Error::DegreeOverflow { degree: 4, .. })
        ));
        assert!(matches!(
            exp_poly_integral(&[1.0], 0.0, 800.0, 0.0),
            Err(Error::NonFinite(_))
        ));
        assert!(exp_poly_integral(&[1.0], 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn tiny_interval_has_no_cancellation() {
        // ∫_a^{a+h} e^λ λ³ dλ ≈ e^a a³ h for tiny h.
        let a: f64 = 3.0;
        let h = 1e-9;
        let got = exp_poly_integral(&[0.0, 0.0, 0.0, 1.0], a, a + h, 0.0).unwrap();
        let mid = a + h / 2.0;
        let approx = mid.exp() * mid.powi(3) * h;
        assert!(close(got, approx, 1e-12), "{got} vs {approx}");
    }

    #[test]
    fn lagrange_basis_examples() {
        assert_eq!(lagrange_basis(&[0.0, 1.0], 1).unwrap(), vec![0.0, 1.0]);
        assert_eq!(lagrange_basis(&[0.0, 1.0], 0).unwrap(), vec![1.0, -1.0]);
        assert_eq!(
            lagrange_basis(&[0.0, 1.0, 2.0], 1).unwrap(),
            vec![0.0, 2.0, -1.0]
        );
        assert!(matches!(
            lagrange_basis(&[0.0, 1.0, 0.0], 1),
            Err(Error::DuplicateNodes(2))
        ));
        assert!(lagrange_basis(&[0.0, 1.0], 2).is_err());
    }

    #[test]
    fn lagrange_basis_is_cardinal() {
        let nodes = [-1.3, 0.2, 0.9, 2.4];
        for j in 0..nodes.len() {
            let p = lagrange_basis(&nodes, j).unwrap();
            for (i, &x) in nodes.iter().enumerate() {
                let v: f64 = p.iter().rev().fold(0.0, |acc, &c| acc * x + c);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn second_order_lagrange_step_example() {
        let lambdas = [0.0, 1.0, 2.0];
        let w = step_weights(PolynomialKind::Lagrange, &lambdas, 2, 2, 0.0).unwrap();
        assert!(close(w[0], -E, 1e-14));
        assert!(close(w[1], E * E, 1e-14));
    }

    #[test]
    fn first_order_weight_is_exact_increment() {
        let lambdas = [-2.0, -0.5, 1.5];
        for kind in [PolynomialKind::Lagrange, PolynomialKind::Taylor] {
            let w = step_weights(kind, &lambdas, 2, 1, 0.0).unwrap();
            assert!(close(w[0], 1.5f64.exp() - (-0.5f64).exp(), 1e-15));
        }
    }

    #[test]
    fn taylor_second_order_equals_lagrange() {
        let lambdas = [-3.0, -1.7, -1.1, 0.4, 0.9];
        for n in 2..lambdas.len() {
            let a = step_weights(PolynomialKind::Lagrange, &lambdas, n, 2, 0.9).unwrap();
            let b = step_weights(PolynomialKind::Taylor, &lambdas, n, 2, 0.9).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!(close(*x, *y, 1e-12));
            }
        }
    }

    #[test]
    fn taylor_third_order_differs_and_stencil_is_zero_sum() {
        let lambdas: [f64; 4] = [-3.0, -1.7, -1.1, 0.4];
        let a = step_weights(PolynomialKind::Lagrange, &lambdas, 3, 3, 0.4).unwrap();
        let b = step_weights(PolynomialKind::Taylor, &lambdas, 3, 3, 0.4).unwrap();
        assert!(a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 1e-6));
        let s = second_derivative_stencil(0.6, 1.3);
        assert!(s.iter().sum::<f64>().abs() < 1e-12);
        assert!(matches!(
            step_weights(
                PolynomialKind::Taylor,
                &[0.0, 1.0, 2.0, 3.0, 4.0],
                4,
                4,
                4.0
            ),
            Err(Error::InvalidOrders { step: 4, .. })
        ));
    }

    #[test]
    fn aggregate_bookkeeping() {
        let lambdas = vec![-1.0, 0.0, 0.7, 1.2];
        let orders = OrderSchedule::new(vec![1, 2, 3]).unwrap();
        let table = weight_table(PolynomialKind::Lagrange, &lambdas, &orders, 1.2).unwrap();
        let agg = aggregate(&table, &orders).unwrap();
        let w = |n, j| table.weight(n, j);
        assert_eq!(agg.signed()[0], w(1, 0) + w(2, 0) + w(3, 0));
        assert_eq!(agg.signed()[1], w(2, 1) + w(3, 1));
        assert_eq!(agg.signed()[2], w(3, 2));

        let first = OrderSchedule::warmup(1, 3).unwrap();
        let table = weight_table(PolynomialKind::Lagrange, &lambdas, &first, 0.0).unwrap();
        let agg = aggregate(&table, &first).unwrap();
        for i in 0..3 {
            assert!(close(
                agg.magnitude(i),
                lambdas[i + 1].exp() - lambdas[i].exp(),
                1e-15
            ));
        }
    }

    #[test]
    fn order_schedule_validation() {
        assert_eq!(
            OrderSchedule::warmup(3, 5).unwrap().as_slice(),
            &[1, 2, 3, 3, 3]
        );
        assert_eq!(
            OrderSchedule::parse("3", 4).unwrap().as_slice(),
            &[1, 2, 3, 3]
        );
        assert_eq!(
            OrderSchedule::parse("1,2,2", 3).unwrap().as_slice(),
            &[1, 2, 2]
        );
        assert!(OrderSchedule::parse("1,2", 3).is_err());
        assert!(OrderSchedule::new(vec![2, 2]).is_err());
        assert!(OrderSchedule::new(vec![1, 2, 3, 4, 5]).is_err());
        assert!(OrderSchedule::new(vec![]).is_err());
        assert!(OrderSchedule::parse("x", 3).is_err());
    }

    #[test]
    fn dump_shape() {
        let lambdas = vec![0.0, 1.0, 2.0];
        let orders = OrderSchedule::warmup(2, 2).unwrap();
        let table = weight_table(PolynomialKind::Lagrange, &lambdas, &orders, 2.0).unwrap();
        let json = serde_json::to_value(table.to_dump()).unwrap();
        assert_eq!(json["anchor"], 2.0);
        assert_eq!(json["steps"][1][1][0], 1);
        assert_eq!(json["steps"].as_array().unwrap().len(), 2);
    }
}
