//! Convex subproblems of the composite trust-region method.
//!
//! The objective is `Σ_i |p_i(x)|` (up to smoothing), linearized as
//! `Σ_i |p_i + J_i s|`. Terms whose kink cannot be reached inside the region
//! are replaced by their signed linear part; the others get an epigraph
//! variable `τ_i ≥ |p_i + J_i s|`. Both problems are handed to an
//! interior-point conic solver in scaled units `s = r·σ`, so that the region
//! is always of unit size.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT::NonnegativeConeT,
};

/// Linear model of the terms around the current point, in `f64`.
pub(crate) struct LinearModel<'a> {
    /// Term values `p_i`.
    pub p: &'a [f64],
    /// Row-major `N × d` Jacobian of `p`.
    pub jac: &'a [f64],
    /// Slack `λ_{g+1} − λ_g − δ` of every gap `g = 0…d`.
    pub slack: &'a [f64],
}

impl LinearModel<'_> {
    fn dim(&self) -> usize {
        self.slack.len() - 1
    }

    fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.jac[i * d..(i + 1) * d]
    }
}

pub(crate) struct StepSolution {
    pub step: Vec<f64>,
    /// Multipliers `u_i ∈ [−1, 1]` of the terms (`sign p_i` for unreachable kinks).
    pub multipliers: Vec<f64>,
    /// Terms whose linearization the step drives to zero (`|u_i| < 1`).
    pub landed: Vec<usize>,
}

/// Sparse constraint rows `A z ≤ b`, collected as triplets.
struct Rows {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    rhs: Vec<f64>,
}

impl Rows {
    fn new() -> Self {
        Rows {
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
            rhs: Vec::new(),
        }
    }

    fn push(&mut self, entries: impl IntoIterator<Item = (usize, f64)>, rhs: f64) -> usize {
        let r = self.rhs.len();
        for (c, v) in entries {
            if v != 0.0 {
                self.rows.push(r);
                self.cols.push(c);
                self.vals.push(v);
            }
        }
        self.rhs.push(rhs);
        r
    }

    fn matrix(self, n: usize) -> (CscMatrix<f64>, Vec<f64>) {
        let m = self.rhs.len();
        (
            CscMatrix::new_from_triplets(m, n, self.rows, self.cols, self.vals),
            self.rhs,
        )
    }
}

/// Shared structure of both subproblems: variables `[σ (d), τ (kinks)]`.
struct Layout {
    d: usize,
    /// Term indices with an epigraph variable, in order.
    kinks: Vec<usize>,
    /// Linear objective coefficients over `σ` and `τ`.
    q: Vec<f64>,
    rows: Rows,
    /// Row pairs `(+, −)` of the epigraph constraints of each kink.
    kink_rows: Vec<(usize, usize)>,
    /// Constant `Σ_{kinks} |p_i| / r` of the scaled model at `σ = 0`.
    kink_base: f64,
}

/// Builds the scaled linearization over a region whose `J_i`-image has radius
/// `reach(J_i) · r`.
fn layout(model: &LinearModel<'_>, r: f64, reach: impl Fn(&[f64]) -> f64) -> Layout {
    let d = model.dim();
    let mut q = vec![0.0; d];
    let mut kinks = Vec::new();
    for (i, &p) in model.p.iter().enumerate() {
        let row = model.row(i);
        if p.abs() > reach(row) * r * (1.0 + 1e-9) {
            let sign = p.signum();
            for (qj, &a) in q.iter_mut().zip(row) {
                *qj += sign * a;
            }
        } else {
            kinks.push(i);
        }
    }
    q.extend(std::iter::repeat_n(1.0, kinks.len()));

    let mut rows = Rows::new();
    let mut kink_rows = Vec::with_capacity(kinks.len());
    let mut kink_base = 0.0;
    for (k, &i) in kinks.iter().enumerate() {
        let row = model.row(i);
        let tau = d + k;
        let shift = model.p[i] / r;
        let plus = rows.push(row.iter().copied().enumerate().chain([(tau, -1.0)]), -shift);
        let minus = rows.push(
            row.iter().map(|a| -a).enumerate().chain([(tau, -1.0)]),
            shift,
        );
        kink_rows.push((plus, minus));
        kink_base += shift.abs();
    }
    // Gap g joins nodes g and g+1; node k is variable k−1 for 1 ≤ k ≤ d.
    for (g, &slack) in model.slack.iter().enumerate() {
        let bound = slack.max(0.0) / r;
        if bound >= 2.0 {
            continue;
        }
        let mut entries = Vec::with_capacity(2);
        if g >= 1 {
            entries.push((g - 1, 1.0));
        }
        if g < d {
            entries.push((g, -1.0));
        }
        rows.push(entries, bound);
    }
    Layout {
        d,
        kinks,
        q,
        rows,
        kink_rows,
        kink_base,
    }
}

fn settings() -> DefaultSettings<f64> {
    DefaultSettings {
        verbose: false,
        max_iter: 200,
        tol_gap_abs: 1e-11,
        tol_gap_rel: 1e-11,
        tol_feas: 1e-11,
        ..DefaultSettings::default()
    }
}

fn solve(
    hess: &CscMatrix<f64>,
    q: &[f64],
    rows: Rows,
    n: usize,
) -> Option<(Vec<f64>, Vec<f64>, f64, SolverStatus)> {
    let (a, b) = rows.matrix(n);
    let cones = [NonnegativeConeT(b.len())];
    let mut solver = DefaultSolver::new(hess, q, &a, &b, &cones, settings()).ok()?;
    solver.solve();
    let sol = &solver.solution;
    let usable = matches!(
        sol.status,
        SolverStatus::Solved | SolverStatus::AlmostSolved
    ) && sol.x.iter().all(|v| v.is_finite());
    usable.then(|| (sol.x.clone(), sol.z.clone(), sol.obj_val, sol.status))
}

/// Minimizes `Σ|p_i + J_i s| + ½ sᵀBs` over `‖s‖_∞ ≤ radius` and the gap
/// constraints. `hess` is row-major `d × d`, symmetric positive definite.
pub(crate) fn trust_region_step(
    model: &LinearModel<'_>,
    hess: &[f64],
    radius: f64,
) -> Option<StepSolution> {
    let l1_norm = |row: &[f64]| row.iter().map(|a| a.abs()).sum::<f64>();
    let mut lay = layout(model, radius, l1_norm);
    let d = lay.d;
    let n = d + lay.kinks.len();
    for j in 0..d {
        lay.rows.push([(j, 1.0)], 1.0);
        lay.rows.push([(j, -1.0)], 1.0);
    }
    let (mut hi, mut hj, mut hv) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..d {
        for j in i..d {
            let v = 0.5 * (hess[i * d + j] + hess[j * d + i]) * radius;
            if v != 0.0 {
                hi.push(i);
                hj.push(j);
                hv.push(v);
            }
        }
    }
    let p_mat = CscMatrix::new_from_triplets(n, n, hi, hj, hv);
    let (x, z, _, _) = solve(&p_mat, &lay.q, lay.rows, n)?;

    let step: Vec<f64> = x[..d].iter().map(|v| v.clamp(-1.0, 1.0) * radius).collect();
    let mut multipliers: Vec<f64> = model.p.iter().map(|p| p.signum()).collect();
    let mut landed = Vec::new();
    for (&i, &(plus, minus)) in lay.kinks.iter().zip(&lay.kink_rows) {
        let u = (z[plus] - z[minus]).clamp(-1.0, 1.0);
        multipliers[i] = u;
        if u.abs() < 1.0 - 1e-6 {
            landed.push(i);
        }
    }
    Some(StepSolution {
        step,
        multipliers,
        landed,
    })
}

/// Decrease of the linearized objective over the unit ℓ1 ball intersected with
/// the gap constraints. Zero exactly at first-order stationary points; equal to
/// the max-norm of the gradient for a smooth unconstrained objective.
/// `None` when the solver does not reach full accuracy.
pub(crate) fn criticality(model: &LinearModel<'_>) -> Option<f64> {
    let max_norm = |row: &[f64]| row.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut lay = layout(model, 1.0, max_norm);
    let d = lay.d;
    let kinks = lay.kinks.len();
    // Auxiliary w_j ≥ |σ_j| with Σ w_j ≤ 1.
    let w0 = d + kinks;
    let n = w0 + d;
    lay.q.extend(std::iter::repeat_n(0.0, d));
    for j in 0..d {
        lay.rows.push([(j, 1.0), (w0 + j, -1.0)], 0.0);
        lay.rows.push([(j, -1.0), (w0 + j, -1.0)], 0.0);
    }
    lay.rows.push((0..d).map(|j| (w0 + j, 1.0)), 1.0);
    let zero = CscMatrix::zeros((n, n));
    let (_, _, obj, status) = solve(&zero, &lay.q, lay.rows, n)?;
    // The signed linear terms contribute `J_i σ` only, so the model value at
    // σ = 0 is the kink constant alone.
    (status == SolverStatus::Solved).then(|| (lay.kink_base - obj).max(0.0))
}
