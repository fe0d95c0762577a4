//! Naïve elastic-net minimization by damped iterative soft-thresholding.
//!
//! Minimizes, for a centered design `X` (n × p) and centered responses `Y`,
//!
//! ```text
//! (1/n)‖Y − Xβ‖² + μ‖β‖² + τ‖β‖₁
//! ```
//!
//! with the fixed-point map
//!
//! ```text
//! β ← 1/(1 + nμ/C) · S_{nτ/C}( β + (1/C)·[XᵀY − XᵀXβ] )
//! ```
//!
//! where `2C` strictly bounds the spectral norm of `XᵀX`. For μ > 0 the map is
//! a contraction. The ridge debiasing step on a selected support and a warm
//! started cascade over decreasing μ live here too.

use nalgebra::{Cholesky, DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::data::{support_of, HyperParams};
use crate::error::{dim_mismatch, Error, Result};
use crate::random::SeededRng;

/// Relative margin added on top of the power-iteration estimate of ‖X‖².
pub const STEP_BOUND_SAFETY: f64 = 0.01;

const POWER_ITERATION_MAX: usize = 10_000;
const POWER_ITERATION_TOL: f64 = 1e-12;
const POWER_ITERATION_SEED: u64 = 0x5eed_c0de;

/// Below this pivot ratio a λ = 0 normal system is treated as singular.
const RIDGE_PIVOT_RATIO: f64 = 1e-12;

/// Component-wise soft-thresholding: entries with `|v_j| < α/2` become zero,
/// the others shrink toward zero by `α/2`.
pub fn soft_threshold(v: ArrayView1<'_, f64>, alpha: f64) -> Array1<f64> {
    assert!(alpha >= 0.0, "soft-threshold level must be non-negative");
    let half = alpha / 2.0;
    v.mapv(|x| shrink(x, half))
}

#[inline]
fn shrink(x: f64, half: f64) -> f64 {
    if x >= half {
        x - half
    } else if x <= -half {
        x + half
    } else {
        0.0
    }
}

/// A constant `C` with `‖XᵀX‖ < 2C` for the design it was built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepBound(f64);

impl StepBound {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Accepts a user-chosen `C` after checking it against a power-iteration
    /// estimate of the largest eigenvalue of `XᵀX`.
    pub fn checked(value: f64, x: ArrayView2<'_, f64>) -> Result<Self> {
        let top = largest_gram_eigenvalue(x)?;
        if !(value.is_finite() && top < 2.0 * value) {
            return Err(Error::InvalidParameter(format!(
                "step bound C = {value} does not satisfy ‖XᵀX‖ ≈ {top} < 2C"
            )));
        }
        Ok(Self(value))
    }
}

/// Largest eigenvalue of `XᵀX` (σ_max(X)²) by power iteration on the smaller
/// of `XᵀX` and `XXᵀ`, started from a fixed pseudo-random vector.
pub fn largest_gram_eigenvalue(x: ArrayView2<'_, f64>) -> Result<f64> {
    let (n, p) = x.dim();
    if n == 0 || p == 0 || x.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateDesign);
    }
    let on_features = p <= n;
    let dim = if on_features { p } else { n };
    let mut rng = SeededRng::new(POWER_ITERATION_SEED);
    let mut v = Array1::from_shape_fn(dim, |_| rng.standard_normal());
    v /= v.dot(&v).sqrt();

    let apply = |v: &Array1<f64>| -> Array1<f64> {
        if on_features {
            x.t().dot(&x.dot(v))
        } else {
            x.dot(&x.t().dot(v))
        }
    };

    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATION_MAX {
        let w = apply(&v);
        let rayleigh = v.dot(&w);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return Err(Error::DegenerateDesign);
        }
        v = w / norm;
        let done = (rayleigh - estimate).abs() <= POWER_ITERATION_TOL * rayleigh;
        estimate = rayleigh;
        if done {
            break;
        }
    }
    Ok(estimate)
}

/// `C = (1 + 0.01)·σ_max(X)²/2`.
pub fn estimate_step_bound(x: ArrayView2<'_, f64>) -> Result<StepBound> {
    let top = largest_gram_eigenvalue(x)?;
    Ok(StepBound((1.0 + STEP_BOUND_SAFETY) * top / 2.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationConfig {
    /// Estimated from the design when absent.
    pub step_bound: Option<StepBound>,
    /// Numerator of the iteration-dependent relative tolerance `δ = num / l`.
    pub tolerance_numerator: f64,
    /// Absolute KKT gate for declaring convergence.
    pub kkt_tolerance: f64,
    pub max_iterations: usize,
    /// All-zero when absent.
    pub initial_point: Option<Array1<f64>>,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            step_bound: None,
            tolerance_numerator: 0.1,
            kkt_tolerance: 1e-5,
            max_iterations: 1_000_000,
            initial_point: None,
        }
    }
}

impl IterationConfig {
    pub fn with_step_bound(mut self, bound: StepBound) -> Self {
        self.step_bound = Some(bound);
        self
    }

    pub fn with_initial_point(mut self, beta: Array1<f64>) -> Self {
        self.initial_point = Some(beta);
        self
    }

    pub fn with_kkt_tolerance(mut self, tol: f64) -> Self {
        self.kkt_tolerance = tol;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance_numerator > 0.0 && self.tolerance_numerator.is_finite()) {
            return Err(Error::InvalidParameter(
                "tolerance numerator must be positive".into(),
            ));
        }
        if !(self.kkt_tolerance >= 0.0) {
            return Err(Error::InvalidParameter("KKT tolerance must be >= 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub solution: Array1<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

impl SolveReport {
    pub fn support(&self) -> Vec<usize> {
        support_of(self.solution.view())
    }
}

/// Evaluates `g(β) = XᵀY − XᵀXβ`, through the Gram matrix when `p ≤ n` and
/// through the residual otherwise. Only nonzero weights are touched.
enum Gradient<'a> {
    Gram {
        gram: Array2<f64>,
        xty: Array1<f64>,
    },
    Residual {
        x: ArrayView2<'a, f64>,
        y: ArrayView1<'a, f64>,
    },
}

impl<'a> Gradient<'a> {
    fn new(x: ArrayView2<'a, f64>, y: ArrayView1<'a, f64>) -> Self {
        let (n, p) = x.dim();
        if p <= n {
            Gradient::Gram {
                gram: x.t().dot(&x),
                xty: x.t().dot(&y),
            }
        } else {
            Gradient::Residual { x, y }
        }
    }

    fn eval(&self, beta: &Array1<f64>, out: &mut Array1<f64>) {
        let active: Vec<(usize, f64)> = beta
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(j, &b)| (j, b))
            .collect();
        match self {
            Gradient::Gram { gram, xty } => {
                out.assign(xty);
                for &(j, b) in &active {
                    out.scaled_add(-b, &gram.row(j));
                }
            }
            Gradient::Residual { x, y } => {
                out.fill(0.0);
                for (row, &yi) in x.rows().into_iter().zip(y.iter()) {
                    let fitted: f64 = active.iter().map(|&(j, b)| row[j] * b).sum();
                    let r = yi - fitted;
                    if r != 0.0 {
                        out.scaled_add(r, &row);
                    }
                }
            }
        }
    }
}

/// Worst violation of the first-order optimality conditions, given
/// `g = XᵀY − XᵀXβ`.
fn kkt_from_gradient(beta: &Array1<f64>, g: &Array1<f64>, n: usize, tau: f64, mu: f64) -> f64 {
    let scale = 2.0 / n as f64;
    beta.iter()
        .zip(g.iter())
        .map(|(&b, &gj)| {
            let smooth = -scale * gj;
            if b != 0.0 {
                (smooth + 2.0 * mu * b + tau * b.signum()).abs()
            } else {
                (smooth.abs() - tau).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// KKT residual of `beta` for the elastic-net objective on centered data:
/// `|(2/n)[XᵀXβ − XᵀY]_j + 2μβ_j + τ·sign(β_j)|` on the support and
/// `max(0, |(2/n)[XᵀY − XᵀXβ]_j| − τ)` off it, maximized over `j`.
pub fn kkt_residual(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    params: &HyperParams,
    beta: ArrayView1<'_, f64>,
) -> Result<f64> {
    let (n, p) = x.dim();
    check_design(x, y)?;
    if beta.len() != p {
        return Err(dim_mismatch("coefficient count", p, beta.len()));
    }
    let beta = beta.to_owned();
    let mut g = Array1::zeros(p);
    Gradient::new(x, y).eval(&beta, &mut g);
    Ok(kkt_from_gradient(&beta, &g, n, params.tau, params.mu))
}

fn check_design(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.len() != x.nrows() {
        return Err(dim_mismatch("response count", x.nrows(), y.len()));
    }
    Ok(())
}

/// Componentwise relative-change test `|Δβ_k| ≤ δ|β_k|`; a component that is
/// zero on both sides counts as settled, one leaving zero never does.
fn relative_change_within(prev: &Array1<f64>, next: &Array1<f64>, delta: f64) -> bool {
    prev.iter().zip(next.iter()).all(|(&a, &b)| {
        if a == 0.0 {
            b == 0.0
        } else {
            (b - a).abs() <= delta * a.abs()
        }
    })
}

/// Runs the damped iterative thresholding scheme on a centered design.
///
/// Stops at the first iteration `l` where every component moved by at most
/// `(tolerance_numerator / l)` of its previous magnitude and the KKT residual
/// is within `kkt_tolerance`. Running out of iterations is reported with
/// `converged = false` and the last iterate.
pub fn elastic_net_solve(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    params: &HyperParams,
    config: &IterationConfig,
) -> Result<SolveReport> {
    check_design(x, y)?;
    config.validate()?;
    let (n, p) = x.dim();
    let step = match config.step_bound {
        Some(c) => c,
        None => estimate_step_bound(x)?,
    };
    let c = step.value();
    let nf = n as f64;
    let damping = 1.0 / (1.0 + nf * params.mu / c);
    let half_threshold = nf * params.tau / (2.0 * c);

    let mut beta = match &config.initial_point {
        Some(b) if b.len() != p => return Err(dim_mismatch("initial point length", p, b.len())),
        Some(b) => b.clone(),
        None => Array1::zeros(p),
    };
    let gradient = Gradient::new(x, y);
    let mut g = Array1::zeros(p);
    gradient.eval(&beta, &mut g);
    let mut next = Array1::zeros(p);

    for iteration in 1..=config.max_iterations {
        for ((nj, &bj), &gj) in next.iter_mut().zip(beta.iter()).zip(g.iter()) {
            *nj = damping * shrink(bj + gj / c, half_threshold);
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { iteration });
        }
        gradient.eval(&next, &mut g);
        let delta = config.tolerance_numerator / iteration as f64;
        let settled = relative_change_within(&beta, &next, delta);
        std::mem::swap(&mut beta, &mut next);
        if settled {
            let kkt = kkt_from_gradient(&beta, &g, n, params.tau, params.mu);
            if kkt <= config.kkt_tolerance {
                return Ok(SolveReport {
                    solution: beta,
                    iterations: iteration,
                    converged: true,
                    kkt_residual: kkt,
                });
            }
        }
    }
    let kkt = kkt_from_gradient(&beta, &g, n, params.tau, params.mu);
    Ok(SolveReport {
        solution: beta,
        iterations: config.max_iterations,
        converged: false,
        kkt_residual: kkt,
    })
}

/// Minimizer of `(1/n)‖Y − X̃β̃‖² + λ‖β̃‖²` for a design already restricted to
/// the selected support, i.e. the solution of `(X̃ᵀX̃ + nλI)β̃ = X̃ᵀY`.
///
/// Uses a Cholesky factorization of the `s × s` system, or of the `n × n` dual
/// system `(X̃X̃ᵀ + nλI)α = Y`, `β̃ = X̃ᵀα`, when the support is wider than `n`.
pub fn ridge_solve(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, lambda: f64) -> Result<Array1<f64>> {
    check_design(x, y)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let (n, s) = x.dim();
    if s == 0 {
        return Err(Error::InvalidParameter("ridge solve on an empty support".into()));
    }
    let shift = n as f64 * lambda;
    if s <= n {
        let gram = x.t().dot(&x);
        let rhs = x.t().dot(&y);
        solve_spd(&gram, shift, rhs.view(), lambda == 0.0)
    } else {
        let kernel = x.dot(&x.t());
        let alpha = solve_spd(&kernel, shift, y, lambda == 0.0)?;
        Ok(x.t().dot(&alpha))
    }
}

fn solve_spd(
    matrix: &Array2<f64>,
    shift: f64,
    rhs: ArrayView1<'_, f64>,
    check_pivots: bool,
) -> Result<Array1<f64>> {
    let m = matrix.nrows();
    let a = DMatrix::from_fn(m, m, |i, j| matrix[[i, j]] + if i == j { shift } else { 0.0 });
    let max_diag = (0..m).map(|i| a[(i, i)]).fold(0.0, f64::max);
    let chol = Cholesky::new(a).ok_or(Error::IllPosed)?;
    if check_pivots {
        let l = chol.l_dirty();
        if (0..m).any(|i| l[(i, i)] * l[(i, i)] <= RIDGE_PIVOT_RATIO * max_diag) {
            return Err(Error::IllPosed);
        }
    }
    let b = DVector::from_iterator(m, rhs.iter().copied());
    let sol = chol.solve(&b);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::IllPosed);
    }
    Ok(Array1::from_iter(sol.iter().copied()))
}

/// `steps` geometrically spaced values from `start` down to `end`.
pub fn geometric_schedule(start: f64, end: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let ratio = (end / start).ln() / (steps - 1) as f64;
            (0..steps)
                .map(|i| {
                    if i == steps - 1 {
                        end
                    } else {
                        start * (ratio * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Ten values from 10⁻³ down to 10⁻⁶.
pub fn default_cascade_schedule() -> Vec<f64> {
    geometric_schedule(1e-3, 1e-6, 10)
}

fn check_decreasing(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty mu schedule".into()));
    }
    if schedule.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
        return Err(Error::InvalidParameter("mu values must be finite and >= 0".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "mu schedule must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Warm-started cascade over a strictly decreasing μ schedule. Stage `i` is
/// solved on the columns selected at stage `i − 1`, starting from that
/// stage's solution, so supports are nested. Every report is embedded back in
/// `ℝ^p`; KKT residuals refer to each stage's restricted problem.
pub fn cascade_path(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    tau: f64,
    mu_schedule: &[f64],
    config: &IterationConfig,
) -> Result<Vec<SolveReport>> {
    check_design(x, y)?;
    check_decreasing(mu_schedule)?;
    let p = x.ncols();
    let step = match config.step_bound {
        Some(c) => c,
        None => estimate_step_bound(x)?,
    };
    let mut reports: Vec<SolveReport> = Vec::with_capacity(mu_schedule.len());
    for &mu in mu_schedule {
        let params = HyperParams::new(tau, mu, 0.0)?;
        let report = match reports.last() {
            None => {
                let stage_config = IterationConfig {
                    step_bound: Some(step),
                    ..config.clone()
                };
                elastic_net_solve(x, y, &params, &stage_config)?
            }
            Some(prev) => {
                let support = prev.support();
                if support.is_empty() {
                    SolveReport {
                        solution: Array1::zeros(p),
                        iterations: 0,
                        converged: true,
                        kkt_residual: 0.0,
                    }
                } else {
                    let restricted = x.select(Axis(1), &support);
                    let warm = prev.solution.select(Axis(0), &support);
                    // ‖X_S‖ ≤ ‖X‖, so the full-design bound stays valid.
                    let stage_config = IterationConfig {
                        step_bound: Some(step),
                        initial_point: Some(warm),
                        ..config.clone()
                    };
                    let sub = elastic_net_solve(restricted.view(), y, &params, &stage_config)?;
                    let mut solution = Array1::zeros(p);
                    for (k, &j) in support.iter().enumerate() {
                        solution[j] = sub.solution[k];
                    }
                    SolveReport { solution, ..sub }
                }
            }
        };
        reports.push(report);
    }
    Ok(reports)
}

/// Final stage of [`cascade_path`]; `converged` requires every stage to have
/// converged and `iterations` sums all stages.
pub fn cascade_solve(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    tau: f64,
    mu_schedule: &[f64],
    config: &IterationConfig,
) -> Result<SolveReport> {
    let path = cascade_path(x, y, tau, mu_schedule, config)?;
    let converged = path.iter().all(|r| r.converged);
    let iterations = path.iter().map(|r| r.iterations).sum();
    let last = path.into_iter().last().expect("schedule checked nonempty");
    Ok(SolveReport {
        converged,
        iterations,
        ..last
    })
}

/// `max_j |(2/n)(XᵀY)_j|`: the smallest τ whose elastic-net solution is zero.
pub fn tau_max(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    let n = x.nrows().max(1) as f64;
    x.t().dot(&y).iter().fold(0.0, |m, v| m.max((2.0 / n) * v.abs()))
}
