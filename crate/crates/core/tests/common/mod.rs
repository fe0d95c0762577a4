//! Reference solvers used only by tests. They share no code with the crate's
//! solver: plain `Vec` arithmetic for coordinate descent and nalgebra
//! factorizations for the closed forms.
#![allow(dead_code)]

use l1l2::random::SeededRng;
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, Axis};

/// Centered Gaussian design with a sparse-ish linear response plus noise.
pub fn random_problem(n: usize, p: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
    let mut rng = SeededRng::new(seed);
    let mut x = Array2::from_shape_fn((n, p), |_| rng.standard_normal());
    let truth: Vec<f64> = (0..p).map(|j| if j % 3 == 0 { rng.uniform_in(-2.0, 2.0) } else { 0.0 }).collect();
    let mut y = Array1::from_shape_fn(n, |i| {
        (0..p).map(|j| x[[i, j]] * truth[j]).sum::<f64>() + 0.5 * rng.standard_normal()
    });
    let means = x.mean_axis(Axis(0)).unwrap();
    x -= &means;
    let ym = y.mean().unwrap();
    y -= ym;
    (x, y)
}

pub fn tau_max(x: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let (n, p) = x.dim();
    (0..p)
        .map(|j| (2.0 / n as f64) * (0..n).map(|i| x[[i, j]] * y[i]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// Cyclic coordinate descent on `(1/n)‖y − Xβ‖² + μ‖β‖² + τ‖β‖₁`, run until
/// no coordinate moves by more than `tol`.
pub fn coordinate_descent(x: &Array2<f64>, y: &Array1<f64>, tau: f64, mu: f64, tol: f64) -> Vec<f64> {
    let (n, p) = x.dim();
    let nf = n as f64;
    let cols: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| x[[i, j]]).collect()).collect();
    let sq: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let mut beta = vec![0.0; p];
    let mut resid: Vec<f64> = y.to_vec();
    for _sweep in 0..5_000_000 {
        let mut max_move: f64 = 0.0;
        for j in 0..p {
            let old = beta[j];
            let dot: f64 = cols[j].iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() + sq[j] * old;
            let z = 2.0 / nf * dot;
            let denom = 2.0 / nf * sq[j] + 2.0 * mu;
            let new = if z > tau {
                (z - tau) / denom
            } else if z < -tau {
                (z + tau) / denom
            } else {
                0.0
            };
            if new != old {
                let d = new - old;
                for (r, a) in resid.iter_mut().zip(&cols[j]) {
                    *r -= d * a;
                }
                beta[j] = new;
                max_move = max_move.max(d.abs());
            }
        }
        if max_move <= tol {
            break;
        }
    }
    beta
}

fn to_na(x: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[[i, j]])
}

/// Least squares through an SVD solve.
pub fn least_squares(x: &Array2<f64>, y: &Array1<f64>) -> Vec<f64> {
    let a = to_na(x);
    let b = DVector::from_iterator(y.len(), y.iter().copied());
    let sol = a.svd(true, true).solve(&b, 1e-14).unwrap();
    sol.iter().copied().collect()
}

/// `(XᵀX + nμI)⁻¹XᵀY` through an LU factorization.
pub fn ridge_closed_form(x: &Array2<f64>, y: &Array1<f64>, mu: f64) -> Vec<f64> {
    let a = to_na(x);
    let n = x.nrows() as f64;
    let p = x.ncols();
    let lhs = a.transpose() * &a + DMatrix::identity(p, p) * (n * mu);
    let rhs = a.transpose() * DVector::from_iterator(y.len(), y.iter().copied());
    lhs.lu().solve(&rhs).unwrap().iter().copied().collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

/// Every closed interval `[a, b]` with `a ≤ 0 ≤ b`, endpoints drawn from the
/// scores and 0, outside which all samples are classified correctly.
pub fn admissible_rejection_intervals(scores: &[f64], labels: &[f64]) -> Vec<(f64, f64)> {
    let sign = |s: f64| if s >= 0.0 { 1.0 } else { -1.0 };
    let mut lows: Vec<f64> = scores.iter().copied().filter(|&s| s <= 0.0).collect();
    lows.push(0.0);
    let mut highs: Vec<f64> = scores.iter().copied().filter(|&s| s >= 0.0).collect();
    highs.push(0.0);
    let mut out = Vec::new();
    for &a in &lows {
        for &b in &highs {
            if scores.iter().zip(labels).all(|(&s, &l)| (s >= a && s <= b) || sign(s) == l) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Three groups of ten strongly correlated columns, 170 independent noise
/// columns, n = 100, noisy response.
pub fn grouped_correlation_spec(seed: u64) -> l1l2::synth::GroupedToySpec {
    l1l2::synth::GroupedToySpec {
        n: 100,
        within_group_noise_sigma: 0.15,
        group_size: 10,
        n_noise_features: 170,
        response_noise_sigma: 2.0,
        seed,
    }
}
