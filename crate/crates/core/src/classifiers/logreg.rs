//! L2-penalized logistic regression fitted by damped Newton steps
//! (iteratively reweighted least squares).
//!
//! The objective is
//!
//! ```text
//! L(b) = sum_i w_i * (softplus(z_i) - y_i * z_i) + l2/2 * |b[1..]|^2,
//! z_i  = b[0] + x_i . b[1..]
//! ```
//!
//! with the intercept `b[0]` unpenalized. Sample weights are rescaled to sum
//! to the row count before fitting, which makes the fit invariant to a
//! global rescaling of the weights.

use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub l2: f64,
    pub max_iter: usize,
    /// Stop once the relative objective change drops below this.
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2: 1.0,
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Intercept followed by one coefficient per feature.
    coefficients: Vec<f64>,
    iterations: usize,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn linear(beta: &[f64], row: &[f64]) -> f64 {
    beta[0] + row.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>()
}

fn row<'a>(x: &ArrayView2<'a, f64>, i: usize) -> &'a [f64] {
    (*x).index_axis_move(ndarray::Axis(0), i)
        .to_slice()
        .expect("standard layout")
}

/// Weighted penalized negative log-likelihood.
pub fn objective(beta: &[f64], x: ArrayView2<f64>, y: &[u8], w: &[f64], l2: f64) -> f64 {
    let mut loss = 0.0;
    for i in 0..y.len() {
        let z = linear(beta, row(&x, i));
        loss += w[i] * (softplus(z) - f64::from(y[i]) * z);
    }
    loss + 0.5 * l2 * beta[1..].iter().map(|b| b * b).sum::<f64>()
}

/// Gradient of [`objective`] with respect to `beta`.
pub fn gradient(beta: &[f64], x: ArrayView2<f64>, y: &[u8], w: &[f64], l2: f64) -> Vec<f64> {
    let mut g = vec![0.0; beta.len()];
    for i in 0..y.len() {
        let r = row(&x, i);
        let resid = w[i] * (sigmoid(linear(beta, r)) - f64::from(y[i]));
        g[0] += resid;
        for (gj, xj) in g[1..].iter_mut().zip(r) {
            *gj += resid * xj;
        }
    }
    for (gj, bj) in g[1..].iter_mut().zip(&beta[1..]) {
        *gj += l2 * bj;
    }
    g
}

/// Non-zero positions of each row, used to accumulate the Hessian cheaply
/// on one-hot encoded data.
fn sparsity(x: &ArrayView2<f64>) -> Vec<Vec<usize>> {
    x.rows()
        .into_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

fn hessian(beta: &[f64], x: &ArrayView2<f64>, nz: &[Vec<usize>], w: &[f64], l2: f64) -> DMatrix<f64> {
    let p = beta.len();
    let mut h = DMatrix::<f64>::zeros(p, p);
    for (i, cols) in nz.iter().enumerate() {
        let r = row(x, i);
        let s = sigmoid(linear(beta, r));
        let c = w[i] * s * (1.0 - s);
        if c == 0.0 {
            continue;
        }
        h[(0, 0)] += c;
        for (a, &ja) in cols.iter().enumerate() {
            let va = c * r[ja];
            h[(ja + 1, 0)] += va;
            for &jb in &cols[..=a] {
                h[(ja + 1, jb + 1)] += va * r[jb];
            }
        }
    }
    // mirror the lower triangle
    for a in 0..p {
        for b in 0..a {
            h[(b, a)] = h[(a, b)];
        }
    }
    for j in 1..p {
        h[(j, j)] += l2;
    }
    h
}

fn solve(h: DMatrix<f64>, g: &[f64]) -> Vec<f64> {
    let rhs = DVector::from_column_slice(g);
    let mut jitter = 0.0;
    let scale = h.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    loop {
        let mut m = h.clone();
        for j in 0..m.nrows() {
            m[(j, j)] += jitter;
        }
        if let Some(ch) = m.cholesky() {
            return ch.solve(&rhs).iter().copied().collect();
        }
        jitter = if jitter == 0.0 { 1e-12 * scale } else { jitter * 10.0 };
    }
}

impl LogisticModel {
    pub fn fit(params: &LogRegParams, x: ArrayView2<f64>, y: &[u8], weights: &[f64]) -> Self {
        let n = y.len();
        let total: f64 = weights.iter().sum();
        let w: Vec<f64> = weights.iter().map(|v| v * n as f64 / total).collect();
        let p = x.ncols() + 1;
        let nz = sparsity(&x);
        let mut beta = vec![0.0; p];
        let mut loss = objective(&beta, x, y, &w, params.l2);
        let mut iterations = 0;
        while iterations < params.max_iter {
            iterations += 1;
            let g = gradient(&beta, x, y, &w, params.l2);
            let step = solve(hessian(&beta, &x, &nz, &w, params.l2), &g);
            let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
            // backtracking on the Newton direction
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..30 {
                let cand: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b - t * s).collect();
                let cand_loss = objective(&cand, x, y, &w, params.l2);
                if cand_loss <= loss - 1e-4 * t * slope {
                    accepted = Some((cand, cand_loss));
                    break;
                }
                t *= 0.5;
            }
            let Some((cand, cand_loss)) = accepted else {
                break;
            };
            let change = (loss - cand_loss).abs() / loss.abs().max(f64::MIN_POSITIVE);
            beta = cand;
            loss = cand_loss;
            if change < params.tol {
                break;
            }
        }
        LogisticModel {
            coefficients: beta,
            iterations,
        }
    }

    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        LogisticModel {
            coefficients,
            iterations: 0,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub(crate) fn scores(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|r| sigmoid(linear(&self.coefficients, r.to_slice().expect("standard layout"))))
            .collect()
    }
}
