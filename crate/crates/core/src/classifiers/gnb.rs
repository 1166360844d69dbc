use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbParams {
    /// Added to every variance, as a fraction of the largest weighted
    /// feature variance in the training data.
    pub var_smoothing: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        GnbParams { var_smoothing: 1e-9 }
    }
}

/// Gaussian naive Bayes with weighted class priors and weighted
/// per-class feature means and variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// Class priors, indexed by label.
    priors: [f64; 2],
    means: [Vec<f64>; 2],
    variances: [Vec<f64>; 2],
    epsilon: f64,
}

/// Weighted mean and population variance of each column over `rows`.
fn moments(x: &ArrayView2<f64>, w: &[f64], rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let d = x.ncols();
    let mass: f64 = rows.iter().map(|&i| w[i]).sum();
    let mut mean = vec![0.0; d];
    for &i in rows {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += w[i] * v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= mass);
    let mut var = vec![0.0; d];
    for &i in rows {
        for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
            *s += w[i] * (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= mass);
    (mean, var)
}

impl GaussianNb {
    pub fn fit(params: &GnbParams, x: ArrayView2<f64>, y: &[u8], w: &[f64]) -> Self {
        let all: Vec<usize> = (0..y.len()).collect();
        let (_, overall_var) = moments(&x, w, &all);
        let epsilon = params.var_smoothing * overall_var.iter().fold(0.0f64, |a, &b| a.max(b));
        let total: f64 = w.iter().sum();
        let mut priors = [0.0; 2];
        let mut means: [Vec<f64>; 2] = Default::default();
        let mut variances: [Vec<f64>; 2] = Default::default();
        for c in 0..2u8 {
            let rows: Vec<usize> = all.iter().copied().filter(|&i| y[i] == c).collect();
            let (m, mut v) = moments(&x, w, &rows);
            v.iter_mut().for_each(|s| *s += epsilon);
            priors[c as usize] = rows.iter().map(|&i| w[i]).sum::<f64>() / total;
            means[c as usize] = m;
            variances[c as usize] = v;
        }
        GaussianNb {
            priors,
            means,
            variances,
            epsilon,
        }
    }

    pub fn priors(&self) -> [f64; 2] {
        self.priors
    }

    pub fn means(&self, class: u8) -> &[f64] {
        &self.means[class as usize]
    }

    /// Per-class variances, including the smoothing term.
    pub fn variances(&self, class: u8) -> &[f64] {
        &self.variances[class as usize]
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn joint_log_likelihood(&self, c: usize, row: &[f64]) -> f64 {
        if self.priors[c] == 0.0 {
            return f64::NEG_INFINITY;
        }
        let mut ll = self.priors[c].ln();
        for ((v, m), s) in row.iter().zip(&self.means[c]).zip(&self.variances[c]) {
            if *s > 0.0 {
                ll -= 0.5 * ((2.0 * PI * s).ln() + (v - m) * (v - m) / s);
            } else if v != m {
                return f64::NEG_INFINITY;
            }
        }
        ll
    }

    pub(crate) fn scores(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|r| {
                let r = r.to_slice().expect("standard layout");
                let j0 = self.joint_log_likelihood(0, r);
                let j1 = self.joint_log_likelihood(1, r);
                match (j0.is_finite(), j1.is_finite()) {
                    (true, true) => super::logreg::sigmoid(j1 - j0),
                    (false, true) => 1.0,
                    (true, false) => 0.0,
                    (false, false) => 0.5,
                }
            })
            .collect()
    }
}
