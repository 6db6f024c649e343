//! Gaussian-process regression of the target radius over angle.
//!
//! The contour is a function on the circle, so the covariance is the
//! periodic squared-exponential kernel
//! `k(t, t') = s^2 exp(-2 sin^2((t - t')/2) / l^2)`; a non-periodic kernel
//! would leave a seam at angle zero. Hyperparameters are fixed — no
//! marginal-likelihood optimization — which keeps the pipeline
//! deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_lengthscale() -> f64 {
    0.5
}
fn default_signal_std() -> f64 {
    5.0
}
fn default_noise_std() -> f64 {
    1.0
}
fn default_grid_points() -> usize {
    360
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpParams {
    #[serde(default = "default_lengthscale")]
    pub lengthscale_rad: f64,
    #[serde(default = "default_signal_std")]
    pub signal_std_m: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std_m: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

impl Default for GpParams {
    fn default() -> Self {
        Self {
            lengthscale_rad: default_lengthscale(),
            signal_std_m: default_signal_std(),
            noise_std_m: default_noise_std(),
            grid_points: default_grid_points(),
        }
    }
}

impl GpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lengthscale_rad > 0.0 && self.signal_std_m > 0.0 && self.noise_std_m > 0.0) {
            return Err(Error::InvalidConfig("GP hyperparameters must be positive".into()));
        }
        if self.grid_points < 8 {
            return Err(Error::InvalidConfig("grid_points must be >= 8".into()));
        }
        Ok(())
    }
}

/// Periodic squared-exponential covariance between two angles.
pub fn periodic_kernel(theta_a: f64, theta_b: f64, params: &GpParams) -> f64 {
    let s = ((theta_a - theta_b) / 2.0).sin();
    params.signal_std_m * params.signal_std_m
        * (-2.0 * s * s / (params.lengthscale_rad * params.lengthscale_rad)).exp()
}

/// In-place Cholesky factorization of a symmetric positive-definite
/// matrix stored row-major; the lower triangle of `a` receives `L`.
fn cholesky(a: &mut [f64], n: usize) -> std::result::Result<(), ()> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(());
        }
        let diag = diag.sqrt();
        a[j * n + j] = diag;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / diag;
        }
    }
    Ok(())
}

fn cholesky_solve(l: &[f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    // forward substitution L y = rhs
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = rhs[i];
        for k in 0..i {
            v -= l[i * n + k] * y[k];
        }
        y[i] = v / l[i * n + i];
    }
    // back substitution L^T x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= l[k * n + i] * x[k];
        }
        x[i] = v / l[i * n + i];
    }
    x
}

/// Fitted radius-over-angle model: prior mean plus the kernel-weighted
/// combination of training residuals.
#[derive(Debug, Clone)]
pub struct ContourGp {
    thetas: Vec<f64>,
    alpha: Vec<f64>,
    prior_mean: f64,
    params: GpParams,
}

impl ContourGp {
    /// Solve `(K + noise^2 I) alpha = r - mean(r)` over the training
    /// angles, retrying once with a 1e-10 diagonal jitter if the
    /// factorization fails.
    pub fn fit(thetas: Vec<f64>, radii: &[f64], params: GpParams) -> Result<Self> {
        params.validate()?;
        if thetas.len() != radii.len() || thetas.len() < 2 {
            return Err(Error::ContractViolation(format!(
                "GP fit needs matching angle/radius lists of length >= 2, got {} and {}",
                thetas.len(),
                radii.len()
            )));
        }
        let n = thetas.len();
        let prior_mean = radii.iter().sum::<f64>() / n as f64;
        let residuals: Vec<f64> = radii.iter().map(|r| r - prior_mean).collect();
        let noise_var = params.noise_std_m * params.noise_std_m;
        let build = |jitter: f64| -> Vec<f64> {
            let mut k = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    k[i * n + j] = periodic_kernel(thetas[i], thetas[j], &params);
                }
                k[i * n + i] += noise_var + jitter;
            }
            k
        };
        let mut k = build(0.0);
        if cholesky(&mut k, n).is_err() {
            k = build(1e-10);
            if cholesky(&mut k, n).is_err() {
                return Err(Error::Numerical(
                    "GP covariance not positive definite even with jitter".into(),
                ));
            }
        }
        let alpha = cholesky_solve(&k, n, &residuals);
        Ok(Self { thetas, alpha, prior_mean, params })
    }

    /// Posterior mean radius at any angle (unclamped).
    pub fn predict(&self, theta: f64) -> f64 {
        let mut v = self.prior_mean;
        for (t, a) in self.thetas.iter().zip(&self.alpha) {
            v += periodic_kernel(theta, *t, &self.params) * a;
        }
        v
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }
}
