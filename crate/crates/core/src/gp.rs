//! Gaussian process regression with a fixed kernel and homoscedastic noise
//! level sigma_n.
//!
//! Fitting factorizes K + sigma_n^2 I once (lower Cholesky). Predictions and
//! the per-query weight row W_x = K_{x,X} (K + sigma_n^2 I)^{-1} reuse the
//! factor through triangular solves. For deep kernels the training inputs are
//! mapped through the feature net once at fit time.

use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, KernelSpec};
use crate::linalg::{cholesky, dot, solve_lower, solve_spd, spd_inverse, Mat};

/// Scalar-output training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::InvalidInput("dataset must not be empty".into()));
        }
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch(inputs.len(), targets.len()));
        }
        let d = inputs[0].len();
        if d == 0 {
            return Err(Error::InvalidInput("zero-dimensional inputs".into()));
        }
        for x in &inputs {
            if x.len() != d {
                return Err(Error::DimensionMismatch(x.len(), d));
            }
        }
        for v in inputs.iter().flatten().chain(targets.iter()) {
            if !v.is_finite() {
                return Err(Error::NonFinite("dataset contains a non-finite entry".into()));
            }
        }
        Ok(Dataset { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    /// CSV with header x1..xd,y, one row per sample.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        for j in 0..d {
            out.push_str(&format!("x{},", j + 1));
        }
        out.push_str("y\n");
        for (x, y) in self.inputs.iter().zip(&self.targets) {
            for v in x {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{y}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty csv".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols.last() != Some(&"y") {
            return Err(Error::InvalidInput(format!(
                "csv header must be x1..xd,y, got '{header}'"
            )));
        }
        let d = cols.len() - 1;
        for (j, c) in cols[..d].iter().enumerate() {
            if *c != format!("x{}", j + 1) {
                return Err(Error::InvalidInput(format!(
                    "csv header column {} is '{c}', expected 'x{}'",
                    j + 1,
                    j + 1
                )));
            }
        }
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad number on data row {}", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            if vals.len() != d + 1 {
                return Err(Error::InvalidInput(format!(
                    "data row {} has {} fields, expected {}",
                    lineno + 1,
                    vals.len(),
                    d + 1
                )));
            }
            inputs.push(vals[..d].to_vec());
            targets.push(vals[d]);
        }
        Dataset::new(inputs, targets)
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self> {
        Dataset::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// Posterior state after conditioning on one dataset.
#[derive(Debug, Clone)]
pub struct FittedGp {
    kernel: KernelSpec,
    inputs: Vec<Vec<f64>>,
    mapped: Vec<Vec<f64>>,
    targets: Vec<f64>,
    sigma_n: f64,
    chol: Mat,
    alpha: Vec<f64>,
}

impl FittedGp {
    /// Conditions the prior on `data` with noise level `sigma_n > 0`.
    pub fn fit(kernel: KernelSpec, data: &Dataset, sigma_n: f64) -> Result<Self> {
        if !(sigma_n > 0.0) || !sigma_n.is_finite() {
            return Err(Error::InvalidInput(format!("sigma_n must be positive, got {sigma_n}")));
        }
        if let Some(d) = kernel.input_dim() {
            if d != data.dim() {
                return Err(Error::DimensionMismatch(d, data.dim()));
            }
        }
        let mut k = kernel_matrix(&kernel, &data.inputs)?;
        k.add_diagonal(sigma_n * sigma_n);
        let chol = cholesky(&k)?;
        let alpha = solve_spd(&chol, &data.targets);
        let mapped = data.inputs.iter().map(|x| kernel.map_input(x)).collect();
        Ok(FittedGp {
            kernel,
            inputs: data.inputs.clone(),
            mapped,
            targets: data.targets.clone(),
            sigma_n,
            chol,
            alpha,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    /// K_{x,X} against the stored (mapped) training inputs.
    pub fn kernel_row(&self, x: &[f64]) -> Vec<f64> {
        let fx = self.kernel.map_input(x);
        self.mapped
            .iter()
            .map(|m| self.kernel.eval_mapped(m, &fx))
            .collect()
    }

    /// Posterior mean K_{x,X} (K + sigma_n^2 I)^{-1} Y.
    pub fn predict_mean(&self, x: &[f64]) -> f64 {
        dot(&self.kernel_row(x), &self.alpha)
    }

    /// Posterior variance kappa(x,x) - K_{x,X} (K + sigma_n^2 I)^{-1} K_{X,x}.
    /// Tiny negative values (roundoff) clamp to zero; anything below -1e-12
    /// reports a conditioning failure.
    pub fn predict_var(&self, x: &[f64]) -> Result<f64> {
        let kx = self.kernel_row(x);
        let z = solve_lower(&self.chol, &kx);
        let var = self.kernel.sigma_s() - dot(&z, &z);
        if var < -1e-12 {
            return Err(Error::Conditioning(format!("negative posterior variance {var:.3e}")));
        }
        Ok(var.max(0.0))
    }

    pub fn predict_std(&self, x: &[f64]) -> Result<f64> {
        Ok(self.predict_var(x)?.sqrt())
    }

    /// Weight row W_x = K_{x,X} (K + sigma_n^2 I)^{-1}; predict_mean equals
    /// dot(W_x, Y) up to roundoff.
    pub fn weights(&self, x: &[f64]) -> Vec<f64> {
        solve_spd(&self.chol, &self.kernel_row(x))
    }

    /// (K + sigma_n^2 I)^{-1} Y.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Mean, variance and weight row from a single kernel-row factorization
    /// pass; the hot path for sweeps and region bounds.
    pub fn mean_var_weights(&self, x: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
        let kx = self.kernel_row(x);
        let mean = dot(&kx, &self.alpha);
        let z = solve_lower(&self.chol, &kx);
        let var = self.kernel.sigma_s() - dot(&z, &z);
        if var < -1e-12 {
            return Err(Error::Conditioning(format!("negative posterior variance {var:.3e}")));
        }
        let w = crate::linalg::solve_lower_transpose(&self.chol, &z);
        Ok((mean, var.max(0.0), w))
    }

    /// Explicit (K + sigma_n^2 I)^{-1}; used by the box-QP solver.
    pub fn precision_matrix(&self) -> Mat {
        spd_inverse(&self.chol)
    }

    /// log det(K + sigma_n^2 I) from the Cholesky diagonal.
    pub fn log_det(&self) -> f64 {
        (0..self.chol.rows())
            .map(|i| 2.0 * self.chol.get(i, i).ln())
            .sum()
    }
}
