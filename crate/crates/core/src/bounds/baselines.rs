//! Published baseline error bounds for kernel regression with an RKHS norm
//! assumption, each with the noise-level convention its guarantee requires:
//!
//! * Chowdhury-Gopalan: beta(delta) scaling of the posterior deviation with
//!   the regularizer fixed at sigma_n^2 = 1 + 2/m.
//! * Hashimoto et al.: deterministic beta_T scaling with sigma_n = sigma_v.
//! * Abbasi-Yadkori: confidence-set radius Delta(delta); sigma_n is free and
//!   defaults to sqrt(1 + 2/m).
//! * Seeger et al.: xi(delta) scaling with sigma_n = sigma_v.
//! * Maddalena et al.: noise-free kernel interpolation bound with a box
//!   maximum Delta over noise vertices.
//!
//! All scalings multiply the posterior standard deviation of the fit they
//! prescribe, except the Maddalena bound which has its own three-term form.

use crate::error::{Error, Result};
use crate::gp::{Dataset, FittedGp};
use crate::kernels::{kernel_matrix, kernel_vector, KernelSpec};
use crate::linalg::{cholesky, dot, solve_spd, spd_inverse, Mat};

/// Half the log determinant of I + sigma_n^{-2} K on the given points: the
/// standard information-gain surrogate. This is an estimate evaluated on the
/// actual data, not a supremum over point sets.
pub fn info_gain(kernel: &KernelSpec, points: &[Vec<f64>], sigma_n: f64) -> Result<f64> {
    if !(sigma_n > 0.0) {
        return Err(Error::InvalidInput(format!("sigma_n must be positive, got {sigma_n}")));
    }
    let k = kernel_matrix(kernel, points)?;
    let n = points.len();
    let inv_var = 1.0 / (sigma_n * sigma_n);
    let mut m = Mat::identity(n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, m.get(i, j) + inv_var * k.get(i, j));
        }
    }
    let l = cholesky(&m)?;
    Ok((0..n).map(|i| l.get(i, i).ln()).sum())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Enforced regularizer sigma_n^2 = 1 + 2/m used by the Chowdhury-Gopalan
/// guarantee (and the Abbasi-Yadkori default).
fn unit_plus_two_over_m(m: usize) -> f64 {
    (1.0 + 2.0 / m as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Chowdhury-Gopalan
// ---------------------------------------------------------------------------

/// beta(delta) = B + R sqrt(2 (Gamma + 1 + ln(1/delta))) applied to the
/// posterior deviation of the sigma_n^2 = 1 + 2/m fit.
#[derive(Debug, Clone)]
pub struct ChowdhuryBound {
    gp: FittedGp,
    beta: f64,
}

impl ChowdhuryBound {
    pub fn fit(
        kernel: KernelSpec,
        data: &Dataset,
        norm_bound: f64,
        noise_scale: f64,
        delta: f64,
    ) -> Result<Self> {
        check_delta(delta)?;
        let sigma_n = unit_plus_two_over_m(data.len());
        let gamma = info_gain(&kernel, &data.inputs, sigma_n)?;
        let gp = FittedGp::fit(kernel, data, sigma_n)?;
        let beta = norm_bound + noise_scale * (2.0 * (gamma + 1.0 + (1.0 / delta).ln())).sqrt();
        Ok(ChowdhuryBound { gp, beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gp(&self) -> &FittedGp {
        &self.gp
    }

    pub fn bound(&self, x: &[f64]) -> Result<f64> {
        Ok(self.beta * self.gp.predict_std(x)?)
    }
}

// ---------------------------------------------------------------------------
// Hashimoto et al.
// ---------------------------------------------------------------------------

/// Deterministic scaling beta_T = sqrt(B^2 - Y^T (K + sigma_v^2 I)^{-1} Y + m)
/// with the noise level tied to the support half-width sigma_v.
#[derive(Debug, Clone)]
pub struct HashimotoBound {
    gp: FittedGp,
    beta_t: f64,
}

impl HashimotoBound {
    pub fn fit(kernel: KernelSpec, data: &Dataset, norm_bound: f64, sigma_v: f64) -> Result<Self> {
        if !(sigma_v > 0.0) {
            return Err(Error::InvalidInput(format!(
                "the Hashimoto scaling requires sigma_v > 0, got {sigma_v}"
            )));
        }
        let gp = FittedGp::fit(kernel, data, sigma_v)?;
        let data_term = dot(gp.targets(), gp.alpha());
        let radicand = norm_bound * norm_bound - data_term + data.len() as f64;
        if radicand < 0.0 {
            return Err(Error::NormBoundTooSmall(format!(
                "B^2 - Y^T (K + sigma_v^2 I)^{{-1}} Y + m = {radicand:.6} is negative"
            )));
        }
        Ok(HashimotoBound { gp, beta_t: radicand.sqrt() })
    }

    pub fn beta_t(&self) -> f64 {
        self.beta_t
    }

    pub fn gp(&self) -> &FittedGp {
        &self.gp
    }

    pub fn bound(&self, x: &[f64]) -> Result<f64> {
        Ok(self.beta_t * self.gp.predict_std(x)?)
    }
}

// ---------------------------------------------------------------------------
// Abbasi-Yadkori
// ---------------------------------------------------------------------------

/// Delta(delta) = (R/sigma_n) sqrt(2 ln(1/delta) + (m-1) L^2 / sigma_n^2) + B
/// with L the kernel amplitude; applied to the posterior deviation of the
/// chosen sigma_n fit.
#[derive(Debug, Clone)]
pub struct AbbasiBound {
    gp: FittedGp,
    scale: f64,
}

impl AbbasiBound {
    pub fn fit(
        kernel: KernelSpec,
        data: &Dataset,
        norm_bound: f64,
        noise_scale: f64,
        delta: f64,
        sigma_n: Option<f64>,
    ) -> Result<Self> {
        check_delta(delta)?;
        let sigma_n = sigma_n.unwrap_or_else(|| unit_plus_two_over_m(data.len()));
        if !(sigma_n > 0.0) {
            return Err(Error::InvalidInput(format!("sigma_n must be positive, got {sigma_n}")));
        }
        let kernel_sup = kernel.sigma_s();
        let m = data.len() as f64;
        let inner = 2.0 * (1.0 / delta).ln() + (m - 1.0) * kernel_sup * kernel_sup / (sigma_n * sigma_n);
        let scale = noise_scale / sigma_n * inner.sqrt() + norm_bound;
        let gp = FittedGp::fit(kernel, data, sigma_n)?;
        Ok(AbbasiBound { gp, scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn gp(&self) -> &FittedGp {
        &self.gp
    }

    pub fn bound(&self, x: &[f64]) -> Result<f64> {
        Ok(self.scale * self.gp.predict_std(x)?)
    }
}

// ---------------------------------------------------------------------------
// Seeger et al.
// ---------------------------------------------------------------------------

/// xi(delta) = sqrt(2 B^2 + 300 Gamma ln^3(m/delta)) with sigma_n = sigma_v;
/// logarithms are natural.
#[derive(Debug, Clone)]
pub struct SeegerBound {
    gp: FittedGp,
    xi: f64,
}

impl SeegerBound {
    pub fn fit(kernel: KernelSpec, data: &Dataset, norm_bound: f64, sigma_v: f64, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        if !(sigma_v > 0.0) {
            return Err(Error::InvalidInput(format!(
                "the Seeger scaling requires sigma_v > 0, got {sigma_v}"
            )));
        }
        let gamma = info_gain(&kernel, &data.inputs, sigma_v)?;
        let log_term = (data.len() as f64 / delta).ln();
        let xi = (2.0 * norm_bound * norm_bound + 300.0 * gamma * log_term.powi(3)).sqrt();
        let gp = FittedGp::fit(kernel, data, sigma_v)?;
        Ok(SeegerBound { gp, xi })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn gp(&self) -> &FittedGp {
        &self.gp
    }

    pub fn bound(&self, x: &[f64]) -> Result<f64> {
        Ok(self.xi * self.gp.predict_std(x)?)
    }
}

// ---------------------------------------------------------------------------
// Maddalena et al.
// ---------------------------------------------------------------------------

/// Vertices where the exact box maximum switches to the conservative closed
/// form; above this the 2^m enumeration is no longer worth it.
const VERTEX_ENUMERATION_LIMIT: usize = 20;

/// Noise-free kernel interpolation bound
/// P(x) sqrt(B^2 + Delta - Y^T K^{-1} Y) + Lambda~(x) + |Y^T (K + K^2/(m sigma_n))^{-1} K_{X,x}|
/// where P(x)^2 = kappa(x,x) - K_{x,X} K^{-1} K_{X,x} and Delta maximizes
/// v^T K^{-1} v + 2 Y^T K^{-1} v over the noise box.
#[derive(Debug, Clone)]
pub struct MaddalenaBound {
    kernel: KernelSpec,
    inputs: Vec<Vec<f64>>,
    chol_k: Mat,
    sigma_v: f64,
    sqrt_radicand: f64,
    delta_box: f64,
    delta_box_exact: bool,
    third_term_vec: Vec<f64>,
}

impl MaddalenaBound {
    pub fn fit(
        kernel: KernelSpec,
        data: &Dataset,
        norm_bound: f64,
        sigma_v: f64,
        sigma_n: f64,
    ) -> Result<Self> {
        if !(sigma_v >= 0.0) {
            return Err(Error::InvalidInput(format!("sigma_v must be nonnegative, got {sigma_v}")));
        }
        if !(sigma_n > 0.0) {
            return Err(Error::InvalidInput(format!("sigma_n must be positive, got {sigma_n}")));
        }
        let m = data.len();
        let k = kernel_matrix(&kernel, &data.inputs)?;
        let mut kj = k.clone();
        kj.add_diagonal(1e-10);
        let chol_k = cholesky(&kj).map_err(|_| {
            Error::NotPositiveDefinite(
                "kernel matrix is singular even with 1e-10 jitter; this bound needs strictly distinct inputs".into(),
            )
        })?;
        let kinv = spd_inverse(&chol_k);
        let t = kinv.matvec(&data.targets);
        let data_term = dot(&data.targets, &t);

        let (delta_box, delta_box_exact) = if m <= VERTEX_ENUMERATION_LIMIT {
            (vertex_max(&kinv, &t, sigma_v), true)
        } else {
            let mut abs_sum = 0.0;
            for i in 0..m {
                for j in 0..m {
                    abs_sum += kinv.get(i, j).abs();
                }
            }
            let lin_sum: f64 = t.iter().map(|v| v.abs()).sum();
            (sigma_v * sigma_v * abs_sum + 2.0 * sigma_v * lin_sum, false)
        };

        let radicand = norm_bound * norm_bound + delta_box - data_term;
        if radicand < 0.0 {
            return Err(Error::NormBoundTooSmall(format!(
                "B^2 + Delta - Y^T K^{{-1}} Y = {radicand:.6} is negative"
            )));
        }

        // Third term: (K + K^2 / (m sigma_n))^{-1} Y, jittered like K.
        let k2 = k.matmul(&k);
        let mut mmat = k;
        let c = 1.0 / (m as f64 * sigma_n);
        for i in 0..m {
            for j in 0..m {
                mmat.set(i, j, mmat.get(i, j) + c * k2.get(i, j));
            }
        }
        mmat.add_diagonal(1e-10);
        let chol_m = cholesky(&mmat).map_err(|_| {
            Error::NotPositiveDefinite("regularized interpolation system is singular".into())
        })?;
        let third_term_vec = solve_spd(&chol_m, &data.targets);

        Ok(MaddalenaBound {
            kernel,
            inputs: data.inputs.clone(),
            chol_k,
            sigma_v,
            sqrt_radicand: radicand.sqrt(),
            delta_box,
            delta_box_exact,
            third_term_vec,
        })
    }

    /// Box maximum Delta; exact for small datasets, conservative otherwise.
    pub fn delta_box(&self) -> f64 {
        self.delta_box
    }

    pub fn delta_box_exact(&self) -> bool {
        self.delta_box_exact
    }

    pub fn bound(&self, x: &[f64]) -> Result<f64> {
        let kx = kernel_vector(&self.kernel, &self.inputs, x);
        let kinv_kx = solve_spd(&self.chol_k, &kx);
        let power = self.kernel.sigma_s() - dot(&kx, &kinv_kx);
        if power < -1e-12 {
            return Err(Error::Conditioning(format!("negative power function value {power:.3e}")));
        }
        let p = power.max(0.0).sqrt();
        let lambda_tilde: f64 = self.sigma_v * kinv_kx.iter().map(|v| v.abs()).sum::<f64>();
        let third = dot(&self.third_term_vec, &kx).abs();
        Ok(p * self.sqrt_radicand + lambda_tilde + third)
    }
}

/// Exact maximum of v^T Kinv v + 2 t . v over the vertices of the box
/// [-sigma_v, sigma_v]^m, walked in Gray-code order so each step flips one
/// coordinate and costs O(m).
fn vertex_max(kinv: &Mat, t: &[f64], sigma_v: f64) -> f64 {
    let m = t.len();
    if sigma_v == 0.0 {
        return 0.0;
    }
    let mut v = vec![-sigma_v; m];
    // w = Kinv v for the starting vertex.
    let mut w: Vec<f64> = (0..m)
        .map(|i| (0..m).map(|j| kinv.get(i, j) * v[j]).sum())
        .collect();
    let mut quad = dot(&v, &w);
    let mut lin = 2.0 * dot(t, &v);
    let mut best = quad + lin;
    let total: u64 = 1u64 << m;
    for step in 1..total {
        let i = step.trailing_zeros() as usize;
        let old = v[i];
        let new = -old;
        let dv = new - old;
        // quad picks up 2 dv w_i + dv^2 Kinv_ii before w is refreshed.
        quad += 2.0 * dv * w[i] + dv * dv * kinv.get(i, i);
        for j in 0..m {
            w[j] += dv * kinv.get(j, i);
        }
        lin += 2.0 * t[i] * dv;
        v[i] = new;
        best = best.max(quad + lin);
    }
    best
}
