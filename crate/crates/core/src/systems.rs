//! Benchmark dynamical systems x(t+1) = f(x(t)) + v with bounded-support
//! noise, plus dataset generation from them.
//!
//! Noise is independent per output dimension and always supported on
//! [-sigma_v, sigma_v]: either uniform or a symmetric PERT shape, i.e. a
//! Beta(3, 3) variable rescaled to the support, which concentrates mass at
//! zero while keeping the hard bound.

use crate::error::{Error, Result};
use crate::gp::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Uniform,
    SymmetricPert,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma_v: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, sigma_v: f64) -> Result<Self> {
        if !(sigma_v >= 0.0) || !sigma_v.is_finite() {
            return Err(Error::InvalidInput(format!("sigma_v must be nonnegative, got {sigma_v}")));
        }
        Ok(NoiseSpec { kind, sigma_v })
    }

    /// One draw, always inside [-sigma_v, sigma_v].
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.gen();
        match self.kind {
            NoiseKind::Uniform => self.sigma_v * (2.0 * u - 1.0),
            NoiseKind::SymmetricPert => self.sigma_v * (2.0 * beta33_inverse_cdf(u) - 1.0),
        }
    }

    /// One draw per output dimension.
    pub fn sample_vec(&self, rng: &mut ChaCha8Rng, dims: usize) -> Vec<f64> {
        (0..dims).map(|_| self.sample(rng)).collect()
    }
}

/// CDF of Beta(3, 3): I_x(3,3) = x^3 (10 - 15 x + 6 x^2).
fn beta33_cdf(x: f64) -> f64 {
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// Inverse CDF by bisection; monotone on [0, 1], so 80 halvings pin the
/// result to full f64 resolution and keep sampling bit-reproducible.
fn beta33_inverse_cdf(u: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if beta33_cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Discrete-time benchmark system. `domain` is an axis-aligned box, one
/// [lo, hi] pair per state dimension; `norm_bounds` is the assumed RKHS norm
/// bound per output dimension; `initial_box` is the default initial set used
/// by safety certification.
#[derive(Debug, Clone)]
pub struct DynSystem {
    pub name: &'static str,
    pub dim: usize,
    pub domain: Vec<[f64; 2]>,
    pub norm_bounds: Vec<f64>,
    pub noise: NoiseSpec,
    pub initial_box: Vec<[f64; 2]>,
    f: fn(&[f64]) -> Vec<f64>,
}

impl DynSystem {
    /// Noise-free dynamics.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "state dimension");
        (self.f)(x)
    }

    /// One noisy step.
    pub fn step(&self, x: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut y = self.eval(x);
        for yi in &mut y {
            *yi += self.noise.sample(rng);
        }
        y
    }
}

fn toy1d_f(x: &[f64]) -> Vec<f64> {
    vec![x[0] * x[0].sin()]
}

fn lin2d_f(x: &[f64]) -> Vec<f64> {
    vec![0.4 * x[0] + 0.1 * x[1], 0.1 * x[0] + 0.4 * x[1]]
}

fn nl2d_f(x: &[f64]) -> Vec<f64> {
    vec![
        x[0] + 0.1 * x[1],
        x[1] + 0.1 * (-x[0] + (1.0 - x[0] * x[0]) * x[1]),
    ]
}

fn dubins3d_f(x: &[f64]) -> Vec<f64> {
    // Unit forward speed, constant turn input 0.5, step 0.1.
    vec![x[0] + 0.1 * x[2].cos(), x[1] + 0.1 * x[2].sin(), x[2] + 0.05]
}

fn car5d_f(x: &[f64]) -> Vec<f64> {
    // Planar double integrator: positions driven by velocities, velocities
    // by a shared decaying actuation state.
    vec![
        x[0] + 0.1 * x[2],
        x[1] + 0.1 * x[3],
        x[2] + 0.1 * x[4],
        x[3] - 0.1 * x[4],
        0.8 * x[4],
    ]
}

fn lin4d_f(x: &[f64]) -> Vec<f64> {
    vec![
        0.6 * x[0] + 0.2 * x[1] + 0.1 * x[2],
        0.63 * x[1] + 0.2 * x[2] + 0.05 * x[3],
        0.51 * x[2] + 0.15 * x[3],
        0.2 * x[3],
    ]
}

/// Centered box covering `frac` of each domain width; default initial set
/// where the benchmark does not pin one.
fn centered_box(domain: &[[f64; 2]], frac: f64) -> Vec<[f64; 2]> {
    domain
        .iter()
        .map(|[lo, hi]| {
            let c = 0.5 * (lo + hi);
            let h = 0.5 * frac * (hi - lo);
            [c - h, c + h]
        })
        .collect()
}

pub const BUILTIN_NAMES: [&str; 6] = ["toy1d", "lin2d", "nl2d", "dubins3d", "car5d", "lin4d"];

/// Benchmark systems by name; every field can be overridden by callers after
/// construction.
pub fn builtin_system(name: &str) -> Result<DynSystem> {
    let sys = match name {
        "toy1d" => DynSystem {
            name: "toy1d",
            dim: 1,
            domain: vec![[0.0, 10.0]],
            norm_bounds: vec![40.0],
            noise: NoiseSpec::new(NoiseKind::Uniform, 0.5)?,
            initial_box: centered_box(&[[0.0, 10.0]], 0.1),
            f: toy1d_f,
        },
        "lin2d" => DynSystem {
            name: "lin2d",
            dim: 2,
            domain: vec![[-2.0, 2.0], [-2.0, 2.0]],
            norm_bounds: vec![10.0, 10.0],
            noise: NoiseSpec::new(NoiseKind::Uniform, 0.1)?,
            initial_box: centered_box(&[[-2.0, 2.0], [-2.0, 2.0]], 0.1),
            f: lin2d_f,
        },
        "nl2d" => DynSystem {
            name: "nl2d",
            dim: 2,
            domain: vec![[-2.0, 2.0], [-2.0, 2.0]],
            norm_bounds: vec![10.0, 10.0],
            noise: NoiseSpec::new(NoiseKind::Uniform, 0.1)?,
            initial_box: centered_box(&[[-2.0, 2.0], [-2.0, 2.0]], 0.1),
            f: nl2d_f,
        },
        "dubins3d" => DynSystem {
            name: "dubins3d",
            dim: 3,
            domain: vec![[0.0, 10.0], [0.0, 2.0], [-0.5, 0.5]],
            norm_bounds: vec![20.0, 5.0, 5.0],
            noise: NoiseSpec::new(NoiseKind::Uniform, 0.1)?,
            initial_box: centered_box(&[[0.0, 10.0], [0.0, 2.0], [-0.5, 0.5]], 0.1),
            f: dubins3d_f,
        },
        "car5d" => DynSystem {
            name: "car5d",
            dim: 5,
            domain: vec![[-2.0, 2.0], [-2.0, 2.0], [-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5]],
            norm_bounds: vec![8.0, 8.0, 5.0, 5.0, 5.0],
            noise: NoiseSpec::new(NoiseKind::Uniform, 0.2)?,
            initial_box: centered_box(
                &[[-2.0, 2.0], [-2.0, 2.0], [-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5]],
                0.1,
            ),
            f: car5d_f,
        },
        "lin4d" => DynSystem {
            name: "lin4d",
            dim: 4,
            domain: vec![[-0.7, 0.7]; 4],
            norm_bounds: vec![1.4, 1.5, 1.4, 0.9],
            noise: NoiseSpec::new(NoiseKind::SymmetricPert, 0.05)?,
            initial_box: vec![[-0.1, 0.1]; 4],
            f: lin4d_f,
        },
        other => {
            return Err(Error::Config(format!(
                "unknown system '{other}'; built-ins: {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(sys)
}

/// Draws `m` inputs uniformly from the domain and returns one dataset per
/// output dimension: shared inputs, per-output targets f_i(x) + noise.
pub fn generate_dataset(system: &DynSystem, m: usize, seed: u64) -> Result<Vec<Dataset>> {
    if m == 0 {
        return Err(Error::InvalidInput("dataset size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(m);
    for _ in 0..m {
        let x: Vec<f64> = system
            .domain
            .iter()
            .map(|[lo, hi]| rng.gen_range(*lo..=*hi))
            .collect();
        inputs.push(x);
    }
    let mut targets = vec![Vec::with_capacity(m); system.dim];
    for x in &inputs {
        let y = system.step(x, &mut rng);
        for (d, yi) in y.into_iter().enumerate() {
            targets[d].push(yi);
        }
    }
    targets
        .into_iter()
        .map(|t| Dataset::new(inputs.clone(), t))
        .collect()
}
