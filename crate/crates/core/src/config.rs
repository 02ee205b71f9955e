//! Run configuration: a single JSON manifest drives every subcommand, and a
//! handful of command-line flags override individual fields so experiment
//! manifests stay reproducible.

use crate::error::{Error, Result};
use crate::kernels::Activation;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

fn default_m() -> usize {
    100
}
fn default_deltas() -> Vec<f64> {
    vec![0.05]
}
fn default_sweep_points() -> usize {
    401
}
fn default_queries() -> usize {
    10_000
}
fn default_trials() -> usize {
    10_000
}
fn default_coverage_queries() -> usize {
    20
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn one() -> f64 {
    1.0
}
fn default_epochs() -> usize {
    2000
}
fn default_step_size() -> f64 {
    1e-3
}
fn default_batch_fraction() -> f64 {
    0.02
}
fn default_gelu() -> Activation {
    Activation::Gelu
}
fn default_partition_per_dim() -> usize {
    7
}
fn default_region_grid() -> usize {
    2
}
fn default_slack() -> f64 {
    0.05
}
fn default_horizon() -> usize {
    10
}
fn default_bound_kinds() -> Vec<BoundKind> {
    vec![BoundKind::Prob, BoundKind::Det, BoundKind::Hashimoto]
}
fn default_mc_trajectories() -> usize {
    10_000
}

/// Kernel selection, either plain squared-exponential or one composed with a
/// learned feature map.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Se {
        #[serde(default = "one")]
        sigma_s: f64,
        #[serde(default = "one")]
        lengthscale: f64,
        #[serde(default)]
        unsquared_exponent: bool,
    },
    Deep {
        #[serde(default = "one")]
        sigma_s: f64,
        #[serde(default = "one")]
        lengthscale: f64,
        #[serde(default)]
        unsquared_exponent: bool,
        /// Load a serialized feature map instead of training one.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        feature_map: Option<PathBuf>,
        /// Hidden plus output widths, e.g. [16, 16, 16]; the input width is
        /// taken from the data.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        layers: Option<Vec<usize>>,
        #[serde(default = "default_gelu")]
        activation: Activation,
        #[serde(default = "default_epochs")]
        epochs: usize,
        #[serde(default = "default_step_size")]
        step_size: f64,
        #[serde(default = "default_batch_fraction")]
        batch_fraction: f64,
    },
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig::Se { sigma_s: 1.0, lengthscale: 1.0, unsquared_exponent: false }
    }
}

/// Regularization policy: a fixed value or a multiple of the noise radius.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaNPolicy {
    Absolute(f64),
    Ratio(f64),
}

impl Default for SigmaNPolicy {
    fn default() -> Self {
        SigmaNPolicy::Ratio(0.2)
    }
}

impl SigmaNPolicy {
    pub fn resolve(&self, sigma_v: f64) -> Result<f64> {
        let v = match self {
            SigmaNPolicy::Absolute(v) => *v,
            SigmaNPolicy::Ratio(r) => r * sigma_v,
        };
        if !(v > 0.0) {
            return Err(Error::Config(format!(
                "resolved sigma_n = {v} must be positive; use an absolute policy when sigma_v = 0"
            )));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Prob,
    Det,
    Hashimoto,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Prob => "prob",
            BoundKind::Det => "det",
            BoundKind::Hashimoto => "hashimoto",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodConfig {
    Auto,
    Simplex,
    FixedPoint,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig::Auto
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    /// Cells per dimension of the safe-set grid.
    #[serde(default = "default_partition_per_dim")]
    pub partition_per_dim: usize,
    /// Grid points per dimension when taking extremes over one region.
    #[serde(default = "default_region_grid")]
    pub grid_per_dim: usize,
    /// Multiplicative slack on the per-region error supremum.
    #[serde(default = "default_slack")]
    pub slack: f64,
    /// Step horizon N in the safety probability.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub method: MethodConfig,
    #[serde(default = "default_bound_kinds")]
    pub bound_kinds: Vec<BoundKind>,
    /// Monte Carlo trajectories simulated against the certificate; 0 skips.
    #[serde(default = "default_mc_trajectories")]
    pub mc_trajectories: usize,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        BarrierConfig {
            partition_per_dim: default_partition_per_dim(),
            grid_per_dim: default_region_grid(),
            slack: default_slack(),
            horizon: default_horizon(),
            method: MethodConfig::default(),
            bound_kinds: default_bound_kinds(),
            mc_trajectories: default_mc_trajectories(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Builtin system name; exclusive with `dataset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    /// CSV dataset path; exclusive with `system`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    /// Noise support radius; required in dataset mode, defaulted from the
    /// system otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_v: Option<f64>,
    /// RKHS norm budget per output; defaulted from the system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_bounds: Option<Vec<f64>>,
    /// Training set size drawn from the system.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub sigma_n: SigmaNPolicy,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Query-grid resolution of the sweep command.
    #[serde(default = "default_sweep_points")]
    pub sweep_points: usize,
    /// Uniformly drawn test points for the bench command.
    #[serde(default = "default_queries")]
    pub queries: usize,
    /// Fresh-noise refits for the coverage command.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Fixed query points tracked by the coverage command.
    #[serde(default = "default_coverage_queries")]
    pub coverage_queries: usize,
    /// Training sizes for the bench trend sweep; absent means a single run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench_m_values: Option<Vec<usize>>,
    #[serde(default)]
    pub barrier: BarrierConfig,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// Command-line flags win over manifest fields.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        sigma_n_ratio: Option<f64>,
        delta: Option<f64>,
        out: Option<PathBuf>,
    ) {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(r) = sigma_n_ratio {
            self.sigma_n = SigmaNPolicy::Ratio(r);
        }
        if let Some(d) = delta {
            self.deltas = vec![d];
        }
        if let Some(o) = out {
            self.out_dir = o;
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.system, &self.dataset) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("set either system or dataset, not both".into()))
            }
            (None, None) => return Err(Error::Config("one of system or dataset is required".into())),
            (None, Some(path)) => {
                if !path.exists() {
                    return Err(Error::Config(format!("dataset file {} not found", path.display())));
                }
                if self.sigma_v.is_none() {
                    return Err(Error::Config("dataset mode requires sigma_v".into()));
                }
                if self.norm_bounds.is_none() {
                    return Err(Error::Config("dataset mode requires norm_bounds".into()));
                }
            }
            (Some(_), None) => {}
        }
        if let Some(v) = self.sigma_v {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("sigma_v must be nonnegative, got {v}")));
            }
        }
        if let Some(bs) = &self.norm_bounds {
            if bs.iter().any(|b| !(b > &0.0)) {
                return Err(Error::Config("norm_bounds must be positive".into()));
            }
        }
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.deltas.is_empty() {
            return Err(Error::Config("deltas must be nonempty".into()));
        }
        for d in &self.deltas {
            if !(*d > 0.0 && *d < 1.0) {
                return Err(Error::Config(format!("delta {d} outside (0, 1)")));
            }
        }
        if self.sweep_points < 2 {
            return Err(Error::Config("sweep_points must be at least 2".into()));
        }
        if self.queries == 0 || self.coverage_queries == 0 {
            return Err(Error::Config("query counts must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if let Some(ms) = &self.bench_m_values {
            if ms.is_empty() || ms.iter().any(|&m| m == 0) {
                return Err(Error::Config("bench_m_values must be nonempty and positive".into()));
            }
        }
        match &self.kernel {
            KernelConfig::Se { sigma_s, lengthscale, .. } => {
                if !(sigma_s > &0.0) || !(lengthscale > &0.0) {
                    return Err(Error::Config("kernel scales must be positive".into()));
                }
            }
            KernelConfig::Deep {
                sigma_s,
                lengthscale,
                feature_map,
                layers,
                epochs: _,
                step_size,
                batch_fraction,
                ..
            } => {
                if !(sigma_s > &0.0) || !(lengthscale > &0.0) {
                    return Err(Error::Config("kernel scales must be positive".into()));
                }
                match (feature_map, layers) {
                    (Some(path), _) => {
                        if !path.exists() {
                            return Err(Error::Config(format!(
                                "feature map file {} not found",
                                path.display()
                            )));
                        }
                    }
                    (None, Some(ls)) => {
                        if ls.is_empty() || ls.iter().any(|&w| w == 0) {
                            return Err(Error::Config("layers must be nonempty and positive".into()));
                        }
                    }
                    (None, None) => {
                        return Err(Error::Config(
                            "deep kernel needs either feature_map or layers".into(),
                        ))
                    }
                }
                if !(step_size > &0.0) {
                    return Err(Error::Config("step_size must be positive".into()));
                }
                if !(*batch_fraction > 0.0 && *batch_fraction <= 1.0) {
                    return Err(Error::Config("batch_fraction must be in (0, 1]".into()));
                }
            }
        }
        let b = &self.barrier;
        if b.partition_per_dim == 0 {
            return Err(Error::Config("partition_per_dim must be at least 1".into()));
        }
        if b.grid_per_dim < 2 {
            return Err(Error::Config("grid_per_dim must be at least 2".into()));
        }
        if !(b.slack >= 0.0) {
            return Err(Error::Config("slack must be nonnegative".into()));
        }
        if b.bound_kinds.is_empty() {
            return Err(Error::Config("bound_kinds must be nonempty".into()));
        }
        Ok(())
    }
}
