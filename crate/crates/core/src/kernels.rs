//! Kernels: the squared-exponential kernel and its deep variant, where inputs
//! pass through a trained feedforward feature map before the squared
//! exponential is applied.
//!
//! The feature map is a plain multilayer perceptron. Hidden layers use GeLU
//! (exact erf form) or tanh; the output layer is linear. Training is
//! full-batch-free SGD over random mini-batches with a fixed step size,
//! seeded so runs are bit-reproducible.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// activations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Gelu,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            // Exact GeLU: x * Phi(x) with the Gaussian CDF via erf.
            Activation::Gelu => 0.5 * x * (1.0 + libm::erf(x / std::f64::consts::SQRT_2)),
            Activation::Tanh => x.tanh(),
        }
    }

    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Gelu => {
                let phi_cdf = 0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2));
                let phi_pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
                phi_cdf + x * phi_pdf
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }
}

// ---------------------------------------------------------------------------
// feature map
// ---------------------------------------------------------------------------

/// Feedforward feature map. `layers` lists the dimensions d -> h1 -> ... -> s.
/// Layer i maps layers[i] inputs to layers[i+1] outputs through an augmented
/// weight matrix of shape (layers[i+1], layers[i] + 1); the trailing column
/// is the bias. Hidden layers are activated, the final layer is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub layers: Vec<usize>,
    pub weights: Vec<Mat>,
    pub activation: Activation,
    pub seed: u64,
}

/// Serialized form: weights flattened row-major per layer, bias column last.
#[derive(Serialize, Deserialize)]
struct FeatureMapFile {
    layers: Vec<usize>,
    weights: Vec<Vec<f64>>,
    activation: Activation,
    seed: u64,
}

impl FeatureMap {
    /// Fresh map with weights drawn uniformly in +-1/sqrt(fan_in) and zero
    /// biases, reproducible from the seed.
    pub fn new(layers: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidInput(
                "feature map needs input and output sizes".into(),
            ));
        }
        if layers.iter().any(|&l| l == 0) {
            return Err(Error::InvalidInput("zero-width layer".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(layers.len() - 1);
        for w in layers.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let scale = 1.0 / (fan_in as f64).sqrt();
            let mut m = Mat::zeros(fan_out, fan_in + 1);
            for i in 0..fan_out {
                for j in 0..fan_in {
                    m.set(i, j, rng.gen_range(-scale..scale));
                }
            }
            weights.push(m);
        }
        Ok(FeatureMap { layers: layers.to_vec(), weights, activation, seed })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layers.last().expect("non-empty layers")
    }

    /// Feedforward evaluation: activation on hidden layers, linear output.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_dim(), "feature map input dimension");
        let last = self.weights.len() - 1;
        let mut cur = x.to_vec();
        for (li, w) in self.weights.iter().enumerate() {
            let mut next = vec![0.0; w.rows()];
            for (i, ni) in next.iter_mut().enumerate() {
                let row = w.row(i);
                let mut s = row[cur.len()]; // bias
                for (j, c) in cur.iter().enumerate() {
                    s += row[j] * c;
                }
                *ni = if li < last { self.activation.apply(s) } else { s };
            }
            cur = next;
        }
        cur
    }

    /// Forward pass keeping pre-activations; used by backprop.
    fn forward_cached(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let last = self.weights.len() - 1;
        let mut acts = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(self.weights.len());
        for (li, w) in self.weights.iter().enumerate() {
            let cur = acts.last().expect("at least the input activation");
            let mut z = vec![0.0; w.rows()];
            for (i, zi) in z.iter_mut().enumerate() {
                let row = w.row(i);
                let mut s = row[cur.len()];
                for (j, c) in cur.iter().enumerate() {
                    s += row[j] * c;
                }
                *zi = s;
            }
            let a = if li < last {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            } else {
                z.clone()
            };
            pre.push(z);
            acts.push(a);
        }
        (pre, acts)
    }

    /// Mean squared error over a full input/target set.
    pub fn mse(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> f64 {
        let s = self.output_dim() as f64;
        let n = inputs.len() as f64;
        let mut total = 0.0;
        for (x, y) in inputs.iter().zip(targets) {
            let out = self.forward(x);
            for (o, t) in out.iter().zip(y) {
                let d = o - t;
                total += d * d;
            }
        }
        total / (n * s)
    }

    /// Accumulates the gradient of the squared error of one sample into
    /// `grads`; returns the sample's summed squared error.
    fn backprop_into(&self, x: &[f64], y: &[f64], grads: &mut [Mat]) -> f64 {
        let (pre, acts) = self.forward_cached(x);
        let out = acts.last().expect("output activation");
        let mut err = 0.0;
        // delta at the linear output layer: d(sum sq err)/d z = 2 (out - y)
        let mut delta: Vec<f64> = out
            .iter()
            .zip(y)
            .map(|(o, t)| {
                let d = o - t;
                err += d * d;
                2.0 * d
            })
            .collect();
        for li in (0..self.weights.len()).rev() {
            let input = &acts[li];
            let g = &mut grads[li];
            for (i, di) in delta.iter().enumerate() {
                for (j, inj) in input.iter().enumerate() {
                    let cur = g.get(i, j);
                    g.set(i, j, cur + di * inj);
                }
                let bias_col = input.len();
                let cur = g.get(i, bias_col);
                g.set(i, bias_col, cur + di);
            }
            if li == 0 {
                break;
            }
            let w = &self.weights[li];
            let mut prev = vec![0.0; self.layers[li]];
            for (j, pj) in prev.iter_mut().enumerate() {
                let mut s = 0.0;
                for (i, di) in delta.iter().enumerate() {
                    s += w.get(i, j) * di;
                }
                *pj = s * self.activation.derivative(pre[li - 1][j]);
            }
            delta = prev;
        }
        err
    }

    /// Gradient of the mean squared error over a sample set, laid out like
    /// `weights`. Exposed for the finite-difference checks in the tests.
    pub fn mse_gradient(&self, inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Vec<Mat> {
        let mut grads: Vec<Mat> = self
            .weights
            .iter()
            .map(|w| Mat::zeros(w.rows(), w.cols()))
            .collect();
        for (x, y) in inputs.iter().zip(targets) {
            self.backprop_into(x, y, &mut grads);
        }
        let scale = 1.0 / (inputs.len() as f64 * self.output_dim() as f64);
        for g in &mut grads {
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    g.set(i, j, g.get(i, j) * scale);
                }
            }
        }
        grads
    }

    pub fn to_json(&self) -> Result<String> {
        let file = FeatureMapFile {
            layers: self.layers.clone(),
            weights: self
                .weights
                .iter()
                .map(|w| {
                    let mut flat = Vec::with_capacity(w.rows() * w.cols());
                    for i in 0..w.rows() {
                        flat.extend_from_slice(w.row(i));
                    }
                    flat
                })
                .collect(),
            activation: self.activation,
            seed: self.seed,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FeatureMapFile = serde_json::from_str(text)?;
        if file.layers.len() < 2 {
            return Err(Error::Config("feature map needs at least two layers".into()));
        }
        if file.weights.len() != file.layers.len() - 1 {
            return Err(Error::Config(format!(
                "expected {} weight blocks, found {}",
                file.layers.len() - 1,
                file.weights.len()
            )));
        }
        let mut weights = Vec::with_capacity(file.weights.len());
        for (idx, flat) in file.weights.iter().enumerate() {
            let rows = file.layers[idx + 1];
            let cols = file.layers[idx] + 1;
            if flat.len() != rows * cols {
                return Err(Error::Config(format!(
                    "weight block {idx} has {} entries, expected {}",
                    flat.len(),
                    rows * cols
                )));
            }
            let mut m = Mat::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    m.set(i, j, flat[i * cols + j]);
                }
            }
            weights.push(m);
        }
        Ok(FeatureMap {
            layers: file.layers,
            weights,
            activation: file.activation,
            seed: file.seed,
        })
    }
}

/// Trains the map by mini-batch SGD on mean squared error and returns the
/// best checkpointed weights, so the result never scores worse than the
/// input map on the full training set.
///
/// Each epoch draws ceil(n * batch_fraction) samples without replacement and
/// takes one fixed-size step. Loss is checkpointed every 50 epochs.
pub fn train_feature_map(
    map: &FeatureMap,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    epochs: usize,
    batch_fraction: f64,
    step_size: f64,
    seed: u64,
) -> Result<FeatureMap> {
    if inputs.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch(inputs.len(), targets.len()));
    }
    if !(batch_fraction > 0.0 && batch_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "batch_fraction {batch_fraction} outside (0, 1]"
        )));
    }
    let s = map.output_dim();
    for (x, y) in inputs.iter().zip(targets) {
        if x.len() != map.input_dim() {
            return Err(Error::DimensionMismatch(x.len(), map.input_dim()));
        }
        if y.len() != s {
            return Err(Error::DimensionMismatch(y.len(), s));
        }
    }

    let n = inputs.len();
    let batch = ((n as f64 * batch_fraction).ceil() as usize).clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = map.clone();
    let mut best = map.clone();
    let mut best_loss = map.mse(inputs, targets);
    if !best_loss.is_finite() {
        return Err(Error::TrainingDiverged { epoch: 0 });
    }

    let mut indices: Vec<usize> = (0..n).collect();
    let scale = step_size / (batch as f64 * s as f64);
    for epoch in 0..epochs {
        // Partial Fisher-Yates: the first `batch` entries become the sample.
        for i in 0..batch {
            let j = rng.gen_range(i..n);
            indices.swap(i, j);
        }
        let mut grads: Vec<Mat> = current
            .weights
            .iter()
            .map(|w| Mat::zeros(w.rows(), w.cols()))
            .collect();
        let mut batch_err = 0.0;
        for &idx in &indices[..batch] {
            batch_err += current.backprop_into(&inputs[idx], &targets[idx], &mut grads);
        }
        if !batch_err.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        for (w, g) in current.weights.iter_mut().zip(&grads) {
            for i in 0..w.rows() {
                for j in 0..w.cols() {
                    w.set(i, j, w.get(i, j) - scale * g.get(i, j));
                }
            }
        }
        if (epoch + 1) % 50 == 0 || epoch + 1 == epochs {
            let loss = current.mse(inputs, targets);
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            if loss < best_loss {
                best_loss = loss;
                best = current.clone();
            }
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------------

/// Squared-exponential parameters. `unsquared_exponent` switches the exponent
/// from -r^2/(2 l^2) to -r/(2 l^2); the squared form is the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeParams {
    pub sigma_s: f64,
    pub lengthscale: f64,
    #[serde(default)]
    pub unsquared_exponent: bool,
}

impl SeParams {
    pub fn new(sigma_s: f64, lengthscale: f64) -> Result<Self> {
        if !(sigma_s > 0.0) || !(lengthscale > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kernel parameters must be positive: sigma_s = {sigma_s}, lengthscale = {lengthscale}"
            )));
        }
        Ok(SeParams { sigma_s, lengthscale, unsquared_exponent: false })
    }

    #[inline]
    fn eval_dist2(&self, dist2: f64) -> f64 {
        let denom = 2.0 * self.lengthscale * self.lengthscale;
        let arg = if self.unsquared_exponent { dist2.sqrt() } else { dist2 };
        self.sigma_s * (-arg / denom).exp()
    }
}

/// Kernel choice: squared exponential on raw inputs, or on the outputs of a
/// feature map (the deep variant).
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    SquaredExponential(SeParams),
    Deep { se: SeParams, map: FeatureMap },
}

impl KernelSpec {
    pub fn se(sigma_s: f64, lengthscale: f64) -> Result<Self> {
        Ok(KernelSpec::SquaredExponential(SeParams::new(sigma_s, lengthscale)?))
    }

    pub fn deep(sigma_s: f64, lengthscale: f64, map: FeatureMap) -> Result<Self> {
        Ok(KernelSpec::Deep { se: SeParams::new(sigma_s, lengthscale)?, map })
    }

    pub fn params(&self) -> &SeParams {
        match self {
            KernelSpec::SquaredExponential(p) => p,
            KernelSpec::Deep { se, .. } => se,
        }
    }

    pub fn set_unsquared_exponent(&mut self, flag: bool) {
        match self {
            KernelSpec::SquaredExponential(p) => p.unsquared_exponent = flag,
            KernelSpec::Deep { se, .. } => se.unsquared_exponent = flag,
        }
    }

    pub fn sigma_s(&self) -> f64 {
        self.params().sigma_s
    }

    /// Expected input dimension, if the kernel constrains it.
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            KernelSpec::SquaredExponential(_) => None,
            KernelSpec::Deep { map, .. } => Some(map.input_dim()),
        }
    }

    /// Maps a point into the space the squared exponential acts on.
    pub fn map_input(&self, x: &[f64]) -> Vec<f64> {
        match self {
            KernelSpec::SquaredExponential(_) => x.to_vec(),
            KernelSpec::Deep { map, .. } => map.forward(x),
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        if a.len() != b.len() {
            panic!("kernel arguments differ in dimension: {} vs {}", a.len(), b.len());
        }
        let (fa, fb) = (self.map_input(a), self.map_input(b));
        self.params().eval_dist2(dist2(&fa, &fb))
    }

    /// Kernel evaluation between points already passed through `map_input`.
    #[inline]
    pub fn eval_mapped(&self, fa: &[f64], fb: &[f64]) -> f64 {
        self.params().eval_dist2(dist2(fa, fb))
    }
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Symmetric Gram matrix; the diagonal is written as sigma_s exactly.
pub fn kernel_matrix(spec: &KernelSpec, points: &[Vec<f64>]) -> Result<Mat> {
    if points.is_empty() {
        return Err(Error::InvalidInput("kernel matrix needs at least one point".into()));
    }
    let mapped: Vec<Vec<f64>> = points.iter().map(|p| spec.map_input(p)).collect();
    let n = points.len();
    let mut k = Mat::zeros(n, n);
    for i in 0..n {
        k.set(i, i, spec.sigma_s());
        for j in (i + 1)..n {
            let v = spec.eval_mapped(&mapped[i], &mapped[j]);
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    Ok(k)
}

/// Cross-kernel vector K_{x, points}.
pub fn kernel_vector(spec: &KernelSpec, points: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let fx = spec.map_input(x);
    points
        .iter()
        .map(|p| spec.eval_mapped(&spec.map_input(p), &fx))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigenvalues;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn se_closed_forms() {
        let k = KernelSpec::se(1.0, 1.0).unwrap();
        // Squared distance 2 at unit parameters gives exp(-1).
        let v = k.eval(&[0.0, 0.0], &[1.0, 1.0]);
        assert_abs_diff_eq!(v, (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.367879441, epsilon = 1e-9);
        assert_eq!(k.eval(&[0.3, -0.7], &[0.3, -0.7]), 1.0);
    }

    #[test]
    fn se_rejects_bad_parameters() {
        assert!(KernelSpec::se(0.0, 1.0).is_err());
        assert!(KernelSpec::se(1.0, -2.0).is_err());
    }

    #[test]
    fn unsquared_variant_changes_offdiagonal_only() {
        let mut p = SeParams::new(2.0, 1.5).unwrap();
        p.unsquared_exponent = true;
        let k = KernelSpec::SquaredExponential(p);
        assert_eq!(k.eval(&[1.0], &[1.0]), 2.0);
        // r = 2, exponent -2 / (2 * 2.25).
        assert_abs_diff_eq!(k.eval(&[0.0], &[2.0]), 2.0 * (-2.0 / 4.5f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn gram_matrix_is_psd_and_unit_diagonal() {
        let k = KernelSpec::se(1.3, 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
            .collect();
        let gram = kernel_matrix(&k, &pts).unwrap();
        for i in 0..30 {
            assert_eq!(gram.get(i, i), 1.3);
        }
        let eigs = sym_eigenvalues(&gram).unwrap();
        assert!(eigs[0] >= -1e-8 * 1.3, "min eigenvalue {}", eigs[0]);
    }

    #[test]
    fn gelu_values() {
        assert_eq!(Activation::Gelu.apply(0.0), 0.0);
        assert_abs_diff_eq!(Activation::Gelu.apply(1.0), 0.8413447461, epsilon = 1e-9);
        assert_abs_diff_eq!(Activation::Gelu.apply(-1.0), -0.1586552539, epsilon = 1e-9);
    }

    #[test]
    fn feature_map_forward_is_deterministic_and_matches_manual() {
        let map = FeatureMap::new(&[2, 3, 2], Activation::Tanh, 42).unwrap();
        let a = map.forward(&[0.5, -0.25]);
        let b = map.forward(&[0.5, -0.25]);
        assert_eq!(a, b);
        // Manual recomputation through the stored weights.
        let w0 = &map.weights[0];
        let w1 = &map.weights[1];
        let x = [0.5, -0.25];
        let mut h = [0.0; 3];
        for i in 0..3 {
            let z = w0.get(i, 0) * x[0] + w0.get(i, 1) * x[1] + w0.get(i, 2);
            h[i] = z.tanh();
        }
        for i in 0..2 {
            let z = w1.get(i, 0) * h[0] + w1.get(i, 1) * h[1] + w1.get(i, 2) * h[2] + w1.get(i, 3);
            assert_abs_diff_eq!(a[i], z, epsilon = 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let map = FeatureMap::new(&[2, 4, 3], Activation::Gelu, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let inputs: Vec<Vec<f64>> = (0..6)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let targets: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let grads = map.mse_gradient(&inputs, &targets);
        let h = 1e-5;
        for li in 0..map.weights.len() {
            for i in 0..map.weights[li].rows() {
                for j in 0..map.weights[li].cols() {
                    let w = map.weights[li].get(i, j);
                    let mut plus = map.clone();
                    plus.weights[li].set(i, j, w + h);
                    let mut minus = map.clone();
                    minus.weights[li].set(i, j, w - h);
                    let fd = (plus.mse(&inputs, &targets) - minus.mse(&inputs, &targets)) / (2.0 * h);
                    let bp = grads[li].get(i, j);
                    let denom = fd.abs().max(1e-8);
                    assert!(
                        (fd - bp).abs() / denom < 1e-4,
                        "layer {li} ({i},{j}): fd {fd} vs backprop {bp}"
                    );
                }
            }
        }
    }

    #[test]
    fn training_reduces_loss_and_zero_epochs_is_identity() {
        let map = FeatureMap::new(&[1, 8, 1], Activation::Gelu, 5).unwrap();
        let inputs: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 20.0 - 1.0]).collect();
        let targets: Vec<Vec<f64>> = inputs.iter().map(|x| vec![x[0] * x[0]]).collect();
        let before = map.mse(&inputs, &targets);
        let same = train_feature_map(&map, &inputs, &targets, 0, 0.5, 1e-2, 9).unwrap();
        assert_eq!(same, map);
        let trained = train_feature_map(&map, &inputs, &targets, 2000, 0.5, 5e-2, 9).unwrap();
        let after = trained.mse(&inputs, &targets);
        assert!(after <= before, "loss rose: {before} -> {after}");
        assert!(after < 0.5 * before, "training barely moved: {before} -> {after}");
    }

    #[test]
    fn training_is_seed_reproducible() {
        let map = FeatureMap::new(&[1, 4, 1], Activation::Tanh, 5).unwrap();
        let inputs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 10.0]).collect();
        let targets: Vec<Vec<f64>> = inputs.iter().map(|x| vec![x[0].sin()]).collect();
        let a = train_feature_map(&map, &inputs, &targets, 100, 0.25, 1e-2, 77).unwrap();
        let b = train_feature_map(&map, &inputs, &targets, 100, 0.25, 1e-2, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_is_reported_with_epoch() {
        let map = FeatureMap::new(&[1, 6, 1], Activation::Gelu, 2).unwrap();
        let inputs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let targets: Vec<Vec<f64>> = inputs.iter().map(|x| vec![x[0] * 100.0]).collect();
        let res = train_feature_map(&map, &inputs, &targets, 500, 1.0, 1e6, 3);
        assert!(matches!(res, Err(Error::TrainingDiverged { .. })));
    }

    #[test]
    fn batch_fraction_validation() {
        let map = FeatureMap::new(&[1, 2, 1], Activation::Gelu, 2).unwrap();
        let inputs = vec![vec![0.0]];
        let targets = vec![vec![0.0]];
        assert!(train_feature_map(&map, &inputs, &targets, 1, 0.0, 1e-3, 1).is_err());
        assert!(train_feature_map(&map, &inputs, &targets, 1, 1.5, 1e-3, 1).is_err());
    }

    #[test]
    fn feature_map_json_round_trip() {
        let map = FeatureMap::new(&[2, 5, 3], Activation::Gelu, 19).unwrap();
        let text = map.to_json().unwrap();
        let back = FeatureMap::from_json(&text).unwrap();
        assert_eq!(map, back);
        assert!(FeatureMap::from_json("{\"layers\": [2], \"weights\": [], \"activation\": \"gelu\", \"seed\": 0}").is_err());
    }

    #[test]
    fn deep_kernel_diagonal_and_symmetry() {
        let map = FeatureMap::new(&[2, 8, 4], Activation::Gelu, 23).unwrap();
        let k = KernelSpec::deep(0.9, 1.2, map).unwrap();
        assert_eq!(k.eval(&[0.4, 0.1], &[0.4, 0.1]), 0.9);
        let a = k.eval(&[0.4, 0.1], &[-0.3, 0.8]);
        let b = k.eval(&[-0.3, 0.8], &[0.4, 0.1]);
        assert_eq!(a, b);
        assert!(a > 0.0 && a <= 0.9);
    }

    proptest! {
        #[test]
        fn kernel_symmetry_and_bounds(
            ax in -5.0f64..5.0, ay in -5.0f64..5.0,
            bx in -5.0f64..5.0, by in -5.0f64..5.0,
            sigma in 0.1f64..4.0, len in 0.1f64..4.0,
        ) {
            let k = KernelSpec::se(sigma, len).unwrap();
            let u = [ax, ay];
            let v = [bx, by];
            let kuv = k.eval(&u, &v);
            prop_assert_eq!(kuv, k.eval(&v, &u));
            // exp underflows to exactly zero for far-apart points
            prop_assert!(kuv >= 0.0 && kuv <= sigma + 1e-15);
        }
    }
}
