//! Python bindings for the rkhsb library.
//!
//! The module mirrors the Rust API surface closely: fit a Gaussian process,
//! wrap it in a `BoundContext` for the bounded-noise error bounds, fit the
//! published baseline bounds for comparison, generate benchmark data, and
//! synthesize grid-based safety certificates.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rkhsb::barrier::{
    self, DetModel, MeanErrorModel, Partition, ProbModel, RegionDynamicsInterval, SynthesisMethod,
};
use rkhsb::bounds::baselines::{
    AbbasiBound, ChowdhuryBound, HashimotoBound, MaddalenaBound, SeegerBound,
};
use rkhsb::bounds::{BoundContext, SyntheticRkhsFunction};
use rkhsb::gp::{Dataset as CoreDataset, FittedGp};
use rkhsb::kernels::{self, Activation, FeatureMap as CoreFeatureMap, KernelSpec};
use rkhsb::systems::{builtin_system, generate_dataset, DynSystem};

/// Input errors become ValueError, numerical failures RuntimeError.
fn pyerr(e: rkhsb::Error) -> PyErr {
    use rkhsb::Error::*;
    match e {
        DimensionMismatch(..) | InvalidInput(_) | Config(_) | Io(_) | Json(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_activation(name: &str) -> PyResult<Activation> {
    match name {
        "gelu" => Ok(Activation::Gelu),
        "tanh" => Ok(Activation::Tanh),
        other => Err(PyValueError::new_err(format!(
            "unknown activation {other:?}, expected \"gelu\" or \"tanh\""
        ))),
    }
}

fn parse_box(pairs: Vec<(f64, f64)>) -> Vec<[f64; 2]> {
    pairs.into_iter().map(|(lo, hi)| [lo, hi]).collect()
}

// ---------------------------------------------------------------------------
// data and kernels
// ---------------------------------------------------------------------------

/// Training set: input points with one scalar target each.
#[pyclass(name = "Dataset", frozen)]
struct PyDataset {
    inner: CoreDataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> PyResult<Self> {
        Ok(PyDataset { inner: CoreDataset::new(inputs, targets).map_err(pyerr)? })
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(PyDataset { inner: CoreDataset::from_csv(text).map_err(pyerr)? })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[getter]
    fn inputs(&self) -> Vec<Vec<f64>> {
        self.inner.inputs.clone()
    }

    #[getter]
    fn targets(&self) -> Vec<f64> {
        self.inner.targets.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(m={}, dim={})", self.inner.len(), self.inner.dim())
    }
}

/// Feedforward feature map for deep kernels. Hidden layers are activated,
/// the final layer is linear.
#[pyclass(name = "FeatureMap", frozen)]
struct PyFeatureMap {
    inner: CoreFeatureMap,
}

#[pymethods]
impl PyFeatureMap {
    #[new]
    fn new(layers: Vec<usize>, activation: &str, seed: u64) -> PyResult<Self> {
        let act = parse_activation(activation)?;
        Ok(PyFeatureMap { inner: CoreFeatureMap::new(&layers, act, seed).map_err(pyerr)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyFeatureMap { inner: CoreFeatureMap::from_json(text).map_err(pyerr)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(pyerr)
    }

    fn forward(&self, x: Vec<f64>) -> Vec<f64> {
        self.inner.forward(&x)
    }

    fn mse(&self, inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> f64 {
        self.inner.mse(&inputs, &targets)
    }

    /// Mini-batch SGD on mean squared error; returns the best checkpoint.
    #[pyo3(signature = (inputs, targets, epochs, batch_fraction, step_size, seed))]
    fn train(
        &self,
        inputs: Vec<Vec<f64>>,
        targets: Vec<Vec<f64>>,
        epochs: usize,
        batch_fraction: f64,
        step_size: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let trained =
            kernels::train_feature_map(&self.inner, &inputs, &targets, epochs, batch_fraction, step_size, seed)
                .map_err(pyerr)?;
        Ok(PyFeatureMap { inner: trained })
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    fn __repr__(&self) -> String {
        format!("FeatureMap(layers={:?})", self.inner.layers)
    }
}

/// Squared-exponential kernel, optionally composed with a feature map.
#[pyclass(name = "Kernel", frozen)]
struct PyKernel {
    inner: KernelSpec,
}

#[pymethods]
impl PyKernel {
    #[staticmethod]
    fn se(sigma_s: f64, lengthscale: f64) -> PyResult<Self> {
        Ok(PyKernel { inner: KernelSpec::se(sigma_s, lengthscale).map_err(pyerr)? })
    }

    #[staticmethod]
    fn deep(sigma_s: f64, lengthscale: f64, map: &PyFeatureMap) -> PyResult<Self> {
        Ok(PyKernel { inner: KernelSpec::deep(sigma_s, lengthscale, map.inner.clone()).map_err(pyerr)? })
    }

    fn eval(&self, a: Vec<f64>, b: Vec<f64>) -> f64 {
        self.inner.eval(&a, &b)
    }

    #[getter]
    fn sigma_s(&self) -> f64 {
        self.inner.sigma_s()
    }
}

// ---------------------------------------------------------------------------
// posterior and bounds
// ---------------------------------------------------------------------------

/// Kernel-ridge posterior fitted on one scalar output.
#[pyclass(name = "Gp", frozen)]
struct PyGp {
    inner: FittedGp,
}

#[pymethods]
impl PyGp {
    #[new]
    fn new(kernel: &PyKernel, data: &PyDataset, sigma_n: f64) -> PyResult<Self> {
        Ok(PyGp { inner: FittedGp::fit(kernel.inner.clone(), &data.inner, sigma_n).map_err(pyerr)? })
    }

    fn mean(&self, x: Vec<f64>) -> f64 {
        self.inner.predict_mean(&x)
    }

    fn var(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.predict_var(&x).map_err(pyerr)
    }

    fn std(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.predict_std(&x).map_err(pyerr)
    }

    /// Posterior weight vector W_x; the mean is its dot product with Y.
    fn weights(&self, x: Vec<f64>) -> Vec<f64> {
        self.inner.weights(&x)
    }

    #[getter]
    fn sigma_n(&self) -> f64 {
        self.inner.sigma_n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Gp(m={}, dim={}, sigma_n={})", self.inner.len(), self.inner.dim(), self.inner.sigma_n())
    }
}

/// Pointwise error bounds under bounded-support noise: a fitted posterior
/// together with the noise radius and an RKHS norm budget.
#[pyclass(name = "BoundContext", frozen)]
struct PyBoundContext {
    inner: BoundContext,
}

#[pymethods]
impl PyBoundContext {
    #[new]
    fn new(gp: &PyGp, sigma_v: f64, norm_bound: f64) -> PyResult<Self> {
        Ok(PyBoundContext { inner: BoundContext::new(gp.inner.clone(), sigma_v, norm_bound).map_err(pyerr)? })
    }

    fn mean(&self, x: Vec<f64>) -> f64 {
        self.inner.gp().predict_mean(&x)
    }

    fn std(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.gp().predict_std(&x).map_err(pyerr)
    }

    /// Shared term sigma(x) * sqrt(B^2 - c*).
    fn rkhs_term(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.rkhs_term(&x).map_err(pyerr)
    }

    /// Bound holding with probability at least 1 - delta at this query.
    fn prob_bound(&self, x: Vec<f64>, delta: f64) -> PyResult<f64> {
        self.inner.prob_bound(&x, delta).map_err(pyerr)
    }

    /// Bound holding for every noise realization in the support.
    fn det_bound(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.det_bound(&x).map_err(pyerr)
    }

    /// Sub-Gaussian variance proxy 4 sigma_v^2 ||W_x||_2^2.
    fn lambda_x(&self, x: Vec<f64>) -> f64 {
        self.inner.lambda_x(&x)
    }

    #[getter]
    fn cstar(&self) -> f64 {
        self.inner.cstar().value
    }

    #[getter]
    fn cstar_converged(&self) -> bool {
        self.inner.cstar().converged
    }

    #[getter]
    fn sigma_v(&self) -> f64 {
        self.inner.sigma_v()
    }

    #[getter]
    fn norm_bound(&self) -> f64 {
        self.inner.norm_bound()
    }

    fn __repr__(&self) -> String {
        format!(
            "BoundContext(sigma_v={}, norm_bound={}, cstar={:.6})",
            self.inner.sigma_v(),
            self.inner.norm_bound(),
            self.inner.cstar().value
        )
    }
}

/// Function with a known RKHS norm, built from kernel sections.
#[pyclass(name = "RkhsFunction", frozen)]
struct PyRkhsFunction {
    inner: SyntheticRkhsFunction,
}

#[pymethods]
impl PyRkhsFunction {
    #[new]
    fn new(kernel: &PyKernel, centers: Vec<Vec<f64>>, coefficients: Vec<f64>) -> PyResult<Self> {
        let inner =
            SyntheticRkhsFunction::new(kernel.inner.clone(), centers, coefficients).map_err(pyerr)?;
        Ok(PyRkhsFunction { inner })
    }

    fn eval(&self, x: Vec<f64>) -> f64 {
        self.inner.eval(&x)
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.inner.norm()
    }
}

// ---------------------------------------------------------------------------
// baseline bounds
// ---------------------------------------------------------------------------

/// Information-gain bound with sigma_n^2 = 1 + 2/m.
#[pyclass(name = "Chowdhury", frozen)]
struct PyChowdhury {
    inner: ChowdhuryBound,
}

#[pymethods]
impl PyChowdhury {
    #[new]
    fn new(kernel: &PyKernel, data: &PyDataset, norm_bound: f64, sigma_v: f64, delta: f64) -> PyResult<Self> {
        let inner = ChowdhuryBound::fit(kernel.inner.clone(), &data.inner, norm_bound, sigma_v, delta)
            .map_err(pyerr)?;
        Ok(PyChowdhury { inner })
    }

    fn bound(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.bound(&x).map_err(pyerr)
    }

    fn mean(&self, x: Vec<f64>) -> f64 {
        self.inner.gp().predict_mean(&x)
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }
}

/// Deterministic bound with sigma_n = sigma_v; requires sigma_v > 0.
#[pyclass(name = "Hashimoto", frozen)]
struct PyHashimoto {
    inner: HashimotoBound,
}

#[pymethods]
impl PyHashimoto {
    #[new]
    fn new(kernel: &PyKernel, data: &PyDataset, norm_bound: f64, sigma_v: f64) -> PyResult<Self> {
        let inner =
            HashimotoBound::fit(kernel.inner.clone(), &data.inner, norm_bound, sigma_v).map_err(pyerr)?;
        Ok(PyHashimoto { inner })
    }

    fn bound(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.bound(&x).map_err(pyerr)
    }

    fn mean(&self, x: Vec<f64>) -> f64 {
        self.inner.gp().predict_mean(&x)
    }

    #[getter]
    fn beta_t(&self) -> f64 {
        self.inner.beta_t()
    }
}

/// Self-normalized deviation bound; sigma_n defaults to sqrt(1 + 2/m).
#[pyclass(name = "Abbasi", frozen)]
struct PyAbbasi {
    inner: AbbasiBound,
}

#[pymethods]
impl PyAbbasi {
    #[new]
    #[pyo3(signature = (kernel, data, norm_bound, sigma_v, delta, sigma_n=None))]
    fn new(
        kernel: &PyKernel,
        data: &PyDataset,
        norm_bound: f64,
        sigma_v: f64,
        delta: f64,
        sigma_n: Option<f64>,
    ) -> PyResult<Self> {
        let inner =
            AbbasiBound::fit(kernel.inner.clone(), &data.inner, norm_bound, sigma_v, delta, sigma_n)
                .map_err(pyerr)?;
        Ok(PyAbbasi { inner })
    }

    fn bound(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.bound(&x).map_err(pyerr)
    }

    fn mean(&self, x: Vec<f64>) -> f64 {
        self.inner.gp().predict_mean(&x)
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.inner.scale()
    }
}

/// Information-gain bound with sigma_n = sigma_v; requires sigma_v > 0.
#[pyclass(name = "Seeger", frozen)]
struct PySeeger {
    inner: SeegerBound,
}

#[pymethods]
impl PySeeger {
    #[new]
    fn new(kernel: &PyKernel, data: &PyDataset, norm_bound: f64, sigma_v: f64, delta: f64) -> PyResult<Self> {
        let inner = SeegerBound::fit(kernel.inner.clone(), &data.inner, norm_bound, sigma_v, delta)
            .map_err(pyerr)?;
        Ok(PySeeger { inner })
    }

    fn bound(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.bound(&x).map_err(pyerr)
    }

    fn mean(&self, x: Vec<f64>) -> f64 {
        self.inner.gp().predict_mean(&x)
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.inner.xi()
    }
}

/// Deterministic kernel-ridge bound on noise-free interpolation.
#[pyclass(name = "Maddalena", frozen)]
struct PyMaddalena {
    inner: MaddalenaBound,
}

#[pymethods]
impl PyMaddalena {
    #[new]
    fn new(kernel: &PyKernel, data: &PyDataset, norm_bound: f64, sigma_v: f64, sigma_n: f64) -> PyResult<Self> {
        let inner = MaddalenaBound::fit(kernel.inner.clone(), &data.inner, norm_bound, sigma_v, sigma_n)
            .map_err(pyerr)?;
        Ok(PyMaddalena { inner })
    }

    fn bound(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.bound(&x).map_err(pyerr)
    }

    #[getter]
    fn delta_box(&self) -> f64 {
        self.inner.delta_box()
    }
}

// ---------------------------------------------------------------------------
// benchmark systems
// ---------------------------------------------------------------------------

/// Discrete-time benchmark system with bounded-support noise.
#[pyclass(name = "System", frozen)]
struct PySystem {
    inner: DynSystem,
}

#[pymethods]
impl PySystem {
    /// One of: toy1d, lin2d, nl2d, dubins3d, car5d, lin4d.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(PySystem { inner: builtin_system(name).map_err(pyerr)? })
    }

    /// Noise-free dynamics.
    fn eval(&self, x: Vec<f64>) -> Vec<f64> {
        self.inner.eval(&x)
    }

    /// Noisy trajectory of `steps` transitions, starting state included.
    fn trajectory(&self, x0: Vec<f64>, steps: usize, seed: u64) -> Vec<Vec<f64>> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut path = Vec::with_capacity(steps + 1);
        let mut x = x0;
        path.push(x.clone());
        for _ in 0..steps {
            x = self.inner.step(&x, &mut rng);
            path.push(x.clone());
        }
        path
    }

    /// One dataset per output dimension, inputs sampled uniformly on the
    /// domain and targets observed through the system noise.
    fn generate_dataset(&self, m: usize, seed: u64) -> PyResult<Vec<PyDataset>> {
        let sets = generate_dataset(&self.inner, m, seed).map_err(pyerr)?;
        Ok(sets.into_iter().map(|inner| PyDataset { inner }).collect())
    }

    /// Empirical frequency of leaving the safe box within `horizon` steps.
    fn mc_unsafe_frequency(
        &self,
        safe_box: Vec<(f64, f64)>,
        initial_box: Vec<(f64, f64)>,
        horizon: usize,
        trajectories: usize,
        seed: u64,
    ) -> f64 {
        barrier::monte_carlo_unsafe_frequency(
            &self.inner,
            &parse_box(safe_box),
            &parse_box(initial_box),
            horizon,
            trajectories,
            seed,
        )
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn domain(&self) -> Vec<(f64, f64)> {
        self.inner.domain.iter().map(|[lo, hi]| (*lo, *hi)).collect()
    }

    #[getter]
    fn norm_bounds(&self) -> Vec<f64> {
        self.inner.norm_bounds.clone()
    }

    #[getter]
    fn sigma_v(&self) -> f64 {
        self.inner.noise.sigma_v
    }

    #[getter]
    fn initial_box(&self) -> Vec<(f64, f64)> {
        self.inner.initial_box.iter().map(|[lo, hi]| (*lo, *hi)).collect()
    }

    fn __repr__(&self) -> String {
        format!("System({}, dim={})", self.inner.name, self.inner.dim)
    }
}

// ---------------------------------------------------------------------------
// safety certificates
// ---------------------------------------------------------------------------

/// Grid barrier certificate: per-region values plus the scalars eta and beta
/// giving the safety probability floor 1 - (eta + N beta).
#[pyclass(name = "Certificate", frozen)]
struct PyCertificate {
    #[pyo3(get)]
    values: Vec<f64>,
    #[pyo3(get)]
    eta: f64,
    #[pyo3(get)]
    beta: f64,
    #[pyo3(get)]
    horizon: usize,
    #[pyo3(get)]
    safety_probability: f64,
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    degraded: bool,
    #[pyo3(get)]
    confidence_delta: Option<f64>,
}

#[pymethods]
impl PyCertificate {
    fn __repr__(&self) -> String {
        format!(
            "Certificate(P_s={:.6}, eta={:.6}, beta={:.6}, N={})",
            self.safety_probability, self.eta, self.beta, self.horizon
        )
    }
}

fn parse_method(name: &str) -> PyResult<SynthesisMethod> {
    match name {
        "auto" => Ok(SynthesisMethod::Auto),
        "simplex" => Ok(SynthesisMethod::Simplex),
        "fixed_point" => Ok(SynthesisMethod::FixedPoint),
        other => Err(PyValueError::new_err(format!(
            "unknown method {other:?}, expected \"auto\", \"simplex\" or \"fixed_point\""
        ))),
    }
}

/// Region dynamics, synthesis, and an independent re-verification, in one
/// call. `models` is invoked once per grid point and region.
fn certify(
    models: &[&dyn MeanErrorModel],
    safe_box: Vec<(f64, f64)>,
    per_dim: Vec<usize>,
    sigma_v: f64,
    initial_box: Vec<(f64, f64)>,
    horizon: usize,
    grid_per_dim: usize,
    slack: f64,
    method: SynthesisMethod,
    confidence_delta: Option<f64>,
) -> PyResult<PyCertificate> {
    let partition = Partition::grid(parse_box(safe_box), per_dim).map_err(pyerr)?;
    let initial = parse_box(initial_box);
    let mut dynamics: Vec<RegionDynamicsInterval> = Vec::with_capacity(partition.len());
    for i in 0..partition.len() {
        let region = partition.region(i);
        dynamics.push(barrier::region_dynamics(models, &region, grid_per_dim, slack).map_err(pyerr)?);
    }
    let cert = barrier::synthesize(&partition, &dynamics, sigma_v, &initial, horizon, method)
        .map_err(pyerr)?
        .with_confidence(confidence_delta);
    barrier::verify_certificate(&partition, &dynamics, sigma_v, &initial, &cert).map_err(pyerr)?;
    Ok(PyCertificate {
        values: cert.values,
        eta: cert.eta,
        beta: cert.beta,
        horizon: cert.horizon,
        safety_probability: cert.safety_probability,
        method: cert.method.to_string(),
        degraded: cert.degraded,
        confidence_delta: cert.confidence_delta,
    })
}

/// Synthesizes and verifies a barrier certificate from one bound context per
/// output dimension, using either the deterministic or the probabilistic
/// bound for the region reach sets.
#[pyfunction]
#[pyo3(signature = (contexts, kind, safe_box, per_dim, initial_box, horizon, grid_per_dim=2, slack=0.0, delta=None, method="auto"))]
#[allow(clippy::too_many_arguments)]
fn synthesize_barrier(
    contexts: Vec<PyRef<'_, PyBoundContext>>,
    kind: &str,
    safe_box: Vec<(f64, f64)>,
    per_dim: Vec<usize>,
    initial_box: Vec<(f64, f64)>,
    horizon: usize,
    grid_per_dim: usize,
    slack: f64,
    delta: Option<f64>,
    method: &str,
) -> PyResult<PyCertificate> {
    if contexts.is_empty() {
        return Err(PyValueError::new_err("contexts must be nonempty"));
    }
    let sigma_v = contexts[0].inner.sigma_v();
    if contexts.iter().any(|c| c.inner.sigma_v() != sigma_v) {
        return Err(PyValueError::new_err("contexts disagree on sigma_v"));
    }
    let method = parse_method(method)?;
    match kind {
        "det" => {
            let models: Vec<DetModel<'_>> = contexts.iter().map(|c| DetModel(&c.inner)).collect();
            let refs: Vec<&dyn MeanErrorModel> = models.iter().map(|m| m as &dyn MeanErrorModel).collect();
            certify(&refs, safe_box, per_dim, sigma_v, initial_box, horizon, grid_per_dim, slack, method, None)
        }
        "prob" => {
            let delta = delta
                .ok_or_else(|| PyValueError::new_err("kind \"prob\" requires delta"))?;
            let models: Vec<ProbModel<'_>> =
                contexts.iter().map(|c| ProbModel { ctx: &c.inner, delta }).collect();
            let refs: Vec<&dyn MeanErrorModel> = models.iter().map(|m| m as &dyn MeanErrorModel).collect();
            certify(&refs, safe_box, per_dim, sigma_v, initial_box, horizon, grid_per_dim, slack, method, Some(delta))
        }
        other => Err(PyValueError::new_err(format!(
            "unknown bound kind {other:?}, expected \"det\" or \"prob\""
        ))),
    }
}

/// Same synthesis driven by Hashimoto baseline bounds, one per output.
#[pyfunction]
#[pyo3(signature = (models, sigma_v, safe_box, per_dim, initial_box, horizon, grid_per_dim=2, slack=0.0, method="auto"))]
#[allow(clippy::too_many_arguments)]
fn synthesize_barrier_hashimoto(
    models: Vec<PyRef<'_, PyHashimoto>>,
    sigma_v: f64,
    safe_box: Vec<(f64, f64)>,
    per_dim: Vec<usize>,
    initial_box: Vec<(f64, f64)>,
    horizon: usize,
    grid_per_dim: usize,
    slack: f64,
    method: &str,
) -> PyResult<PyCertificate> {
    if models.is_empty() {
        return Err(PyValueError::new_err("models must be nonempty"));
    }
    let method = parse_method(method)?;
    let refs: Vec<&dyn MeanErrorModel> =
        models.iter().map(|m| &m.inner as &dyn MeanErrorModel).collect();
    certify(&refs, safe_box, per_dim, sigma_v, initial_box, horizon, grid_per_dim, slack, method, None)
}

/// Probability floor 1 - (eta + N beta), clamped into [0, 1].
#[pyfunction]
fn safety_probability(eta: f64, beta: f64, horizon: usize) -> f64 {
    barrier::safety_probability(eta, beta, horizon)
}

#[pymodule]
fn rkhsb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyFeatureMap>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyGp>()?;
    m.add_class::<PyBoundContext>()?;
    m.add_class::<PyRkhsFunction>()?;
    m.add_class::<PyChowdhury>()?;
    m.add_class::<PyHashimoto>()?;
    m.add_class::<PyAbbasi>()?;
    m.add_class::<PySeeger>()?;
    m.add_class::<PyMaddalena>()?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(synthesize_barrier, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_barrier_hashimoto, m)?)?;
    m.add_function(wrap_pyfunction!(safety_probability, m)?)?;
    Ok(())
}
