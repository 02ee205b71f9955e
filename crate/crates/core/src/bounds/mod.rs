//! Error bounds for the Gaussian process posterior mean under an RKHS norm
//! assumption and bounded-support observation noise.
//!
//! With W_x the posterior weight row, sigma_D the posterior deviation, B the
//! norm bound and c* the box minimum from [`cstar`], the pointwise bounds are
//!
//! * RKHS term: sigma_D(x) sqrt(B^2 - c*), valid for the noise-free part of
//!   the error regardless of sigma_n;
//! * probabilistic: RKHS term + sqrt(lambda_x/2 ln(2/delta)), where
//!   lambda_x = 4 sigma_v^2 |W_x|_2^2 is the Hoeffding sub-Gaussian scale of
//!   the weighted noise W_x v;
//! * deterministic: RKHS term + Lambda_x with Lambda_x = sigma_v |W_x|_1,
//!   the worst case of the weighted noise.
//!
//! `uniform_bound` lifts any pointwise bound to a region by a grid maximum
//! with a declared slack factor; `coverage_report` replays fresh noise draws
//! through the full pipeline and tallies violations.

pub mod baselines;
pub mod cstar;

pub use baselines::{info_gain, AbbasiBound, ChowdhuryBound, HashimotoBound, MaddalenaBound, SeegerBound};
pub use cstar::{compute_cstar, CstarResult};

use crate::error::{Error, Result};
use crate::gp::FittedGp;
use crate::kernels::{kernel_matrix, KernelSpec};
use crate::linalg::dot;
use crate::systems::NoiseSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pointwise posterior quantities shared by the bounds, computed from one
/// kernel-row solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEvaluation {
    pub mean: f64,
    pub std: f64,
    pub lambda_x: f64,
    pub capital_lambda: f64,
    rkhs_term: f64,
}

impl PointEvaluation {
    pub fn rkhs_term(&self) -> f64 {
        self.rkhs_term
    }

    /// Probabilistic bound at confidence 1 - delta.
    pub fn prob_bound(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(self.rkhs_term + (self.lambda_x / 2.0 * (2.0 / delta).ln()).sqrt())
    }

    /// Deterministic worst-case bound.
    pub fn det_bound(&self) -> f64 {
        self.rkhs_term + self.capital_lambda
    }
}

/// A fitted posterior plus the noise support and norm bound, with c*
/// computed once at construction.
#[derive(Debug, Clone)]
pub struct BoundContext {
    gp: FittedGp,
    sigma_v: f64,
    norm_bound: f64,
    cstar: CstarResult,
    sqrt_b2_minus_cstar: f64,
}

impl BoundContext {
    pub fn new(gp: FittedGp, sigma_v: f64, norm_bound: f64) -> Result<Self> {
        if !(sigma_v >= 0.0) || !sigma_v.is_finite() {
            return Err(Error::InvalidInput(format!("sigma_v must be nonnegative, got {sigma_v}")));
        }
        if !(norm_bound > 0.0) || !norm_bound.is_finite() {
            return Err(Error::InvalidInput(format!("norm bound must be positive, got {norm_bound}")));
        }
        let cstar = compute_cstar(&gp, sigma_v);
        let radicand = norm_bound * norm_bound - cstar.value;
        if radicand < 0.0 {
            return Err(Error::NormBoundTooSmall(format!(
                "B^2 = {:.6} is below c* = {:.6}; the data rejects this norm bound",
                norm_bound * norm_bound,
                cstar.value
            )));
        }
        Ok(BoundContext {
            gp,
            sigma_v,
            norm_bound,
            cstar,
            sqrt_b2_minus_cstar: radicand.sqrt(),
        })
    }

    pub fn gp(&self) -> &FittedGp {
        &self.gp
    }

    pub fn sigma_v(&self) -> f64 {
        self.sigma_v
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn cstar(&self) -> &CstarResult {
        &self.cstar
    }

    /// All pointwise quantities from one solve against the factorization.
    pub fn evaluate(&self, x: &[f64]) -> Result<PointEvaluation> {
        let (mean, var, weights) = self.gp.mean_var_weights(x)?;
        let l2sq = dot(&weights, &weights);
        let l1: f64 = weights.iter().map(|w| w.abs()).sum();
        let std = var.sqrt();
        Ok(PointEvaluation {
            mean,
            std,
            lambda_x: 4.0 * self.sigma_v * self.sigma_v * l2sq,
            capital_lambda: self.sigma_v * l1,
            rkhs_term: std * self.sqrt_b2_minus_cstar,
        })
    }

    /// Hoeffding scale of the weighted noise at x.
    pub fn lambda_x(&self, x: &[f64]) -> f64 {
        let w = self.gp.weights(x);
        4.0 * self.sigma_v * self.sigma_v * dot(&w, &w)
    }

    /// Worst-case weighted noise at x.
    pub fn capital_lambda(&self, x: &[f64]) -> f64 {
        let w = self.gp.weights(x);
        self.sigma_v * w.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// sigma_D(x) sqrt(B^2 - c*).
    pub fn rkhs_term(&self, x: &[f64]) -> Result<f64> {
        Ok(self.evaluate(x)?.rkhs_term)
    }

    pub fn prob_bound(&self, x: &[f64], delta: f64) -> Result<f64> {
        self.evaluate(x)?.prob_bound(delta)
    }

    pub fn det_bound(&self, x: &[f64]) -> Result<f64> {
        Ok(self.evaluate(x)?.det_bound())
    }
}

// ---------------------------------------------------------------------------
// region grids and the uniform bound
// ---------------------------------------------------------------------------

/// Axis-aligned grid over a box, `per_dim >= 2` points per dimension,
/// corners included.
pub fn grid_points(region: &[[f64; 2]], per_dim: usize) -> Result<Vec<Vec<f64>>> {
    if per_dim < 2 {
        return Err(Error::InvalidInput(format!(
            "grid needs at least 2 points per dimension, got {per_dim}"
        )));
    }
    for [lo, hi] in region {
        if !(lo <= hi) {
            return Err(Error::InvalidInput(format!("empty region interval [{lo}, {hi}]")));
        }
    }
    let d = region.len();
    let mut points = Vec::with_capacity(per_dim.pow(d as u32));
    let mut idx = vec![0usize; d];
    loop {
        let p: Vec<f64> = idx
            .iter()
            .zip(region)
            .map(|(&i, [lo, hi])| lo + (hi - lo) * i as f64 / (per_dim - 1) as f64)
            .collect();
        points.push(p);
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < per_dim {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return Ok(points);
            }
        }
    }
}

/// Grid maximum of a pointwise bound over a region, inflated by the declared
/// slack factor. This is the region lift used everywhere a supremum is
/// needed; the grid density and slack are the caller's accuracy knobs.
pub fn uniform_bound<F>(region: &[[f64; 2]], grid_per_dim: usize, slack: f64, mut f: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(slack >= 0.0) {
        return Err(Error::InvalidInput(format!("slack must be nonnegative, got {slack}")));
    }
    let mut max = f64::NEG_INFINITY;
    for p in grid_points(region, grid_per_dim)? {
        let v = f(&p)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("bound evaluation at {p:?}")));
        }
        max = max.max(v);
    }
    Ok(max * (1.0 + slack))
}

// ---------------------------------------------------------------------------
// synthetic RKHS functions
// ---------------------------------------------------------------------------

/// Finite kernel expansion f(x) = sum_i alpha_i kappa(x, z_i) with its exact
/// RKHS norm sqrt(alpha^T K alpha); the ground truth for validity tests.
#[derive(Debug, Clone)]
pub struct SyntheticRkhsFunction {
    kernel: KernelSpec,
    centers: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    norm: f64,
}

impl SyntheticRkhsFunction {
    pub fn new(kernel: KernelSpec, centers: Vec<Vec<f64>>, coefficients: Vec<f64>) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::DimensionMismatch(centers.len(), coefficients.len()));
        }
        let k = kernel_matrix(&kernel, &centers)?;
        let ka = k.matvec(&coefficients);
        let norm_sq = dot(&coefficients, &ka);
        if norm_sq < -1e-12 {
            return Err(Error::NotPositiveDefinite(format!("norm^2 = {norm_sq:.3e}")));
        }
        Ok(SyntheticRkhsFunction {
            kernel,
            centers,
            coefficients,
            norm: norm_sq.max(0.0).sqrt(),
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.coefficients)
            .map(|(c, a)| a * self.kernel.eval(c, x))
            .sum()
    }

    /// Exact RKHS norm of the expansion.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }
}

// ---------------------------------------------------------------------------
// coverage
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CoverageConfig {
    pub trials: usize,
    pub deltas: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DeltaCoverage {
    pub delta: f64,
    /// Violation frequency of the probabilistic bound per query point,
    /// across noise redraws.
    pub per_query_rate: Vec<f64>,
    pub max_rate: f64,
    pub mean_rate: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CoverageReport {
    pub trials: usize,
    pub queries: usize,
    /// (trial, query) pairs where |mu - f| exceeded the deterministic bound;
    /// any nonzero count falsifies the worst-case guarantee.
    pub det_violations: usize,
    pub det_checks: usize,
    pub per_delta: Vec<DeltaCoverage>,
    /// Trials whose c* solve hit the iteration cap (still valid, degraded).
    pub degraded_cstar_trials: usize,
}

/// Redraws the noise `trials` times over fixed inputs, refits, recomputes
/// c*, and tallies bound violations at the query points.
#[allow(clippy::too_many_arguments)]
pub fn coverage_report<F>(
    kernel: &KernelSpec,
    inputs: &[Vec<f64>],
    queries: &[Vec<f64>],
    true_fn: F,
    noise: NoiseSpec,
    sigma_n: f64,
    norm_bound: f64,
    cfg: &CoverageConfig,
) -> Result<CoverageReport>
where
    F: Fn(&[f64]) -> f64,
{
    if cfg.trials == 0 || queries.is_empty() || inputs.is_empty() {
        return Err(Error::InvalidInput("coverage needs trials, inputs and queries".into()));
    }
    for d in &cfg.deltas {
        if !(*d > 0.0 && *d < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {d}")));
        }
    }
    let f_train: Vec<f64> = inputs.iter().map(|x| true_fn(x)).collect();
    let f_query: Vec<f64> = queries.iter().map(|x| true_fn(x)).collect();

    let mut det_violations = 0;
    let mut degraded = 0;
    let mut counts = vec![vec![0usize; queries.len()]; cfg.deltas.len()];
    let ln_factors: Vec<f64> = cfg.deltas.iter().map(|d| (2.0 / d).ln() / 2.0).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for trial in 0..cfg.trials {
        rng.set_stream(trial as u64);
        let targets: Vec<f64> = f_train.iter().map(|f| f + noise.sample(&mut rng)).collect();
        let data = crate::gp::Dataset::new(inputs.to_vec(), targets)?;
        let gp = FittedGp::fit(kernel.clone(), &data, sigma_n)?;
        let ctx = BoundContext::new(gp, noise.sigma_v, norm_bound)?;
        if !ctx.cstar().converged {
            degraded += 1;
        }
        for (qi, q) in queries.iter().enumerate() {
            let ev = ctx.evaluate(q)?;
            let err = (ev.mean - f_query[qi]).abs();
            if err > ev.det_bound() {
                det_violations += 1;
            }
            for (di, lf) in ln_factors.iter().enumerate() {
                let bound = ev.rkhs_term + (ev.lambda_x * lf).sqrt();
                if err > bound {
                    counts[di][qi] += 1;
                }
            }
        }
    }

    let per_delta = cfg
        .deltas
        .iter()
        .zip(counts)
        .map(|(&delta, row)| {
            let rates: Vec<f64> = row.iter().map(|&c| c as f64 / cfg.trials as f64).collect();
            let max_rate = rates.iter().cloned().fold(0.0, f64::max);
            let mean_rate = rates.iter().sum::<f64>() / rates.len() as f64;
            DeltaCoverage { delta, per_query_rate: rates, max_rate, mean_rate }
        })
        .collect();

    Ok(CoverageReport {
        trials: cfg.trials,
        queries: queries.len(),
        det_violations,
        det_checks: cfg.trials * queries.len(),
        per_delta,
        degraded_cstar_trials: degraded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::Dataset;
    use crate::systems::NoiseKind;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn unit_context() -> BoundContext {
        let data = Dataset::new(vec![vec![0.0]], vec![2.0]).unwrap();
        let gp = FittedGp::fit(KernelSpec::se(1.0, 1.0).unwrap(), &data, 1.0).unwrap();
        BoundContext::new(gp, 0.5, 2.0).unwrap()
    }

    #[test]
    fn single_point_chain() {
        let ctx = unit_context();
        assert_abs_diff_eq!(ctx.cstar().value, 1.125, epsilon = 1e-6);
        let x = [0.0];
        // W = [0.5]: lambda = 4 * 0.25 * 0.25, Lambda = 0.5 * 0.5.
        assert_abs_diff_eq!(ctx.lambda_x(&x), 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(ctx.capital_lambda(&x), 0.25, epsilon = 1e-9);
        // sigma_D sqrt(B^2 - c*) = sqrt(0.5) sqrt(2.875).
        assert_abs_diff_eq!(ctx.rkhs_term(&x).unwrap(), 1.19896, epsilon = 1e-5);
        assert_abs_diff_eq!(ctx.prob_bound(&x, 0.05).unwrap(), 1.87801, epsilon = 1e-5);
        assert_abs_diff_eq!(ctx.det_bound(&x).unwrap(), 1.44896, epsilon = 1e-5);
        // evaluate() agrees with the piecewise accessors.
        let ev = ctx.evaluate(&x).unwrap();
        assert_abs_diff_eq!(ev.mean, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev.std, 0.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(ev.det_bound(), ctx.det_bound(&x).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn norm_bound_below_cstar_is_rejected() {
        let data = Dataset::new(vec![vec![0.0]], vec![2.0]).unwrap();
        let gp = FittedGp::fit(KernelSpec::se(1.0, 1.0).unwrap(), &data, 1.0).unwrap();
        // c* = 1.125 > B^2 = 1.
        assert!(matches!(
            BoundContext::new(gp, 0.5, 1.0),
            Err(Error::NormBoundTooSmall(_))
        ));
    }

    #[test]
    fn grid_points_cover_corners() {
        let pts = grid_points(&[[0.0, 1.0], [2.0, 4.0]], 3).unwrap();
        assert_eq!(pts.len(), 9);
        assert!(pts.contains(&vec![0.0, 2.0]));
        assert!(pts.contains(&vec![1.0, 4.0]));
        assert!(pts.contains(&vec![0.5, 3.0]));
        assert!(grid_points(&[[0.0, 1.0]], 1).is_err());
    }

    #[test]
    fn uniform_bound_applies_slack_to_grid_max() {
        let v = uniform_bound(&[[0.0, 2.0]], 5, 0.05, |x| Ok(x[0])).unwrap();
        assert_abs_diff_eq!(v, 2.0 * 1.05, epsilon = 1e-12);
        assert!(uniform_bound(&[[0.0, 1.0]], 3, -0.1, |_| Ok(0.0)).is_err());
    }

    #[test]
    fn synthetic_function_norm_and_eval() {
        let kernel = KernelSpec::se(1.0, 1.0).unwrap();
        let f = SyntheticRkhsFunction::new(
            kernel.clone(),
            vec![vec![0.0], vec![1.0]],
            vec![1.0, -0.5],
        )
        .unwrap();
        let k01 = kernel.eval(&[0.0], &[1.0]);
        // alpha^T K alpha with K = [[1, k01], [k01, 1]].
        let norm_sq = 1.0 + 0.25 - 2.0 * 0.5 * k01;
        assert_abs_diff_eq!(f.norm(), norm_sq.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.eval(&[0.0]), 1.0 - 0.5 * k01, epsilon = 1e-12);
    }

    #[test]
    fn coverage_on_synthetic_truth_has_no_det_violations() {
        let kernel = KernelSpec::se(1.0, 1.0).unwrap();
        let truth = SyntheticRkhsFunction::new(
            kernel.clone(),
            vec![vec![0.5], vec![2.0], vec![3.5]],
            vec![1.5, -2.0, 1.0],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let inputs: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.gen_range(0.0..4.0)]).collect();
        let queries: Vec<Vec<f64>> = (0..15).map(|_| vec![rng.gen_range(0.0..4.0)]).collect();
        let report = coverage_report(
            &kernel,
            &inputs,
            &queries,
            |x| truth.eval(x),
            NoiseSpec::new(NoiseKind::Uniform, 0.2).unwrap(),
            0.1,
            truth.norm() * 1.05,
            &CoverageConfig { trials: 200, deltas: vec![0.1, 0.5], seed: 7 },
        )
        .unwrap();
        assert_eq!(report.det_violations, 0);
        assert_eq!(report.det_checks, 200 * 15);
        for dc in &report.per_delta {
            // Wide tolerance: 200 trials of binomial noise.
            assert!(
                dc.max_rate <= dc.delta + 3.0 * (dc.delta / 200.0f64).sqrt() + 0.05,
                "delta {} rate {}",
                dc.delta,
                dc.max_rate
            );
        }
    }

    #[test]
    fn coverage_is_reproducible() {
        let kernel = KernelSpec::se(1.0, 1.0).unwrap();
        let inputs = vec![vec![0.0], vec![1.0], vec![2.0]];
        let queries = vec![vec![0.5], vec![1.5]];
        let cfg = CoverageConfig { trials: 20, deltas: vec![0.2], seed: 11 };
        let run = |()| {
            coverage_report(
                &kernel,
                &inputs,
                &queries,
                |x| x[0].sin(),
                NoiseSpec::new(NoiseKind::Uniform, 0.1).unwrap(),
                0.1,
                20.0,
                &cfg,
            )
            .unwrap()
        };
        let a = run(());
        let b = run(());
        assert_eq!(a.det_violations, b.det_violations);
        assert_eq!(a.per_delta[0].per_query_rate, b.per_delta[0].per_query_rate);
    }

    proptest! {
        // Smaller delta or wider noise can only push the bounds up, and the
        // l1 term always dominates the l2 term at fixed sigma_v.
        #[test]
        fn bound_monotonicity(q in -3.0f64..3.0, d1 in 0.01f64..0.5, d2 in 0.5f64..0.99) {
            let ctx = unit_context();
            let x = [q];
            let ev = ctx.evaluate(&x).unwrap();
            prop_assert!(ev.prob_bound(d1).unwrap() >= ev.prob_bound(d2).unwrap());
            prop_assert!(ev.prob_bound(d1).unwrap() >= ev.rkhs_term());
            prop_assert!(ev.det_bound() >= ev.rkhs_term());
            prop_assert!(ev.capital_lambda + 1e-12 >= ev.lambda_x.sqrt() / 2.0);
        }

        #[test]
        fn sigma_v_monotonicity(q in -2.0f64..2.0, s1 in 0.01f64..0.3, bump in 0.0f64..0.5) {
            let data = Dataset::new(vec![vec![0.0], vec![1.0]], vec![0.4, -0.2]).unwrap();
            let gp = FittedGp::fit(KernelSpec::se(1.0, 1.0).unwrap(), &data, 0.5).unwrap();
            let s2 = s1 + bump;
            let a = BoundContext::new(gp.clone(), s1, 5.0).unwrap();
            let b = BoundContext::new(gp, s2, 5.0).unwrap();
            let x = [q];
            prop_assert!(b.det_bound(&x).unwrap() + 1e-9 >= a.det_bound(&x).unwrap());
            prop_assert!(b.prob_bound(&x, 0.1).unwrap() + 1e-9 >= a.prob_bound(&x, 0.1).unwrap());
        }
    }
}
