//! Grid-based stochastic barrier certificates for learned dynamics.
//!
//! The safe set is an axis-aligned box partitioned into a uniform grid. For
//! each region q a reach interval encloses mu(x) +- eps(x) over the region
//! (grid maximum with slack); inflating it by the noise support sigma_v
//! gives the successor regions. A barrier assigns each region a value B(q)
//! in [0, 1] with
//!
//!   B(q') <= B(q) + beta  for every successor q' (unsafe exit counts as 1),
//!   B(q)  <= eta          on regions meeting the initial set,
//!
//! and certifies that the chance of leaving the safe set within N steps is
//! at most eta + N beta. The expectation over successors is replaced by the
//! worst successor, which is sound and conservative.
//!
//! Synthesis minimizes eta + N beta either with the dense simplex (small
//! instances) or through the shortest-distance fixed point the constraint
//! graph induces (any size); both produce the same optimum, which the test
//! suites check against an independent value iteration.

use crate::bounds::{BoundContext, HashimotoBound};
use crate::error::{Error, Result};
use crate::lp::{solve_max, SimplexStatus};
use crate::systems::DynSystem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// partition
// ---------------------------------------------------------------------------

/// Uniform grid partition of a safe box.
#[derive(Debug, Clone)]
pub struct Partition {
    safe_box: Vec<[f64; 2]>,
    per_dim: Vec<usize>,
}

impl Partition {
    pub fn grid(safe_box: Vec<[f64; 2]>, per_dim: Vec<usize>) -> Result<Self> {
        if safe_box.is_empty() || safe_box.len() != per_dim.len() {
            return Err(Error::DimensionMismatch(safe_box.len(), per_dim.len()));
        }
        for [lo, hi] in &safe_box {
            if !(lo < hi) {
                return Err(Error::InvalidInput(format!("degenerate safe interval [{lo}, {hi}]")));
            }
        }
        if per_dim.iter().any(|&n| n == 0) {
            return Err(Error::InvalidInput("zero cells along a dimension".into()));
        }
        Ok(Partition { safe_box, per_dim })
    }

    pub fn len(&self) -> usize {
        self.per_dim.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.safe_box.len()
    }

    pub fn safe_box(&self) -> &[[f64; 2]] {
        &self.safe_box
    }

    pub fn per_dim(&self) -> &[usize] {
        &self.per_dim
    }

    fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            idx[d] = i % self.per_dim[d];
            i /= self.per_dim[d];
        }
        idx
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        let mut i = 0;
        for d in 0..self.dim() {
            i = i * self.per_dim[d] + idx[d];
        }
        i
    }

    /// Axis-aligned box of region `i`.
    pub fn region(&self, i: usize) -> Vec<[f64; 2]> {
        let idx = self.multi_index(i);
        idx.iter()
            .zip(&self.per_dim)
            .zip(&self.safe_box)
            .map(|((&k, &n), [lo, hi])| {
                let w = (hi - lo) / n as f64;
                [lo + k as f64 * w, lo + (k + 1) as f64 * w]
            })
            .collect()
    }

    /// Regions whose closed box intersects the closed box [lo, hi]; touching
    /// facets count, so the result is conservative.
    pub fn intersecting(&self, lo: &[f64], hi: &[f64]) -> Vec<usize> {
        let d = self.dim();
        assert_eq!(lo.len(), d);
        assert_eq!(hi.len(), d);
        let mut ranges = Vec::with_capacity(d);
        for k in 0..d {
            let [slo, shi] = self.safe_box[k];
            if hi[k] < slo || lo[k] > shi {
                return Vec::new();
            }
            let w = (shi - slo) / self.per_dim[k] as f64;
            let first = (((lo[k] - slo) / w) - 1e-12).floor().max(0.0) as usize;
            let last_f = (((hi[k] - slo) / w) + 1e-12).floor();
            let last = (last_f.max(0.0) as usize).min(self.per_dim[k] - 1);
            let first = first.min(self.per_dim[k] - 1);
            ranges.push(first..=last);
        }
        let mut out = Vec::new();
        let mut idx: Vec<usize> = ranges.iter().map(|r| *r.start()).collect();
        loop {
            out.push(self.flat_index(&idx));
            let mut d_ = 0;
            loop {
                idx[d_] += 1;
                if idx[d_] <= *ranges[d_].end() {
                    break;
                }
                idx[d_] = *ranges[d_].start();
                d_ += 1;
                if d_ == d {
                    return out;
                }
            }
        }
    }

    /// True when [lo, hi] lies inside the safe box.
    pub fn contains_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        self.safe_box
            .iter()
            .enumerate()
            .all(|(k, [slo, shi])| lo[k] >= *slo && hi[k] <= *shi)
    }
}

// ---------------------------------------------------------------------------
// region dynamics
// ---------------------------------------------------------------------------

/// Interval enclosure of the learned dynamics over one region, per output:
/// [min mu - eps_bar, max mu + eps_bar].
#[derive(Debug, Clone, PartialEq)]
pub struct RegionDynamicsInterval {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// One scalar output modeled with a mean and a pointwise error bound.
pub trait MeanErrorModel {
    fn mean_and_bound(&self, x: &[f64]) -> Result<(f64, f64)>;
}

/// Deterministic bound of a [`BoundContext`].
pub struct DetModel<'a>(pub &'a BoundContext);

impl MeanErrorModel for DetModel<'_> {
    fn mean_and_bound(&self, x: &[f64]) -> Result<(f64, f64)> {
        let ev = self.0.evaluate(x)?;
        Ok((ev.mean, ev.det_bound()))
    }
}

/// Probabilistic bound of a [`BoundContext`] at fixed delta.
pub struct ProbModel<'a> {
    pub ctx: &'a BoundContext,
    pub delta: f64,
}

impl MeanErrorModel for ProbModel<'_> {
    fn mean_and_bound(&self, x: &[f64]) -> Result<(f64, f64)> {
        let ev = self.ctx.evaluate(x)?;
        Ok((ev.mean, ev.prob_bound(self.delta)?))
    }
}

impl MeanErrorModel for HashimotoBound {
    fn mean_and_bound(&self, x: &[f64]) -> Result<(f64, f64)> {
        Ok((self.gp().predict_mean(x), self.bound(x)?))
    }
}

/// Encloses every output model over the region: grid extremes of the mean,
/// plus the grid maximum of the error bound inflated by `slack`.
pub fn region_dynamics(
    models: &[&dyn MeanErrorModel],
    region: &[[f64; 2]],
    grid_per_dim: usize,
    slack: f64,
) -> Result<RegionDynamicsInterval> {
    if !(slack >= 0.0) {
        return Err(Error::InvalidInput(format!("slack must be nonnegative, got {slack}")));
    }
    let pts = crate::bounds::grid_points(region, grid_per_dim)?;
    let n_out = models.len();
    let mut mu_lo = vec![f64::INFINITY; n_out];
    let mut mu_hi = vec![f64::NEG_INFINITY; n_out];
    let mut eps_max = vec![0.0f64; n_out];
    for p in &pts {
        for (k, model) in models.iter().enumerate() {
            let (mu, eps) = model.mean_and_bound(p)?;
            if !mu.is_finite() || !eps.is_finite() {
                return Err(Error::NonFinite(format!("region dynamics at {p:?}")));
            }
            mu_lo[k] = mu_lo[k].min(mu);
            mu_hi[k] = mu_hi[k].max(mu);
            eps_max[k] = eps_max[k].max(eps);
        }
    }
    let lo = mu_lo
        .iter()
        .zip(&eps_max)
        .map(|(m, e)| m - e * (1.0 + slack))
        .collect();
    let hi = mu_hi
        .iter()
        .zip(&eps_max)
        .map(|(m, e)| m + e * (1.0 + slack))
        .collect();
    Ok(RegionDynamicsInterval { lo, hi })
}

/// Successor regions of one reach interval after inflating by the noise
/// support, plus whether the inflated interval escapes the safe box.
pub fn successors(
    partition: &Partition,
    interval: &RegionDynamicsInterval,
    sigma_v: f64,
) -> (Vec<usize>, bool) {
    let lo: Vec<f64> = interval.lo.iter().map(|v| v - sigma_v).collect();
    let hi: Vec<f64> = interval.hi.iter().map(|v| v + sigma_v).collect();
    let unsafe_exit = !partition.contains_box(&lo, &hi);
    (partition.intersecting(&lo, &hi), unsafe_exit)
}

// ---------------------------------------------------------------------------
// synthesis
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisMethod {
    /// Simplex when the program is small, fixed point otherwise.
    Auto,
    Simplex,
    FixedPoint,
}

/// Constraint rows beyond which Auto switches to the fixed-point route.
const SIMPLEX_ROW_LIMIT: usize = 4000;

#[derive(Debug, Clone)]
pub struct BarrierCertificate {
    /// Barrier value per region, in [0, 1].
    pub values: Vec<f64>,
    pub eta: f64,
    pub beta: f64,
    pub horizon: usize,
    pub safety_probability: f64,
    /// True when the simplex hit its iteration cap: the certificate is valid
    /// but possibly conservative.
    pub degraded: bool,
    pub method: &'static str,
    /// None when the region intervals are sure (deterministic bounds);
    /// Some(delta) when each uniform bound holds with confidence 1 - delta.
    pub confidence_delta: Option<f64>,
}

impl BarrierCertificate {
    pub fn with_confidence(mut self, delta: Option<f64>) -> Self {
        self.confidence_delta = delta;
        self
    }
}

/// Probability floor 1 - (eta + N beta), clamped into [0, 1].
pub fn safety_probability(eta: f64, beta: f64, horizon: usize) -> f64 {
    (1.0 - (eta + horizon as f64 * beta)).clamp(0.0, 1.0)
}

struct ConstraintGraph {
    succ: Vec<Vec<usize>>,
    unsafe_exit: Vec<bool>,
    initial: Vec<usize>,
}

fn build_graph(
    partition: &Partition,
    dynamics: &[RegionDynamicsInterval],
    sigma_v: f64,
    initial_box: &[[f64; 2]],
) -> Result<ConstraintGraph> {
    let q = partition.len();
    if dynamics.len() != q {
        return Err(Error::DimensionMismatch(dynamics.len(), q));
    }
    let ilo: Vec<f64> = initial_box.iter().map(|b| b[0]).collect();
    let ihi: Vec<f64> = initial_box.iter().map(|b| b[1]).collect();
    if !partition.contains_box(&ilo, &ihi) {
        return Err(Error::InvalidInput("initial set must lie inside the safe set".into()));
    }
    let mut succ = Vec::with_capacity(q);
    let mut unsafe_exit = Vec::with_capacity(q);
    for dyn_q in dynamics {
        let (s, u) = successors(partition, dyn_q, sigma_v);
        succ.push(s);
        unsafe_exit.push(u);
    }
    let initial = partition.intersecting(&ilo, &ihi);
    if initial.is_empty() {
        return Err(Error::InvalidInput("initial set does not meet the partition".into()));
    }
    Ok(ConstraintGraph { succ, unsafe_exit, initial })
}

/// Steps-to-unsafe distance: s = 1 on regions that can exit directly,
/// 1 + min over successors otherwise, None when unsafe is unreachable.
fn distance_to_unsafe(graph: &ConstraintGraph) -> Vec<Option<usize>> {
    let q = graph.succ.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); q];
    for (src, list) in graph.succ.iter().enumerate() {
        for &dst in list {
            pred[dst].push(src);
        }
    }
    let mut dist: Vec<Option<usize>> = vec![None; q];
    let mut queue = std::collections::VecDeque::new();
    for (i, &u) in graph.unsafe_exit.iter().enumerate() {
        if u {
            dist[i] = Some(1);
            queue.push_back(i);
        }
    }
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].expect("queued regions are labeled");
        for &p in &pred[v] {
            if dist[p].is_none() {
                dist[p] = Some(dv + 1);
                queue.push_back(p);
            }
        }
    }
    dist
}

fn synthesize_fixed_point(graph: &ConstraintGraph, horizon: usize) -> BarrierCertificate {
    let dist = distance_to_unsafe(graph);
    let s0 = graph
        .initial
        .iter()
        .filter_map(|&i| dist[i])
        .min();

    // eta(beta) = max(0, 1 - beta s0); minimize eta + N beta over the
    // piecewise-linear candidates.
    let mut candidates = vec![0.0, 1.0];
    if let Some(s0) = s0 {
        candidates.push((1.0 / s0 as f64).min(1.0));
    }
    let objective = |beta: f64| -> f64 {
        let eta = match s0 {
            Some(s0) => (1.0 - beta * s0 as f64).max(0.0),
            None => 0.0,
        };
        eta + horizon as f64 * beta
    };
    let mut beta = 0.0;
    let mut best = f64::INFINITY;
    for &b in &candidates {
        let j = objective(b);
        if j < best - 1e-15 {
            best = j;
            beta = b;
        }
    }
    let eta = match s0 {
        Some(s0) => (1.0 - beta * s0 as f64).max(0.0),
        None => 0.0,
    };
    let values: Vec<f64> = dist
        .iter()
        .map(|d| match d {
            Some(s) => (1.0 - beta * *s as f64).max(0.0),
            None => 0.0,
        })
        .collect();
    BarrierCertificate {
        values,
        eta,
        beta,
        horizon,
        safety_probability: safety_probability(eta, beta, horizon),
        degraded: false,
        method: "fixed_point",
        confidence_delta: None,
    }
}

/// Simplex on the complemented variables Bt = 1 - B, Et = 1 - eta, which
/// makes the origin feasible: maximize Et - N beta subject to
/// Bt(q) <= Bt(q') + beta, Bt(q) <= beta on exits, Et <= Bt(q) on initial
/// regions, everything in [0, 1].
fn synthesize_simplex(graph: &ConstraintGraph, horizon: usize) -> Result<BarrierCertificate> {
    let q = graph.succ.len();
    let n_vars = q + 2; // Bt..., Et, beta
    let et = q;
    let beta_col = q + 1;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let push = |row: Vec<f64>, b: f64, rows: &mut Vec<Vec<f64>>, rhs: &mut Vec<f64>| {
        rows.push(row);
        rhs.push(b);
    };
    for (src, list) in graph.succ.iter().enumerate() {
        for &dst in list {
            if dst == src {
                continue; // Bt(q) <= Bt(q) + beta always holds
            }
            let mut row = vec![0.0; n_vars];
            row[src] = 1.0;
            row[dst] = -1.0;
            row[beta_col] = -1.0;
            push(row, 0.0, &mut rows, &mut rhs);
        }
        if graph.unsafe_exit[src] {
            let mut row = vec![0.0; n_vars];
            row[src] = 1.0;
            row[beta_col] = -1.0;
            push(row, 0.0, &mut rows, &mut rhs);
        }
    }
    for &i in &graph.initial {
        let mut row = vec![0.0; n_vars];
        row[et] = 1.0;
        row[i] = -1.0;
        push(row, 0.0, &mut rows, &mut rhs);
    }
    for v in 0..n_vars {
        let mut row = vec![0.0; n_vars];
        row[v] = 1.0;
        push(row, 1.0, &mut rows, &mut rhs);
    }
    let mut c = vec![0.0; n_vars];
    c[et] = 1.0;
    c[beta_col] = -(horizon as f64);

    let max_iters = 200 * (rows.len() + n_vars);
    let sol = solve_max(&rows, &rhs, &c, max_iters)?;
    if sol.status == SimplexStatus::Unbounded {
        return Err(Error::Conditioning("barrier program reported unbounded".into()));
    }
    let values: Vec<f64> = (0..q).map(|i| (1.0 - sol.x[i]).clamp(0.0, 1.0)).collect();
    let eta = (1.0 - sol.x[et]).clamp(0.0, 1.0);
    let beta = sol.x[beta_col].clamp(0.0, 1.0);
    Ok(BarrierCertificate {
        values,
        eta,
        beta,
        horizon,
        safety_probability: safety_probability(eta, beta, horizon),
        degraded: sol.status == SimplexStatus::IterationCap,
        method: "simplex",
        confidence_delta: None,
    })
}

/// Synthesizes the cheapest certificate eta + N beta for the given region
/// dynamics and initial set.
pub fn synthesize(
    partition: &Partition,
    dynamics: &[RegionDynamicsInterval],
    sigma_v: f64,
    initial_box: &[[f64; 2]],
    horizon: usize,
    method: SynthesisMethod,
) -> Result<BarrierCertificate> {
    let graph = build_graph(partition, dynamics, sigma_v, initial_box)?;
    let pair_rows: usize = graph
        .succ
        .iter()
        .map(|l| l.len())
        .sum::<usize>()
        + graph.unsafe_exit.iter().filter(|u| **u).count()
        + graph.initial.len()
        + partition.len()
        + 2;
    match method {
        SynthesisMethod::Simplex => synthesize_simplex(&graph, horizon),
        SynthesisMethod::FixedPoint => Ok(synthesize_fixed_point(&graph, horizon)),
        SynthesisMethod::Auto => {
            if pair_rows <= SIMPLEX_ROW_LIMIT {
                synthesize_simplex(&graph, horizon)
            } else {
                Ok(synthesize_fixed_point(&graph, horizon))
            }
        }
    }
}

/// Reachability diagnostics: how many regions can leave the safe set in one
/// step, and the step distance from the initial regions to any of them
/// (None when unreachable). Useful for judging how much slack a partition
/// and bound choice leave before a certificate degenerates.
pub fn reachability(
    partition: &Partition,
    dynamics: &[RegionDynamicsInterval],
    sigma_v: f64,
    initial_box: &[[f64; 2]],
) -> Result<(usize, Option<usize>)> {
    let graph = build_graph(partition, dynamics, sigma_v, initial_box)?;
    let exits = graph.unsafe_exit.iter().filter(|u| **u).count();
    let dist = distance_to_unsafe(&graph);
    let s0 = graph
        .initial
        .iter()
        .filter_map(|&q| dist[q])
        .min();
    Ok((exits, s0))
}

/// Re-checks every certificate constraint at tolerance 1e-9 from scratch;
/// independent of how the certificate was produced.
pub fn verify_certificate(
    partition: &Partition,
    dynamics: &[RegionDynamicsInterval],
    sigma_v: f64,
    initial_box: &[[f64; 2]],
    cert: &BarrierCertificate,
) -> Result<()> {
    const TOL: f64 = 1e-9;
    let graph = build_graph(partition, dynamics, sigma_v, initial_box)?;
    if cert.values.len() != partition.len() {
        return Err(Error::DimensionMismatch(cert.values.len(), partition.len()));
    }
    for (i, &v) in cert.values.iter().enumerate() {
        if !(-TOL..=1.0 + TOL).contains(&v) {
            return Err(Error::InvalidInput(format!("barrier value {v} at region {i} outside [0, 1]")));
        }
    }
    for x in [cert.eta, cert.beta] {
        if !(-TOL..=1.0 + TOL).contains(&x) {
            return Err(Error::InvalidInput(format!("certificate scalar {x} outside [0, 1]")));
        }
    }
    for (src, list) in graph.succ.iter().enumerate() {
        for &dst in list {
            if cert.values[dst] > cert.values[src] + cert.beta + TOL {
                return Err(Error::InvalidInput(format!(
                    "martingale violation {} -> {}: {} > {} + {}",
                    src, dst, cert.values[dst], cert.values[src], cert.beta
                )));
            }
        }
        if graph.unsafe_exit[src] && cert.values[src] + cert.beta < 1.0 - TOL {
            return Err(Error::InvalidInput(format!(
                "unsafe exit from region {src} underpriced: {} + {} < 1",
                cert.values[src], cert.beta
            )));
        }
    }
    for &i in &graph.initial {
        if cert.values[i] > cert.eta + TOL {
            return Err(Error::InvalidInput(format!(
                "initial region {i} value {} above eta {}",
                cert.values[i], cert.eta
            )));
        }
    }
    let p = safety_probability(cert.eta, cert.beta, cert.horizon);
    if (p - cert.safety_probability).abs() > TOL {
        return Err(Error::InvalidInput(format!(
            "stated safety probability {} disagrees with eta/beta ({p})",
            cert.safety_probability
        )));
    }
    Ok(())
}

/// Empirical frequency of leaving the safe box within `horizon` steps of the
/// true noisy system, starting uniformly in the initial box.
pub fn monte_carlo_unsafe_frequency(
    system: &DynSystem,
    safe_box: &[[f64; 2]],
    initial_box: &[[f64; 2]],
    horizon: usize,
    trajectories: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unsafe_count = 0usize;
    for _ in 0..trajectories {
        let mut x: Vec<f64> = initial_box
            .iter()
            .map(|[lo, hi]| rng.gen_range(*lo..=*hi))
            .collect();
        for _ in 0..horizon {
            x = system.step(&x, &mut rng);
            let out = x
                .iter()
                .zip(safe_box)
                .any(|(xi, [lo, hi])| xi < lo || xi > hi);
            if out {
                unsafe_count += 1;
                break;
            }
        }
    }
    unsafe_count as f64 / trajectories as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn partition_counts_and_tiling() {
        let p = Partition::grid(vec![[-0.7, 0.7]; 4], vec![7; 4]).unwrap();
        assert_eq!(p.len(), 2401);
        let r0 = p.region(0);
        assert_abs_diff_eq!(r0[0][0], -0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(r0[0][1], -0.5, epsilon = 1e-12);
        let rlast = p.region(2400);
        assert_abs_diff_eq!(rlast[3][1], 0.7, epsilon = 1e-12);
        // Center region is exactly [-0.1, 0.1]^4.
        let center = p.intersecting(&[0.0; 4], &[0.0; 4]);
        assert!(center.contains(&p.flat_index(&[3, 3, 3, 3])));
        let c = p.region(p.flat_index(&[3, 3, 3, 3]));
        for d in 0..4 {
            assert_abs_diff_eq!(c[d][0], -0.1, epsilon = 1e-12);
            assert_abs_diff_eq!(c[d][1], 0.1, epsilon = 1e-12);
        }
    }

    #[test]
    fn intersecting_handles_boundaries_conservatively() {
        let p = Partition::grid(vec![[0.0, 1.0]], vec![4]).unwrap();
        // A box ending exactly on the 0.25 grid line touches both cells.
        let idx = p.intersecting(&[0.1], &[0.25]);
        assert!(idx.contains(&0) && idx.contains(&1));
        // Out-of-box queries return nothing.
        assert!(p.intersecting(&[1.5], &[2.0]).is_empty());
        // Overhanging boxes clamp to the safe set.
        let idx = p.intersecting(&[-3.0], &[0.1]);
        assert_eq!(idx, vec![0]);
    }

    #[test]
    fn successor_inflation_and_unsafe_flag() {
        let p = Partition::grid(vec![[0.0, 1.0]], vec![4]).unwrap();
        let interval = RegionDynamicsInterval { lo: vec![0.3], hi: vec![0.4] };
        let (succ, exit) = successors(&p, &interval, 0.05);
        assert!(!exit);
        assert_eq!(succ, vec![0, 1]); // [0.25, 0.45] touches cell 0 at its corner
        let (succ, exit) = successors(&p, &interval, 0.7);
        assert!(exit); // [-0.4, 1.1] escapes
        assert_eq!(succ.len(), 4);
    }

    #[test]
    fn safety_probability_forms() {
        assert_abs_diff_eq!(safety_probability(1e-6, 1e-6, 1), 0.999998, epsilon = 1e-12);
        assert_eq!(safety_probability(0.5, 0.2, 5), 0.0);
        assert_eq!(safety_probability(0.0, 0.0, 100), 1.0);
    }

    /// Four cells chained rightward; the last exits. Distances are 4,3,2,1,
    /// so with N = 1 the optimum is beta = 1/4, eta = 0.
    fn chain_setup() -> (Partition, Vec<RegionDynamicsInterval>) {
        let p = Partition::grid(vec![[0.0, 1.0]], vec![4]).unwrap();
        let dynamics = vec![
            RegionDynamicsInterval { lo: vec![0.30], hi: vec![0.45] }, // cell 0 -> 1
            RegionDynamicsInterval { lo: vec![0.55], hi: vec![0.70] }, // cell 1 -> 2
            RegionDynamicsInterval { lo: vec![0.80], hi: vec![0.95] }, // cell 2 -> 3
            RegionDynamicsInterval { lo: vec![0.90], hi: vec![1.05] }, // cell 3 -> exit + 3
        ];
        (p, dynamics)
    }

    #[test]
    fn chain_synthesis_both_methods() {
        let (p, dynamics) = chain_setup();
        let init = [[0.05, 0.20]];
        for method in [SynthesisMethod::Simplex, SynthesisMethod::FixedPoint] {
            let cert = synthesize(&p, &dynamics, 0.0, &init, 1, method).unwrap();
            assert!(!cert.degraded);
            assert_abs_diff_eq!(cert.eta + cert.beta, 0.25, epsilon = 1e-9);
            assert_abs_diff_eq!(cert.safety_probability, 0.75, epsilon = 1e-9);
            verify_certificate(&p, &dynamics, 0.0, &init, &cert).unwrap();
        }
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let (p, dynamics) = chain_setup();
        let init = [[0.05, 0.20]];
        let mut cert =
            synthesize(&p, &dynamics, 0.0, &init, 1, SynthesisMethod::Simplex).unwrap();
        cert.values[3] = 0.0; // erases the exit cost
        assert!(verify_certificate(&p, &dynamics, 0.0, &init, &cert).is_err());
    }

    #[test]
    fn simplex_and_fixed_point_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let n = rng.gen_range(3..7);
            let p = Partition::grid(vec![[0.0, 1.0], [0.0, 1.0]], vec![n, n]).unwrap();
            let dynamics: Vec<RegionDynamicsInterval> = (0..p.len())
                .map(|_| {
                    let cx: f64 = rng.gen_range(-0.1..1.1);
                    let cy: f64 = rng.gen_range(-0.1..1.1);
                    let w: f64 = rng.gen_range(0.01..0.3);
                    RegionDynamicsInterval { lo: vec![cx - w, cy - w], hi: vec![cx + w, cy + w] }
                })
                .collect();
            let init = [[0.4, 0.6], [0.4, 0.6]];
            let horizon = rng.gen_range(1..4);
            let a = synthesize(&p, &dynamics, 0.02, &init, horizon, SynthesisMethod::Simplex).unwrap();
            let b =
                synthesize(&p, &dynamics, 0.02, &init, horizon, SynthesisMethod::FixedPoint).unwrap();
            assert!(!a.degraded);
            let ja = a.eta + horizon as f64 * a.beta;
            let jb = b.eta + horizon as f64 * b.beta;
            assert_abs_diff_eq!(ja, jb, epsilon = 1e-6);
            verify_certificate(&p, &dynamics, 0.02, &init, &a).unwrap();
            verify_certificate(&p, &dynamics, 0.02, &init, &b).unwrap();
        }
    }

    #[test]
    fn absorbing_dynamics_certify_full_safety() {
        let p = Partition::grid(vec![[0.0, 1.0]], vec![4]).unwrap();
        // Every region maps strictly inside the safe box.
        let dynamics: Vec<RegionDynamicsInterval> = (0..4)
            .map(|_| RegionDynamicsInterval { lo: vec![0.45], hi: vec![0.55] })
            .collect();
        let init = [[0.3, 0.7]];
        for method in [SynthesisMethod::Simplex, SynthesisMethod::FixedPoint] {
            let cert = synthesize(&p, &dynamics, 0.05, &init, 10, method).unwrap();
            assert_abs_diff_eq!(cert.safety_probability, 1.0, epsilon = 1e-9);
            verify_certificate(&p, &dynamics, 0.05, &init, &cert).unwrap();
        }
    }

    #[test]
    fn monte_carlo_on_contractive_system_stays_safe() {
        let sys = crate::systems::builtin_system("lin4d").unwrap();
        let freq = monte_carlo_unsafe_frequency(
            &sys,
            &sys.domain.clone(),
            &sys.initial_box.clone(),
            10,
            2000,
            3,
        );
        assert_eq!(freq, 0.0);
    }

    #[test]
    fn enlarging_intervals_never_raises_safety() {
        let (p, dynamics) = chain_setup();
        let init = [[0.05, 0.20]];
        let base =
            synthesize(&p, &dynamics, 0.0, &init, 2, SynthesisMethod::FixedPoint).unwrap();
        let wider: Vec<RegionDynamicsInterval> = dynamics
            .iter()
            .map(|d| RegionDynamicsInterval {
                lo: d.lo.iter().map(|v| v - 0.2).collect(),
                hi: d.hi.iter().map(|v| v + 0.2).collect(),
            })
            .collect();
        let worse = synthesize(&p, &wider, 0.0, &init, 2, SynthesisMethod::FixedPoint).unwrap();
        assert!(worse.safety_probability <= base.safety_probability + 1e-12);
    }
}
