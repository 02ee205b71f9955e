//! Subcommand implementations behind the `rkhsb` binary. Each command loads
//! one JSON manifest, applies flag overrides, and writes its artifacts under
//! the configured output directory.

use crate::barrier::{
    monte_carlo_unsafe_frequency, reachability, region_dynamics, safety_probability,
    synthesize, verify_certificate, DetModel, MeanErrorModel, Partition, ProbModel,
    SynthesisMethod,
};
use crate::bounds::{
    coverage_report, AbbasiBound, BoundContext, ChowdhuryBound, CoverageConfig, HashimotoBound,
    MaddalenaBound, SeegerBound,
};
use crate::config::{BoundKind, KernelConfig, MethodConfig, RunConfig};
use crate::error::{Error, Result};
use crate::gp::{Dataset, FittedGp};
use crate::kernels::{train_feature_map, FeatureMap, KernelSpec};
use crate::report::{
    bench_csv, mean_std, sweep_csv, trend_csv, write_text, BenchRow, CertificateFile, SvgPlot,
    SweepRow, TrendRow,
};
use crate::systems::{builtin_system, generate_dataset, DynSystem, NoiseKind, NoiseSpec};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "rkhsb", about = "Gaussian process error bounds under bounded noise", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound profiles over a 1D query grid (CSV + SVG).
    Sweep(RunArgs),
    /// Average bound comparison over random test points (CSV + console).
    Bench(RunArgs),
    /// Barrier certificate synthesis per bound kind (JSON + console).
    Barrier(BarrierArgs),
    /// Empirical validity and coverage rates (JSON + console).
    Coverage(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON manifest path.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the manifest seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides sigma_n to this multiple of sigma_v.
    #[arg(long = "sigma-n-ratio")]
    pub sigma_n_ratio: Option<f64>,
    /// Overrides the delta list with a single value.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Overrides the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BarrierArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Overrides the certificate horizon N.
    #[arg(long)]
    pub horizon: Option<usize>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => cmd_sweep(&load(&args)?),
        Command::Bench(args) => cmd_bench(&load(&args)?),
        Command::Barrier(args) => {
            let mut cfg = load(&args.run)?;
            if let Some(n) = args.horizon {
                cfg.barrier.horizon = n;
            }
            cmd_barrier(&cfg)
        }
        Command::Coverage(args) => cmd_coverage(&load(&args)?),
    }
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply_overrides(args.seed, args.sigma_n_ratio, args.delta, args.out.clone());
    cfg.validate()?;
    Ok(cfg)
}

// ---------------------------------------------------------------------------
// shared problem setup
// ---------------------------------------------------------------------------

/// Resolved data source: per-output training sets plus the noise model and
/// norm budgets the bounds need.
pub struct Problem {
    pub name: String,
    pub system: Option<DynSystem>,
    pub datasets: Vec<Dataset>,
    pub noise: NoiseSpec,
    pub norm_bounds: Vec<f64>,
    pub domain: Vec<[f64; 2]>,
}

impl Problem {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        if let Some(name) = &cfg.system {
            let mut sys = builtin_system(name)?;
            if let Some(sv) = cfg.sigma_v {
                sys.noise.sigma_v = sv;
            }
            let norm_bounds = match &cfg.norm_bounds {
                Some(bs) => {
                    if bs.len() != sys.dim {
                        return Err(Error::Config(format!(
                            "norm_bounds has {} entries for a {}-dimensional system",
                            bs.len(),
                            sys.dim
                        )));
                    }
                    bs.clone()
                }
                None => sys.norm_bounds.clone(),
            };
            let datasets = generate_dataset(&sys, cfg.m, cfg.seed)?;
            Ok(Problem {
                name: sys.name.to_string(),
                noise: sys.noise,
                norm_bounds,
                domain: sys.domain.clone(),
                datasets,
                system: Some(sys),
            })
        } else {
            let path = cfg.dataset.as_ref().expect("validated");
            let data = Dataset::from_csv_path(path)?;
            let sigma_v = cfg.sigma_v.expect("validated");
            let norm_bounds = cfg.norm_bounds.clone().expect("validated");
            if norm_bounds.len() != 1 {
                return Err(Error::Config(
                    "dataset mode is single-output; norm_bounds must have one entry".into(),
                ));
            }
            let dim = data.dim();
            let mut domain = vec![[f64::INFINITY, f64::NEG_INFINITY]; dim];
            for x in &data.inputs {
                for d in 0..dim {
                    domain[d][0] = domain[d][0].min(x[d]);
                    domain[d][1] = domain[d][1].max(x[d]);
                }
            }
            for b in &mut domain {
                if b[0] == b[1] {
                    b[0] -= 0.5;
                    b[1] += 0.5;
                }
            }
            Ok(Problem {
                name: path.display().to_string(),
                system: None,
                datasets: vec![data],
                noise: NoiseSpec { kind: NoiseKind::Uniform, sigma_v },
                norm_bounds,
                domain,
            })
        }
    }

    pub fn outputs(&self) -> usize {
        self.datasets.len()
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn true_output(&self, x: &[f64], k: usize) -> Option<f64> {
        self.system.as_ref().map(|s| s.eval(x)[k])
    }
}

fn kernel_label(cfg: &KernelConfig) -> &'static str {
    match cfg {
        KernelConfig::Se { .. } => "se",
        KernelConfig::Deep { .. } => "dkl",
    }
}

/// One kernel per output; deep kernels train one feature map per output on
/// the scalar targets tiled to the feature width.
pub fn build_kernels(cfg: &RunConfig, problem: &Problem) -> Result<Vec<KernelSpec>> {
    let dim = problem.dim();
    match &cfg.kernel {
        KernelConfig::Se { sigma_s, lengthscale, unsquared_exponent } => {
            let mut spec = KernelSpec::se(*sigma_s, *lengthscale)?;
            spec.set_unsquared_exponent(*unsquared_exponent);
            Ok(vec![spec; problem.outputs()])
        }
        KernelConfig::Deep {
            sigma_s,
            lengthscale,
            unsquared_exponent,
            feature_map,
            layers,
            activation,
            epochs,
            step_size,
            batch_fraction,
        } => {
            if let Some(path) = feature_map {
                let text = std::fs::read_to_string(path)?;
                let map = FeatureMap::from_json(&text)?;
                if map.input_dim() != dim {
                    return Err(Error::Config(format!(
                        "feature map expects {}-dimensional inputs, data has {}",
                        map.input_dim(),
                        dim
                    )));
                }
                let mut out = Vec::with_capacity(problem.outputs());
                for _ in 0..problem.outputs() {
                    let mut spec = KernelSpec::deep(*sigma_s, *lengthscale, map.clone())?;
                    spec.set_unsquared_exponent(*unsquared_exponent);
                    out.push(spec);
                }
                Ok(out)
            } else {
                let widths = layers.as_ref().expect("validated");
                let mut full = Vec::with_capacity(widths.len() + 1);
                full.push(dim);
                full.extend_from_slice(widths);
                let s = *widths.last().expect("validated nonempty");
                let mut out = Vec::with_capacity(problem.outputs());
                for (k, data) in problem.datasets.iter().enumerate() {
                    let seed = cfg.seed.wrapping_add(0x10 + k as u64);
                    let init = FeatureMap::new(&full, *activation, seed)?;
                    let tiled: Vec<Vec<f64>> =
                        data.targets.iter().map(|&y| vec![y; s]).collect();
                    let trained = train_feature_map(
                        &init,
                        &data.inputs,
                        &tiled,
                        *epochs,
                        *batch_fraction,
                        *step_size,
                        seed,
                    )?;
                    let mut spec = KernelSpec::deep(*sigma_s, *lengthscale, trained)?;
                    spec.set_unsquared_exponent(*unsquared_exponent);
                    out.push(spec);
                }
                Ok(out)
            }
        }
    }
}

/// Every bound family fitted on one output's data.
pub struct OutputBounds {
    pub ctx: BoundContext,
    /// None when sigma_v = 0: the construction pins sigma_n = sigma_v.
    pub hashimoto: Option<HashimotoBound>,
    pub chowdhury: ChowdhuryBound,
    pub abbasi: AbbasiBound,
    /// None when sigma_v = 0, for the same reason as Hashimoto.
    pub seeger: Option<SeegerBound>,
    pub maddalena: MaddalenaBound,
}

impl OutputBounds {
    /// NaN marks bounds whose published construction is undefined here.
    pub fn hashimoto_bound(&self, x: &[f64]) -> Result<f64> {
        match &self.hashimoto {
            Some(h) => h.bound(x),
            None => Ok(f64::NAN),
        }
    }

    pub fn seeger_bound(&self, x: &[f64]) -> Result<f64> {
        match &self.seeger {
            Some(s) => s.bound(x),
            None => Ok(f64::NAN),
        }
    }
}

pub fn fit_all(
    kernel: &KernelSpec,
    data: &Dataset,
    norm_bound: f64,
    sigma_v: f64,
    sigma_n: f64,
    delta: f64,
) -> Result<OutputBounds> {
    let gp = FittedGp::fit(kernel.clone(), data, sigma_n)?;
    let noise_free = sigma_v == 0.0;
    Ok(OutputBounds {
        ctx: BoundContext::new(gp, sigma_v, norm_bound)?,
        hashimoto: if noise_free {
            None
        } else {
            Some(HashimotoBound::fit(kernel.clone(), data, norm_bound, sigma_v)?)
        },
        chowdhury: ChowdhuryBound::fit(kernel.clone(), data, norm_bound, sigma_v, delta)?,
        abbasi: AbbasiBound::fit(kernel.clone(), data, norm_bound, sigma_v, delta, None)?,
        seeger: if noise_free {
            None
        } else {
            Some(SeegerBound::fit(kernel.clone(), data, norm_bound, sigma_v, delta)?)
        },
        maddalena: MaddalenaBound::fit(kernel.clone(), data, norm_bound, sigma_v, sigma_n)?,
    })
}

fn uniform_points(domain: &[[f64; 2]], n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| domain.iter().map(|[lo, hi]| rng.gen_range(*lo..=*hi)).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

pub fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let problem = Problem::from_config(cfg)?;
    let kernels = build_kernels(cfg, &problem)?;
    let sigma_v = problem.noise.sigma_v;
    let sigma_n = cfg.sigma_n.resolve(sigma_v)?;
    let delta = cfg.deltas[0];
    let bounds = fit_all(&kernels[0], &problem.datasets[0], problem.norm_bounds[0], sigma_v, sigma_n, delta)?;

    // Query line along dimension 0 through the domain center.
    let [lo, hi] = problem.domain[0];
    let center: Vec<f64> = problem.domain.iter().map(|[a, b]| 0.5 * (a + b)).collect();
    let mut rows = Vec::with_capacity(cfg.sweep_points);
    for i in 0..cfg.sweep_points {
        let t = i as f64 / (cfg.sweep_points - 1) as f64;
        let mut x = center.clone();
        x[0] = lo + t * (hi - lo);
        let ev = bounds.ctx.evaluate(&x)?;
        rows.push(SweepRow {
            mu: ev.mean,
            sigma: ev.std,
            eps_det_ours: ev.det_bound(),
            eps_prob_ours: ev.prob_bound(delta)?,
            eps_det_hashimoto: bounds.hashimoto_bound(&x)?,
            eps_prob_chowdhury: bounds.chowdhury.bound(&x)?,
            eps_prob_abbasi: bounds.abbasi.bound(&x)?,
            eps_prob_seeger: bounds.seeger_bound(&x)?,
            eps_det_maddalena: bounds.maddalena.bound(&x)?,
            f_true: problem.true_output(&x, 0),
            x,
        });
    }

    let include_truth = problem.system.is_some();
    let csv = sweep_csv(problem.dim(), &rows, include_truth);
    let csv_path = cfg.out_dir.join("sweep.csv");
    write_text(&csv_path, &csv)?;

    let xs: Vec<f64> = rows.iter().map(|r| r.x[0]).collect();
    let mut plot = SvgPlot::new(
        &format!("{}: mean and error bounds (delta = {delta})", problem.name),
        "x1",
        "output",
    );
    plot.line("mean", xs.iter().copied().zip(rows.iter().map(|r| r.mu)).collect());
    if include_truth {
        plot.line(
            "true f",
            xs.iter().copied().zip(rows.iter().map(|r| r.f_true.unwrap())).collect(),
        );
    }
    let band = |sel: fn(&SweepRow) -> f64| -> (Vec<f64>, Vec<f64>) {
        (
            rows.iter().map(|r| r.mu - sel(r)).collect(),
            rows.iter().map(|r| r.mu + sel(r)).collect(),
        )
    };
    for (label, sel) in [
        ("ours det", (|r| r.eps_det_ours) as fn(&SweepRow) -> f64),
        ("ours prob", |r| r.eps_prob_ours),
        ("hashimoto", |r| r.eps_det_hashimoto),
        ("chowdhury", |r| r.eps_prob_chowdhury),
        ("abbasi", |r| r.eps_prob_abbasi),
        ("seeger", |r| r.eps_prob_seeger),
        ("maddalena", |r| r.eps_det_maddalena),
    ] {
        let (lo, hi) = band(sel);
        plot.band(label, &xs, &lo, &hi);
    }
    let svg_path = cfg.out_dir.join("sweep.svg");
    write_text(&svg_path, &plot.render())?;

    let avg = |sel: fn(&SweepRow) -> f64| -> f64 {
        rows.iter().map(|r| sel(r)).sum::<f64>() / rows.len() as f64
    };
    println!("sweep over {} ({} points, m = {})", problem.name, rows.len(), problem.datasets[0].len());
    println!("  mean eps: ours det {:.4}  ours prob {:.4}  hashimoto {:.4}", avg(|r| r.eps_det_ours), avg(|r| r.eps_prob_ours), avg(|r| r.eps_det_hashimoto));
    println!("  wrote {}", csv_path.display());
    println!("  wrote {}", svg_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

/// Per-point bound evaluations pooled over outputs.
struct BenchSamples {
    true_l1: Vec<f64>,
    eps_prob_ours: Vec<f64>,
    eps_det_ours: Vec<f64>,
    eps_det_hashimoto: Vec<f64>,
    eps_prob_chowdhury: Vec<f64>,
    eps_prob_abbasi: Vec<f64>,
    eps_prob_seeger: Vec<f64>,
    eps_det_maddalena: Vec<f64>,
}

fn bench_samples(
    cfg: &RunConfig,
    problem: &Problem,
    kernels: &[KernelSpec],
    datasets: &[Dataset],
    queries: &[Vec<f64>],
) -> Result<BenchSamples> {
    let sigma_v = problem.noise.sigma_v;
    let sigma_n = cfg.sigma_n.resolve(sigma_v)?;
    let delta = cfg.deltas[0];
    let n = queries.len() * datasets.len();
    let mut s = BenchSamples {
        true_l1: Vec::with_capacity(n),
        eps_prob_ours: Vec::with_capacity(n),
        eps_det_ours: Vec::with_capacity(n),
        eps_det_hashimoto: Vec::with_capacity(n),
        eps_prob_chowdhury: Vec::with_capacity(n),
        eps_prob_abbasi: Vec::with_capacity(n),
        eps_prob_seeger: Vec::with_capacity(n),
        eps_det_maddalena: Vec::with_capacity(n),
    };
    for (k, data) in datasets.iter().enumerate() {
        let bounds = fit_all(&kernels[k], data, problem.norm_bounds[k], sigma_v, sigma_n, delta)?;
        for x in queries {
            let ev = bounds.ctx.evaluate(x)?;
            if let Some(truth) = problem.true_output(x, k) {
                s.true_l1.push((ev.mean - truth).abs());
            }
            s.eps_prob_ours.push(ev.prob_bound(delta)?);
            s.eps_det_ours.push(ev.det_bound());
            s.eps_det_hashimoto.push(bounds.hashimoto_bound(x)?);
            s.eps_prob_chowdhury.push(bounds.chowdhury.bound(x)?);
            s.eps_prob_abbasi.push(bounds.abbasi.bound(x)?);
            s.eps_prob_seeger.push(bounds.seeger_bound(x)?);
            s.eps_det_maddalena.push(bounds.maddalena.bound(x)?);
        }
    }
    Ok(s)
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<()> {
    let problem = Problem::from_config(cfg)?;
    if problem.system.is_none() {
        return Err(Error::Config("bench needs a system with computable ground truth".into()));
    }
    let sigma_n = cfg.sigma_n.resolve(problem.noise.sigma_v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0xBE);
    let queries = uniform_points(&problem.domain, cfg.queries, &mut rng);

    if let Some(m_values) = &cfg.bench_m_values {
        let mut rows = Vec::with_capacity(m_values.len());
        for &m in m_values {
            let system = problem.system.as_ref().expect("checked");
            let datasets = generate_dataset(system, m, cfg.seed)?;
            let sub = Problem { datasets: datasets.clone(), ..clone_problem(&problem) };
            let kernels = build_kernels(cfg, &sub)?;
            let s = bench_samples(cfg, &sub, &kernels, &datasets, &queries)?;
            rows.push(TrendRow {
                m,
                true_l1: mean_std(&s.true_l1),
                eps_prob_ours: mean_std(&s.eps_prob_ours),
                eps_det_ours: mean_std(&s.eps_det_ours),
                eps_det_hashimoto: mean_std(&s.eps_det_hashimoto),
                eps_prob_chowdhury: mean_std(&s.eps_prob_chowdhury),
                eps_prob_abbasi: mean_std(&s.eps_prob_abbasi),
                eps_prob_seeger: mean_std(&s.eps_prob_seeger),
                eps_det_maddalena: mean_std(&s.eps_det_maddalena),
            });
            println!(
                "m = {m:4}: true {:.4}  ours prob {:.4}  ours det {:.4}  hashimoto {:.4}",
                rows.last().unwrap().true_l1.0,
                rows.last().unwrap().eps_prob_ours.0,
                rows.last().unwrap().eps_det_ours.0,
                rows.last().unwrap().eps_det_hashimoto.0
            );
        }
        let path = cfg.out_dir.join("trend.csv");
        write_text(&path, &trend_csv(&rows))?;

        let mut plot = SvgPlot::new(
            &format!("{}: mean bound vs training size", problem.name),
            "m",
            "mean eps",
        );
        let series = |sel: fn(&TrendRow) -> f64, label: &str, plot: &mut SvgPlot| {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.m as f64, sel(r))).collect();
            plot.line(label, pts);
        };
        series(|r| r.eps_prob_ours.0, "ours prob", &mut plot);
        series(|r| r.eps_det_ours.0, "ours det", &mut plot);
        series(|r| r.eps_det_hashimoto.0, "hashimoto", &mut plot);
        series(|r| r.true_l1.0, "true error", &mut plot);
        write_text(&cfg.out_dir.join("trend.svg"), &plot.render())?;
        println!("wrote {}", path.display());
        return Ok(());
    }

    let kernels = build_kernels(cfg, &problem)?;
    let s = bench_samples(cfg, &problem, &kernels, &problem.datasets, &queries)?;
    let mean = |v: &[f64]| mean_std(v).0;
    let row = BenchRow {
        system: problem.name.clone(),
        kernel: kernel_label(&cfg.kernel).to_string(),
        sigma_n,
        m: cfg.m,
        true_l1: mean(&s.true_l1),
        eps_prob_ours: mean(&s.eps_prob_ours),
        eps_det_ours: mean(&s.eps_det_ours),
        eps_det_hashimoto: mean(&s.eps_det_hashimoto),
        eps_prob_chowdhury: mean(&s.eps_prob_chowdhury),
        eps_prob_abbasi: mean(&s.eps_prob_abbasi),
        eps_prob_seeger: mean(&s.eps_prob_seeger),
        eps_det_maddalena: mean(&s.eps_det_maddalena),
    };
    let path = cfg.out_dir.join("bench.csv");
    write_text(&path, &bench_csv(&[row.clone()]))?;

    println!(
        "{:<8} {:<4} {:>9} {:>5} | {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "system", "kern", "sigma_n", "m", "true", "ours prob", "ours det", "hashimoto",
        "chowdhury", "abbasi", "seeger", "maddalena"
    );
    println!(
        "{:<8} {:<4} {:>9.4} {:>5} | {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
        row.system,
        row.kernel,
        row.sigma_n,
        row.m,
        row.true_l1,
        row.eps_prob_ours,
        row.eps_det_ours,
        row.eps_det_hashimoto,
        row.eps_prob_chowdhury,
        row.eps_prob_abbasi,
        row.eps_prob_seeger,
        row.eps_det_maddalena
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn clone_problem(p: &Problem) -> Problem {
    Problem {
        name: p.name.clone(),
        system: p.system.clone(),
        datasets: p.datasets.clone(),
        noise: p.noise,
        norm_bounds: p.norm_bounds.clone(),
        domain: p.domain.clone(),
    }
}

// ---------------------------------------------------------------------------
// barrier
// ---------------------------------------------------------------------------

pub fn cmd_barrier(cfg: &RunConfig) -> Result<()> {
    let problem = Problem::from_config(cfg)?;
    let system = problem
        .system
        .as_ref()
        .ok_or_else(|| Error::Config("barrier synthesis needs a system".into()))?;
    let kernels = build_kernels(cfg, &problem)?;
    let sigma_v = problem.noise.sigma_v;
    let sigma_n = cfg.sigma_n.resolve(sigma_v)?;
    let delta = cfg.deltas[0];
    let bcfg = &cfg.barrier;

    let partition = Partition::grid(
        problem.domain.clone(),
        vec![bcfg.partition_per_dim; problem.dim()],
    )?;
    let method = match bcfg.method {
        MethodConfig::Auto => SynthesisMethod::Auto,
        MethodConfig::Simplex => SynthesisMethod::Simplex,
        MethodConfig::FixedPoint => SynthesisMethod::FixedPoint,
    };

    let mut contexts = Vec::with_capacity(problem.outputs());
    let mut hashimotos = Vec::with_capacity(problem.outputs());
    for (k, data) in problem.datasets.iter().enumerate() {
        let gp = FittedGp::fit(kernels[k].clone(), data, sigma_n)?;
        contexts.push(BoundContext::new(gp, sigma_v, problem.norm_bounds[k])?);
        hashimotos.push(HashimotoBound::fit(
            kernels[k].clone(),
            data,
            problem.norm_bounds[k],
            sigma_v,
        )?);
    }

    println!(
        "barrier on {}: {} regions, grid {} per dim, slack {}, N = {}",
        problem.name,
        partition.len(),
        bcfg.grid_per_dim,
        bcfg.slack,
        bcfg.horizon
    );
    println!(
        "{:<10} {:>12} {:>12} {:>8} {:>8} {:>8} {:>9}",
        "bound", "eta", "beta", "P_s(N)", "P_s(1)", "P_s(10)", "t [s]"
    );

    let mut det_ps = None;
    for kind in &bcfg.bound_kinds {
        let started = Instant::now();
        let models: Vec<Box<dyn MeanErrorModel + '_>> = match kind {
            BoundKind::Prob => contexts
                .iter()
                .map(|c| Box::new(ProbModel { ctx: c, delta }) as Box<dyn MeanErrorModel>)
                .collect(),
            BoundKind::Det => contexts
                .iter()
                .map(|c| Box::new(DetModel(c)) as Box<dyn MeanErrorModel>)
                .collect(),
            BoundKind::Hashimoto => hashimotos
                .iter()
                .map(|h| Box::new(HashimotoRef(h)) as Box<dyn MeanErrorModel>)
                .collect(),
        };
        let model_refs: Vec<&dyn MeanErrorModel> = models.iter().map(|b| b.as_ref()).collect();
        let mut dynamics = Vec::with_capacity(partition.len());
        for i in 0..partition.len() {
            dynamics.push(region_dynamics(
                &model_refs,
                &partition.region(i),
                bcfg.grid_per_dim,
                bcfg.slack,
            )?);
        }
        let cert = synthesize(
            &partition,
            &dynamics,
            sigma_v,
            &system.initial_box,
            bcfg.horizon,
            method,
        )?
        .with_confidence(match kind {
            BoundKind::Prob => Some(delta),
            _ => None,
        });
        verify_certificate(&partition, &dynamics, sigma_v, &system.initial_box, &cert)?;
        let elapsed = started.elapsed().as_secs_f64();
        if *kind == BoundKind::Det {
            det_ps = Some(cert.safety_probability);
        }
        println!(
            "{:<10} {:>12.6} {:>12.6} {:>8.4} {:>8.4} {:>8.4} {:>9.2}{}",
            kind.as_str(),
            cert.eta,
            cert.beta,
            cert.safety_probability,
            safety_probability(cert.eta, cert.beta, 1),
            safety_probability(cert.eta, cert.beta, 10),
            elapsed,
            if cert.degraded { "  (iteration cap)" } else { "" }
        );
        let (exits, s0) = reachability(&partition, &dynamics, sigma_v, &system.initial_box)?;
        println!(
            "    {} of {} regions can exit in one step; initial distance to exit: {}",
            exits,
            partition.len(),
            match s0 {
                Some(s) => s.to_string(),
                None => "unreachable".into(),
            }
        );
        if *kind == BoundKind::Prob {
            println!(
                "    each of the {} region intervals holds with confidence 1 - {delta}; no joint confidence is claimed",
                partition.len() * problem.outputs()
            );
        }
        let file = CertificateFile::from_certificate(&cert, kind.as_str(), elapsed);
        let path = cfg.out_dir.join(format!("certificate_{}.json", kind.as_str()));
        write_text(&path, &file.to_json()?)?;
        println!("    wrote {}", path.display());
    }

    if bcfg.mc_trajectories > 0 {
        let freq = monte_carlo_unsafe_frequency(
            system,
            &problem.domain,
            &system.initial_box.clone(),
            bcfg.horizon,
            bcfg.mc_trajectories,
            cfg.seed.wrapping_add(0x3C),
        );
        print!(
            "simulated unsafe frequency over {} trajectories: {freq:.5}",
            bcfg.mc_trajectories
        );
        match det_ps {
            Some(p) => println!(" (deterministic certificate allows {:.5})", 1.0 - p),
            None => println!(),
        }
    }
    Ok(())
}

/// Borrowed adapter so one fitted bound serves all regions.
struct HashimotoRef<'a>(&'a HashimotoBound);

impl MeanErrorModel for HashimotoRef<'_> {
    fn mean_and_bound(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.0.mean_and_bound(x)
    }
}

// ---------------------------------------------------------------------------
// coverage
// ---------------------------------------------------------------------------

pub fn cmd_coverage(cfg: &RunConfig) -> Result<()> {
    let problem = Problem::from_config(cfg)?;
    let system = problem
        .system
        .as_ref()
        .ok_or_else(|| Error::Config("coverage needs a system with computable ground truth".into()))?
        .clone();
    let kernels = build_kernels(cfg, &problem)?;
    let sigma_v = problem.noise.sigma_v;
    let sigma_n = cfg.sigma_n.resolve(sigma_v)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0xC0);
    let queries = uniform_points(&problem.domain, cfg.coverage_queries, &mut rng);
    let inputs = problem.datasets[0].inputs.clone();

    for k in 0..problem.outputs() {
        let sys = system.clone();
        let report = coverage_report(
            &kernels[k],
            &inputs,
            &queries,
            move |x: &[f64]| sys.eval(x)[k],
            problem.noise,
            sigma_n,
            problem.norm_bounds[k],
            &CoverageConfig {
                trials: cfg.trials,
                deltas: cfg.deltas.clone(),
                seed: cfg.seed,
            },
        )?;
        println!(
            "output {k}: {} trials x {} queries, det violations {}/{}{}",
            report.trials,
            report.queries,
            report.det_violations,
            report.det_checks,
            if report.degraded_cstar_trials > 0 {
                format!(" ({} degraded c* solves)", report.degraded_cstar_trials)
            } else {
                String::new()
            }
        );
        for dc in &report.per_delta {
            let se = (dc.delta * (1.0 - dc.delta) / report.trials as f64).sqrt();
            println!(
                "  delta {:>5}: max per-query rate {:.4} (mean {:.4}, delta + 3 se = {:.4})",
                dc.delta,
                dc.max_rate,
                dc.mean_rate,
                dc.delta + 3.0 * se
            );
        }
        let path = cfg.out_dir.join(format!("coverage_output{k}.json"));
        write_text(&path, &serde_json::to_string_pretty(&report)?)?;
        println!("  wrote {}", path.display());
    }
    Ok(())
}
