//! Sweep expansion and execution.

use std::time::Instant;

use exchange_core::ising::{cftp_exact_sample, Cftp};
use exchange_core::{
    effective_sample_size, run_chain, run_chain_with_normalizer, Algorithm, ChainTrace,
    GaussianPrecisionModel, IsingLattice, IsingModel, IsingParams, ParamPoint, ProposalSpec,
    SamplerConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ModelConfig, ProposalKind};
use crate::HarnessError;

/// One row per sweep point and replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub k: usize,
    /// The point estimate handed to the sampler, if it takes one.
    pub theta_hat: Option<ParamPoint>,
    /// Random-walk standard deviation; absent for posterior proposals.
    pub proposal_width: Option<f64>,
    pub replicate: usize,
    /// Over post-burn-in steps. Absent when the chain failed.
    pub acceptance_rate: Option<f64>,
    /// Minimum over parameter components, post burn-in.
    pub ess: Option<f64>,
    pub gibbs_updates: u64,
    pub exact_samples: u64,
    pub wall_time_seconds: f64,
    pub seed: u64,
    pub prior_rejections: u64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Per-row traces, kept only when detail output is requested.
    pub traces: Vec<Option<ChainTrace>>,
}

/// A sampler setting shared by `n_replicates` rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub algorithm: Algorithm,
    pub k: usize,
    pub theta_hat: Option<ParamPoint>,
    pub proposal_width: Option<f64>,
}

pub enum BuiltModel {
    Gaussian(GaussianPrecisionModel),
    Ising(IsingModel),
}

impl BuiltModel {
    pub fn build(config: &ExperimentConfig) -> Result<Self, HarnessError> {
        Ok(match &config.model {
            ModelConfig::Gaussian(g) => BuiltModel::Gaussian(
                GaussianPrecisionModel::new(g.alpha, g.beta, g.data.clone())
                    .map_err(|e| HarnessError::Validation(format!("model.gaussian: {e}")))?,
            ),
            ModelConfig::Ising(c) => {
                let data = match (&c.data_file, c.generate) {
                    (Some(path), _) => {
                        let text =
                            std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                                path: path.clone(),
                                source,
                            })?;
                        IsingLattice::from_text(&text).map_err(|e| {
                            HarnessError::Validation(format!(
                                "model.ising.data_file: {}: {e}",
                                path.display()
                            ))
                        })?
                    }
                    (None, Some(g)) => {
                        generate_ising_data(c.width, c.height, g.theta_j, g.theta_h, g.seed)?
                    }
                    (None, None) => unreachable!("validated"),
                };
                if (data.width(), data.height()) != (c.width, c.height) {
                    return Err(HarnessError::Validation(format!(
                        "model.ising: data is {}x{} but width x height is {}x{}",
                        data.width(),
                        data.height(),
                        c.width,
                        c.height
                    )));
                }
                let model = IsingModel::new(data);
                BuiltModel::Ising(match c.cftp_max_sweeps {
                    Some(max) => model.with_cftp(Cftp::with_max_sweeps(max)),
                    None => model,
                })
            }
        })
    }

    pub fn default_theta_hat(&self) -> Option<ParamPoint> {
        match self {
            BuiltModel::Gaussian(_) => None,
            BuiltModel::Ising(m) => Some(m.pseudolikelihood_estimate().to_point()),
        }
    }
}

/// One exact draw by coupling from the past.
pub fn generate_ising_data(
    width: usize,
    height: usize,
    theta_j: f64,
    theta_h: f64,
    seed: u64,
) -> Result<IsingLattice, HarnessError> {
    if width == 0 || height == 0 {
        return Err(HarnessError::Validation(
            "width and height must be positive".into(),
        ));
    }
    if theta_j.is_nan() || theta_j < 0.0 {
        return Err(HarnessError::Validation(format!(
            "theta_j must be >= 0, got {theta_j}"
        )));
    }
    let torus = exchange_core::ising::Torus::new(width, height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(cftp_exact_sample(
        &torus,
        IsingParams::new(theta_j, theta_h),
        &mut rng,
    )?)
}

/// Sweep points in output order: algorithm, then K, then theta_hat, then width.
/// K and theta_hat lists only expand the algorithms that use them.
pub fn sweep_points(
    config: &ExperimentConfig,
    default_theta_hat: Option<ParamPoint>,
) -> Result<Vec<SweepPoint>, HarnessError> {
    let theta_hats = config
        .theta_hats()
        .or_else(|| default_theta_hat.map(|t| vec![t]))
        .unwrap_or_default();
    let widths: Vec<Option<f64>> = match config.sampler.proposal.kind {
        ProposalKind::Posterior => vec![None],
        ProposalKind::RandomWalk => config.widths().into_iter().map(Some).collect(),
    };
    let mut points = Vec::new();
    for algorithm in config.algorithms()? {
        let ks = if algorithm.uses_levels() {
            config.levels()
        } else {
            vec![0]
        };
        let hats: Vec<Option<ParamPoint>> = if algorithm.uses_theta_hat() {
            theta_hats.iter().cloned().map(Some).collect()
        } else {
            vec![None]
        };
        for &k in &ks {
            for theta_hat in &hats {
                for &proposal_width in &widths {
                    points.push(SweepPoint {
                        algorithm,
                        k,
                        theta_hat: theta_hat.clone(),
                        proposal_width,
                    });
                }
            }
        }
    }
    Ok(points)
}

fn mix(state: u64, value: u64) -> u64 {
    // splitmix64 finalizer over the running state
    let mut z = (state ^ value).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Replicate seed. Depends only on settings the sampler actually uses, so a
/// sampler sees the same seeds wherever it appears in a sweep.
pub fn replicate_seed(master_seed: u64, point: &SweepPoint, replicate: usize) -> u64 {
    let mut h = mix(master_seed, 0x5eed);
    for b in point.algorithm.name().bytes() {
        h = mix(h, u64::from(b));
    }
    h = mix(h, point.k as u64);
    if let Some(t) = &point.theta_hat {
        for v in t.values() {
            h = mix(h, v.to_bits());
        }
    }
    if let Some(w) = point.proposal_width {
        h = mix(h, w.to_bits());
    }
    mix(h, replicate as u64)
}

const INIT_STREAM: u64 = 0x1417;

pub struct RunOptions {
    /// Concurrent chains; `None` uses every available core.
    pub jobs: Option<usize>,
}

pub fn run_experiment(
    config: &ExperimentConfig,
    options: &RunOptions,
) -> Result<SweepResult, HarnessError> {
    config.validate()?;
    let model = BuiltModel::build(config)?;
    let points = sweep_points(config, model.default_theta_hat())?;
    let tasks: Vec<(&SweepPoint, usize)> = points
        .iter()
        .flat_map(|p| (0..config.sampler.n_replicates).map(move |r| (p, r)))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Validation(format!("--jobs: {e}")))?;
    let keep = config.output.detail;
    let results: Vec<(SweepRow, Option<ChainTrace>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(point, r)| run_row(config, &model, point, r, keep))
            .collect()
    });
    let (rows, traces) = results.into_iter().unzip();
    Ok(SweepResult { rows, traces })
}

fn run_row(
    config: &ExperimentConfig,
    model: &BuiltModel,
    point: &SweepPoint,
    replicate: usize,
    keep_trace: bool,
) -> (SweepRow, Option<ChainTrace>) {
    let seed = replicate_seed(config.master_seed, point, replicate);
    let mut row = SweepRow {
        algorithm: point.algorithm,
        k: point.k,
        theta_hat: point.theta_hat.clone(),
        proposal_width: point.proposal_width,
        replicate,
        acceptance_rate: None,
        ess: None,
        gibbs_updates: 0,
        exact_samples: 0,
        wall_time_seconds: 0.0,
        seed,
        prior_rejections: 0,
        error: None,
    };
    let start = Instant::now();
    let outcome = replicate_trace(config, model, point, replicate);
    row.wall_time_seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(trace) => {
            let c = trace.counters;
            row.gibbs_updates = c.gibbs_updates;
            row.exact_samples = c.exact_samples;
            row.prior_rejections = c.prior_rejections;
            match summarize(&trace, config.sampler.burn_in) {
                Ok((rate, ess)) => {
                    row.acceptance_rate = Some(rate);
                    row.ess = Some(ess);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            (row, keep_trace.then_some(trace))
        }
        Err(e) => {
            row.error = Some(e.to_string());
            (row, None)
        }
    }
}

fn summarize(trace: &ChainTrace, burn_in: usize) -> exchange_core::Result<(f64, f64)> {
    let rate = exchange_core::diagnostics::acceptance_rate_of(&trace.accept_flags[burn_in..])?;
    let dim = trace.initial.dim();
    let mut ess = f64::INFINITY;
    for i in 0..dim {
        ess = ess.min(effective_sample_size(&trace.component(i)[burn_in..])?.ess);
    }
    Ok((rate, ess))
}

/// Runs the chain behind one row.
pub fn replicate_trace(
    config: &ExperimentConfig,
    model: &BuiltModel,
    point: &SweepPoint,
    replicate: usize,
) -> exchange_core::Result<ChainTrace> {
    let seed = replicate_seed(config.master_seed, point, replicate);
    let proposal = match (point.proposal_width, model) {
        (Some(w), _) => ProposalSpec::random_walk(w)?,
        (None, BuiltModel::Gaussian(m)) => ProposalSpec::IndependentPosterior(m.posterior_params()),
        (None, BuiltModel::Ising(_)) => unreachable!("validated"),
    };
    let initial = match (config.initial_theta(), model) {
        (Some(t), _) => t,
        (None, BuiltModel::Gaussian(m)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, INIT_STREAM));
            ParamPoint::scalar(m.posterior_params().sample(&mut rng))
        }
        (None, BuiltModel::Ising(m)) => point
            .theta_hat
            .clone()
            .unwrap_or_else(|| m.pseudolikelihood_estimate().to_point()),
    };
    let sampler = SamplerConfig {
        algorithm: point.algorithm,
        levels: point.k,
        theta_hat: point.theta_hat.clone(),
        proposal,
        iterations: config.sampler.iterations,
        initial,
        seed,
    };
    match model {
        BuiltModel::Gaussian(m) => run_chain_with_normalizer(&sampler, m),
        BuiltModel::Ising(m) => run_chain(&sampler, m),
    }
}
