//! Parameter-space samplers for doubly-intractable posteriors.

pub mod proposal;
pub mod steps;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use proposal::{Proposal, ProposalSpec};
pub use steps::{
    exact_z_mh_step, exchange_bridged_step, exchange_step, mavm_step, savm_auxiliary_term,
    savm_step, MavmState, SavmState,
};

use crate::error::{Error, Result};
use crate::model::{BridgeSchedule, LogNormalizer, Model, ParamPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Baseline M–H using the true normalizer.
    ExactZMh,
    Savm,
    Mavm,
    Exchange,
    ExchangeBridged,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::ExactZMh,
        Algorithm::Savm,
        Algorithm::Mavm,
        Algorithm::Exchange,
        Algorithm::ExchangeBridged,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ExactZMh => "exact-z-mh",
            Algorithm::Savm => "savm",
            Algorithm::Mavm => "mavm",
            Algorithm::Exchange => "exchange",
            Algorithm::ExchangeBridged => "exchange-bridged",
        }
    }

    pub fn uses_theta_hat(self) -> bool {
        matches!(self, Algorithm::Savm | Algorithm::Mavm)
    }

    pub fn uses_levels(self) -> bool {
        matches!(self, Algorithm::Mavm | Algorithm::ExchangeBridged)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

/// Everything needed to run one chain.
#[derive(Clone, Debug)]
pub struct SamplerConfig<P = ProposalSpec> {
    pub algorithm: Algorithm,
    /// Bridging levels `K` (MAVM and bridged exchange).
    pub levels: usize,
    /// Fixed point estimate (SAVM and MAVM only).
    pub theta_hat: Option<ParamPoint>,
    pub proposal: P,
    pub iterations: usize,
    pub initial: ParamPoint,
    pub seed: u64,
}

impl<P> SamplerConfig<P> {
    pub fn validate(&self, param_dim: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        match (&self.theta_hat, self.algorithm.uses_theta_hat()) {
            (None, true) => {
                return Err(Error::Config(format!(
                    "{} needs a theta_hat point estimate",
                    self.algorithm
                )))
            }
            (Some(_), false) => {
                return Err(Error::Config(format!(
                    "{} does not take a theta_hat",
                    self.algorithm
                )))
            }
            (Some(t), true) => t
                .validate(param_dim)
                .map_err(|e| Error::Config(format!("theta_hat: {e}")))?,
            (None, false) => {}
        }
        if !self.algorithm.uses_levels() && self.levels != 0 {
            return Err(Error::Config(format!(
                "{} does not use bridging levels",
                self.algorithm
            )));
        }
        self.initial
            .validate(param_dim)
            .map_err(|e| Error::Config(format!("initial: {e}")))
    }
}

/// Work counters accumulated over a chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Exact draws made by proposals.
    pub exact_samples: u64,
    /// Exact draws made while initializing auxiliary chain state.
    pub init_exact_samples: u64,
    pub gibbs_updates: u64,
    pub bridge_steps: u64,
    /// Proposals rejected for leaving the prior support, without exact sampling.
    pub prior_rejections: u64,
}

/// Outcome of one M–H step with its log-ratio decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct AcceptanceRecord {
    pub proposed: ParamPoint,
    pub log_accept_ratio: f64,
    pub accepted: bool,
    pub prior_rejected: bool,
    /// Prior and likelihood factor at the data.
    pub target_term: f64,
    /// `log q(theta; theta') - log q(theta'; theta)`.
    pub proposal_term: f64,
    /// Auxiliary-variable (or exact normalizer) factor.
    pub auxiliary_term: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrace {
    pub initial: ParamPoint,
    pub theta_samples: Vec<ParamPoint>,
    pub accept_flags: Vec<bool>,
    pub counters: Counters,
}

impl ChainTrace {
    pub fn len(&self) -> usize {
        self.theta_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_samples.is_empty()
    }

    /// The series of parameter component `i`.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.theta_samples.iter().map(|t| t[i]).collect()
    }
}

enum ChainState<S> {
    Plain(ParamPoint),
    Savm(SavmState<S>),
    Mavm(MavmState<S>),
}

impl<S> ChainState<S> {
    fn theta(&self) -> &ParamPoint {
        match self {
            ChainState::Plain(t) => t,
            ChainState::Savm(s) => &s.theta,
            ChainState::Mavm(s) => &s.theta,
        }
    }
}

/// Runs a chain with one of the auxiliary-variable samplers. The exact-Z
/// baseline needs [`run_chain_with_normalizer`].
pub fn run_chain<M, P>(config: &SamplerConfig<P>, model: &M) -> Result<ChainTrace>
where
    M: Model,
    P: Proposal,
{
    if config.algorithm == Algorithm::ExactZMh {
        return Err(Error::Unsupported(
            "exact-z-mh needs a model with a known normalizer".into(),
        ));
    }
    drive(config, model, None)
}

/// Runs any sampler, including the exact-Z baseline.
pub fn run_chain_with_normalizer<M, P>(config: &SamplerConfig<P>, model: &M) -> Result<ChainTrace>
where
    M: LogNormalizer,
    P: Proposal,
{
    drive(config, model, Some(&|t: &ParamPoint| model.true_log_z(t)))
}

type LogZ<'a> = &'a dyn Fn(&ParamPoint) -> Result<f64>;

fn drive<M, P>(config: &SamplerConfig<P>, model: &M, log_z: Option<LogZ<'_>>) -> Result<ChainTrace>
where
    M: Model,
    P: Proposal,
{
    config.validate(model.param_dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut counters = Counters::default();
    let schedule = BridgeSchedule::linear(config.levels);
    let at = |iteration: usize| {
        move |e: Error| Error::AtIteration {
            iteration,
            source: Box::new(e),
        }
    };
    let initial = config.initial.clone();
    let mut state = match config.algorithm {
        Algorithm::Savm => ChainState::Savm(
            SavmState::initialize(
                model,
                initial.clone(),
                config.theta_hat.as_ref().expect("validated"),
                &mut rng,
                &mut counters,
            )
            .map_err(at(0))?,
        ),
        Algorithm::Mavm => ChainState::Mavm(
            MavmState::initialize(
                model,
                initial.clone(),
                config.theta_hat.as_ref().expect("validated"),
                &schedule,
                &mut rng,
                &mut counters,
            )
            .map_err(at(0))?,
        ),
        _ => ChainState::Plain(initial.clone()),
    };

    let mut theta_samples = Vec::with_capacity(config.iterations);
    let mut accept_flags = Vec::with_capacity(config.iterations);
    for t in 0..config.iterations {
        let record = match (&mut state, config.algorithm) {
            (ChainState::Plain(theta), Algorithm::ExactZMh) => steps::exact_z_step_with(
                model,
                log_z.expect("exact-z-mh is only reachable with a normalizer"),
                theta,
                &config.proposal,
                &mut rng,
                &mut counters,
            ),
            (ChainState::Plain(theta), Algorithm::Exchange) => {
                exchange_step(model, theta, &config.proposal, &mut rng, &mut counters)
            }
            (ChainState::Plain(theta), Algorithm::ExchangeBridged) => exchange_bridged_step(
                model,
                theta,
                &config.proposal,
                &schedule,
                &mut rng,
                &mut counters,
            ),
            (ChainState::Savm(s), _) => savm_step(
                model,
                s,
                config.theta_hat.as_ref().expect("validated"),
                &config.proposal,
                &mut rng,
                &mut counters,
            ),
            (ChainState::Mavm(s), _) => mavm_step(
                model,
                s,
                config.theta_hat.as_ref().expect("validated"),
                &config.proposal,
                &schedule,
                &mut rng,
                &mut counters,
            ),
            (ChainState::Plain(_), _) => unreachable!("state matches algorithm"),
        }
        .map_err(at(t))?;
        accept_flags.push(record.accepted);
        theta_samples.push(state.theta().clone());
    }
    Ok(ChainTrace {
        initial,
        theta_samples,
        accept_flags,
        counters,
    })
}
