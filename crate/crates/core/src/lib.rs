//! Markov chain Monte Carlo for doubly-intractable posteriors.
//!
//! A posterior `p(theta | y) ∝ f(y; theta) p(theta) / Z(theta)` is doubly
//! intractable when the likelihood normalizer `Z(theta)` cannot be computed.
//! The samplers here sidestep `Z` with exact draws from the model:
//!
//! * the single auxiliary variable method (SAVM),
//! * its tempered extension with `K` bridging levels (MAVM),
//! * the exchange algorithm, with or without bridging.
//!
//! An exact-normalizer Metropolis–Hastings baseline is available for models
//! that implement [`LogNormalizer`]. Two models are provided: a Gaussian
//! precision model with a conjugate posterior, and a toroidal Ising model with
//! exact sampling by monotone coupling from the past.
//!
//! ```
//! use exchange_core::{
//!     run_chain, Algorithm, GaussianPrecisionModel, ParamPoint, ProposalSpec, SamplerConfig,
//! };
//!
//! let model = GaussianPrecisionModel::new(1.0, 1.0, vec![1.0]).unwrap();
//! let config = SamplerConfig {
//!     algorithm: Algorithm::Exchange,
//!     levels: 0,
//!     theta_hat: None,
//!     proposal: ProposalSpec::random_walk(0.5).unwrap(),
//!     iterations: 1_000,
//!     initial: ParamPoint::scalar(1.0),
//!     seed: 7,
//! };
//! let trace = run_chain(&config, &model).unwrap();
//! assert_eq!(trace.len(), 1_000);
//! ```

pub mod diagnostics;
pub mod error;
pub mod gaussian;
pub mod ising;
pub mod model;
pub mod samplers;

pub use diagnostics::{
    acceptance_rate, effective_sample_size, efficiency, ks_test, thin_by_autocorrelation,
    EssEstimate, KsResult,
};
pub use error::{Error, Result};
pub use gaussian::{true_log_z, GammaParams, GaussianPrecisionModel};
pub use ising::{IsingLattice, IsingModel, IsingParams};
pub use model::{
    bridge_log_f, log_z_ratio_estimate, BridgeSchedule, LogNormalizer, Model, ParamPoint, Work,
};
pub use samplers::{
    run_chain, run_chain_with_normalizer, AcceptanceRecord, Algorithm, ChainTrace, Counters,
    Proposal, ProposalSpec, SamplerConfig,
};
