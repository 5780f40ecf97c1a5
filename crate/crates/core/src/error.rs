use thiserror::Error;

/// Errors raised by models, samplers and diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Monotone coupling from the past requires a ferromagnetic coupling.
    #[error("unsupported regime: coupling theta_J = {theta_j} is negative; monotone CFTP needs theta_J >= 0")]
    UnsupportedRegime { theta_j: f64 },

    /// CFTP did not coalesce within the sweep budget.
    #[error("CFTP did not coalesce within {max_sweeps} sweeps")]
    CftpBudget { max_sweeps: u64 },

    /// Exhaustive enumeration was requested for a lattice that is too large.
    #[error("lattice with {sites} sites exceeds the enumeration limit of {limit}")]
    SizeLimit { sites: usize, limit: usize },

    /// The sampler needs a capability that the model does not provide.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An invalid sampler or experiment configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A step failed partway through a chain.
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// A lattice text document could not be parsed.
    #[error("lattice parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
