//! The model contract consumed by every sampler, plus the geometric bridging
//! machinery shared by MAVM and the bridged exchange algorithm.

use std::fmt;
use std::ops::Index;

use rand::Rng;

use crate::error::{Error, Result};

/// A parameter setting. The dimension is fixed by the owning model.
#[derive(Clone, PartialEq, Default)]
pub struct ParamPoint(Vec<f64>);

impl ParamPoint {
    pub fn new(values: Vec<f64>) -> Self {
        ParamPoint(values)
    }

    pub fn scalar(value: f64) -> Self {
        ParamPoint(vec![value])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Checks the dimension against `expected` and that every component is finite.
    pub fn validate(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::Domain(format!(
                "parameter has dimension {}, model expects {}",
                self.dim(),
                expected
            )));
        }
        if !self.is_finite() {
            return Err(Error::Domain(format!("parameter {self:?} is not finite")));
        }
        Ok(())
    }
}

impl Index<usize> for ParamPoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for ParamPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl From<Vec<f64>> for ParamPoint {
    fn from(values: Vec<f64>) -> Self {
        ParamPoint(values)
    }
}

impl From<f64> for ParamPoint {
    fn from(value: f64) -> Self {
        ParamPoint::scalar(value)
    }
}

/// Work performed by transition operators and exact samplers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Work {
    /// Single-site heat-bath updates, counting every coupled chain.
    pub gibbs_updates: u64,
}

/// An unnormalized model `f(x; theta)` whose normalizer `Z(theta)` is unknown
/// to the samplers.
///
/// Implementations are immutable after construction and shared between
/// concurrently running chains.
pub trait Model: Sync {
    /// A point in data space.
    type State: Clone + Send + Sync + PartialEq + fmt::Debug;

    fn param_dim(&self) -> usize;

    /// The observed data `y`.
    fn observed(&self) -> &Self::State;

    /// `log f(x; theta)`. Only called for `theta` inside the prior support.
    fn log_f(&self, x: &Self::State, theta: &ParamPoint) -> f64;

    /// Log prior density; `-inf` marks points outside the support.
    fn log_prior(&self, theta: &ParamPoint) -> f64;

    /// An exact draw from `f(.; theta) / Z(theta)`.
    fn exact_sample<R: Rng + ?Sized>(
        &self,
        theta: &ParamPoint,
        rng: &mut R,
        work: &mut Work,
    ) -> Result<Self::State>;

    /// One application of a transition operator that satisfies detailed
    /// balance with respect to `p_beta ∝ f(.; theta_a)^beta f(.; theta_b)^(1 - beta)`.
    fn bridge_transition<R: Rng + ?Sized>(
        &self,
        x: &Self::State,
        theta_a: &ParamPoint,
        theta_b: &ParamPoint,
        beta: f64,
        rng: &mut R,
        work: &mut Work,
    ) -> Result<Self::State>;
}

/// Models whose normalizer is secretly known. Only the exact-Z baseline
/// sampler may use this.
pub trait LogNormalizer: Model {
    fn true_log_z(&self, theta: &ParamPoint) -> Result<f64>;
}

/// Inverse temperatures of a bridging path, endpoints included.
///
/// `betas[0] = 1` selects the first density of the pair and `betas[K + 1] = 0`
/// the second.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeSchedule {
    betas: Vec<f64>,
}

impl BridgeSchedule {
    /// `beta_k = (K - k + 1) / (K + 1)` for `k = 0..=K+1`.
    pub fn linear(levels: usize) -> Self {
        let denom = (levels + 1) as f64;
        let mut betas = Vec::with_capacity(levels + 2);
        betas.push(1.0);
        for k in 1..=levels {
            betas.push((levels - k + 1) as f64 / denom);
        }
        betas.push(0.0);
        BridgeSchedule { betas }
    }

    /// A custom schedule; must start at 1, end at 0 and strictly decrease.
    pub fn from_betas(betas: Vec<f64>) -> Result<Self> {
        if betas.len() < 2 || betas[0] != 1.0 || betas[betas.len() - 1] != 0.0 {
            return Err(Error::Domain(
                "bridge schedule must start at 1 and end at 0".into(),
            ));
        }
        if betas
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::Domain(
                "bridge schedule must be strictly decreasing".into(),
            ));
        }
        Ok(BridgeSchedule { betas })
    }

    /// Number of intermediate levels `K`.
    pub fn levels(&self) -> usize {
        self.betas.len() - 2
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.betas[k]
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

/// `beta * log f(x; theta_a) + (1 - beta) * log f(x; theta_b)`.
///
/// Endpoints and coincident parameters return `log_f` untouched so that
/// cancellations in acceptance ratios are exact.
pub fn bridge_log_f<M: Model + ?Sized>(
    model: &M,
    x: &M::State,
    theta_a: &ParamPoint,
    theta_b: &ParamPoint,
    beta: f64,
) -> f64 {
    if beta == 1.0 || theta_a == theta_b {
        model.log_f(x, theta_a)
    } else if beta == 0.0 {
        model.log_f(x, theta_b)
    } else {
        beta * model.log_f(x, theta_a) + (1.0 - beta) * model.log_f(x, theta_b)
    }
}

/// Log of the one-sample importance estimate of `Z(theta_num) / Z(theta_den)`,
/// valid when `x` was drawn exactly from `f(.; theta_den) / Z(theta_den)`.
pub fn log_z_ratio_estimate<M: Model + ?Sized>(
    model: &M,
    x: &M::State,
    theta_num: &ParamPoint,
    theta_den: &ParamPoint,
) -> f64 {
    model.log_f(x, theta_num) - model.log_f(x, theta_den)
}
