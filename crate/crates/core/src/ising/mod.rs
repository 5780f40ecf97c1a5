//! Ferromagnetic Ising model on a square torus: unnormalized density,
//! heat-bath sweeps, monotone coupling from the past and pseudo-likelihood
//! estimation.

pub mod cftp;
pub mod enumerate;
pub mod gibbs;
pub mod lattice;
pub mod pseudolikelihood;

use rand::Rng;

pub use cftp::{cftp_exact_sample, Cftp, CftpStats};
pub use enumerate::{enumerate_boltzmann, enumerate_distribution, BoltzmannTable};
pub use gibbs::{bridge_params, bridged_gibbs_sweep, gibbs_sweep, prob_up, HeatBath};
pub use lattice::{IsingLattice, Torus};
pub use pseudolikelihood::{pseudolikelihood_estimate, PseudoLikelihood};

use crate::error::{Error, Result};
use crate::model::{Model, ParamPoint, Work};

/// Coupling and field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsingParams {
    pub theta_j: f64,
    pub theta_h: f64,
}

impl IsingParams {
    pub fn new(theta_j: f64, theta_h: f64) -> Self {
        IsingParams { theta_j, theta_h }
    }

    pub fn from_point(theta: &ParamPoint) -> Self {
        IsingParams::new(theta[0], theta[1])
    }

    pub fn to_point(self) -> ParamPoint {
        ParamPoint::new(vec![self.theta_j, self.theta_h])
    }
}

/// `theta_J * sum_{edges} y_i y_j + theta_h * sum_i y_i`.
pub fn log_f(torus: &Torus, lattice: &IsingLattice, params: IsingParams) -> f64 {
    torus.check(lattice);
    params.theta_j * torus.edge_agreement(lattice.spins()) as f64
        + params.theta_h * lattice.magnetization() as f64
}

/// Ising likelihood with observed data and the uniform prior
/// `0 < theta_J < 1`, `|theta_h| < 1`. Parameter points are `[theta_J, theta_h]`.
#[derive(Clone, Debug)]
pub struct IsingModel {
    torus: Torus,
    data: IsingLattice,
    cftp: Cftp,
}

impl IsingModel {
    pub fn new(data: IsingLattice) -> Self {
        IsingModel {
            torus: Torus::new(data.width(), data.height()),
            data,
            cftp: Cftp::default(),
        }
    }

    pub fn with_cftp(mut self, cftp: Cftp) -> Self {
        self.cftp = cftp;
        self
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn data(&self) -> &IsingLattice {
        &self.data
    }

    pub fn in_support(theta: &ParamPoint) -> bool {
        let (j, h) = (theta[0], theta[1]);
        j > 0.0 && j < 1.0 && h > -1.0 && h < 1.0
    }

    pub fn pseudolikelihood_estimate(&self) -> IsingParams {
        PseudoLikelihood::new(&self.torus, &self.data).maximize()
    }
}

impl Model for IsingModel {
    type State = IsingLattice;

    fn param_dim(&self) -> usize {
        2
    }

    fn observed(&self) -> &IsingLattice {
        &self.data
    }

    fn log_f(&self, x: &IsingLattice, theta: &ParamPoint) -> f64 {
        log_f(&self.torus, x, IsingParams::from_point(theta))
    }

    fn log_prior(&self, theta: &ParamPoint) -> f64 {
        if IsingModel::in_support(theta) {
            // uniform density over an area of 2
            -std::f64::consts::LN_2
        } else {
            f64::NEG_INFINITY
        }
    }

    fn exact_sample<R: Rng + ?Sized>(
        &self,
        theta: &ParamPoint,
        rng: &mut R,
        work: &mut Work,
    ) -> Result<IsingLattice> {
        self.cftp
            .sample(&self.torus, IsingParams::from_point(theta), rng, work)
    }

    fn bridge_transition<R: Rng + ?Sized>(
        &self,
        x: &IsingLattice,
        theta_a: &ParamPoint,
        theta_b: &ParamPoint,
        beta: f64,
        rng: &mut R,
        work: &mut Work,
    ) -> Result<IsingLattice> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
        let params = gibbs::bridge_params(
            IsingParams::from_point(theta_a),
            IsingParams::from_point(theta_b),
            beta,
        );
        let mut next = x.clone();
        HeatBath::new(params).sweep(&self.torus, &mut next, rng);
        work.gibbs_updates += next.len() as u64;
        Ok(next)
    }
}
