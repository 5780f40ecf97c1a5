//! Brute-force enumeration of small lattices, used as a test oracle.

use super::lattice::{IsingLattice, Torus};
use super::IsingParams;
use crate::error::{Error, Result};

pub const MAX_ENUMERATION_SITES: usize = 16;

/// Exact distribution over all `2^(w h)` configurations. Index `s` encodes
/// site `i` as bit `i` (set means +1).
#[derive(Clone, Debug)]
pub struct BoltzmannTable {
    pub width: usize,
    pub height: usize,
    pub probs: Vec<f64>,
    pub log_z: f64,
}

impl BoltzmannTable {
    pub fn prob(&self, lattice: &IsingLattice) -> f64 {
        self.probs[lattice.to_bits() as usize]
    }
}

/// Normalizes `exp(log_weight)` over every configuration.
pub fn enumerate_distribution(
    width: usize,
    height: usize,
    log_weight: impl Fn(&IsingLattice) -> f64,
) -> Result<BoltzmannTable> {
    let sites = width * height;
    if sites > MAX_ENUMERATION_SITES {
        return Err(Error::SizeLimit {
            sites,
            limit: MAX_ENUMERATION_SITES,
        });
    }
    if sites == 0 {
        return Err(Error::Domain(
            "lattice dimensions must be at least 1".into(),
        ));
    }
    let logw: Vec<f64> = (0..1u64 << sites)
        .map(|s| log_weight(&IsingLattice::from_bits(width, height, s)))
        .collect();
    let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logw.iter().map(|l| (l - max).exp()).sum();
    let log_z = max + total.ln();
    let probs = logw.iter().map(|l| (l - log_z).exp()).collect();
    Ok(BoltzmannTable {
        width,
        height,
        probs,
        log_z,
    })
}

/// Boltzmann distribution and exact `log Z` of the toroidal Ising model.
pub fn enumerate_boltzmann(
    width: usize,
    height: usize,
    params: IsingParams,
) -> Result<BoltzmannTable> {
    if width * height > MAX_ENUMERATION_SITES {
        return Err(Error::SizeLimit {
            sites: width * height,
            limit: MAX_ENUMERATION_SITES,
        });
    }
    let torus = Torus::new(width.max(1), height.max(1));
    enumerate_distribution(width, height, |l| super::log_f(&torus, l, params))
}
