//! Monotone coupling from the past for ferromagnetic Ising models.
//!
//! Heat-bath updates driven by a shared uniform preserve the sitewise order
//! of configurations when `theta_J >= 0`, so it suffices to follow the all-up
//! and all-down chains. Block `b` of the backward time axis (sweeps
//! `[-2^b, -2^(b-1))`, block 0 being the final sweep) draws its uniforms from
//! a ChaCha stream keyed by a per-call master seed and `b`; later epochs reuse
//! the earlier blocks verbatim.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gibbs::HeatBath;
use super::lattice::{IsingLattice, Torus};
use super::IsingParams;
use crate::error::{Error, Result};
use crate::model::Work;

/// Longest backward run attempted before giving up.
pub const DEFAULT_MAX_SWEEPS: u64 = 1 << 20;

/// Diagnostics of a successful CFTP run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CftpStats {
    /// Length in sweeps of the epoch that coalesced.
    pub coalescence_sweeps: u64,
    /// Heat-bath updates over all epochs and both chains.
    pub site_updates: u64,
}

#[derive(Clone, Debug)]
pub struct Cftp {
    max_sweeps: u64,
}

impl Default for Cftp {
    fn default() -> Self {
        Cftp {
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

fn block_len(block: u32) -> u64 {
    if block == 0 {
        1
    } else {
        1 << (block - 1)
    }
}

impl Cftp {
    pub fn with_max_sweeps(max_sweeps: u64) -> Self {
        Cftp { max_sweeps }
    }

    pub fn max_sweeps(&self) -> u64 {
        self.max_sweeps
    }

    /// Exact draw from the Boltzmann distribution at `params`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        torus: &Torus,
        params: IsingParams,
        rng: &mut R,
        work: &mut Work,
    ) -> Result<IsingLattice> {
        self.sample_with_stats(torus, params, rng, work)
            .map(|(l, _)| l)
    }

    pub fn sample_with_stats<R: Rng + ?Sized>(
        &self,
        torus: &Torus,
        params: IsingParams,
        rng: &mut R,
        work: &mut Work,
    ) -> Result<(IsingLattice, CftpStats)> {
        if params.theta_j < 0.0 {
            return Err(Error::UnsupportedRegime {
                theta_j: params.theta_j,
            });
        }
        let master: u64 = rng.random();
        let heat = HeatBath::new(params);
        let n = torus.sites();
        let mut upper = vec![1i8; n];
        let mut lower = vec![-1i8; n];
        let mut site_updates = 0u64;
        let mut epoch = 0u32;
        loop {
            let sweeps = 1u64 << epoch;
            if sweeps > self.max_sweeps {
                work.gibbs_updates += site_updates;
                return Err(Error::CftpBudget {
                    max_sweeps: self.max_sweeps,
                });
            }
            upper.fill(1);
            lower.fill(-1);
            for block in (0..=epoch).rev() {
                let mut stream = ChaCha8Rng::seed_from_u64(master);
                stream.set_stream(block as u64);
                for _ in 0..block_len(block) {
                    for site in 0..n {
                        let u: f64 = stream.random();
                        heat.update(torus, &mut upper, site, u);
                        heat.update(torus, &mut lower, site, u);
                        debug_assert!(
                            upper[site] >= lower[site],
                            "monotone coupling violated at site {site}"
                        );
                    }
                }
            }
            site_updates += 2 * n as u64 * sweeps;
            debug_assert!(upper.iter().zip(&lower).all(|(u, l)| u >= l));
            if upper == lower {
                work.gibbs_updates += site_updates;
                let lattice = IsingLattice::new(torus.width(), torus.height(), upper)
                    .expect("CFTP keeps spins in {-1, +1}");
                return Ok((
                    lattice,
                    CftpStats {
                        coalescence_sweeps: sweeps,
                        site_updates,
                    },
                ));
            }
            epoch += 1;
        }
    }
}

/// Exact draw with the default sweep budget.
pub fn cftp_exact_sample<R: Rng + ?Sized>(
    torus: &Torus,
    params: IsingParams,
    rng: &mut R,
) -> Result<IsingLattice> {
    Cftp::default().sample(torus, params, rng, &mut Work::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::enumerate::enumerate_boltzmann;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    /// Chi-square goodness of fit of `draws` CFTP samples against enumeration,
    /// pooling states whose expected count is below 5.
    fn chi_square_p(params: IsingParams, draws: usize, seed: u64) -> f64 {
        let torus = Torus::new(3, 3);
        let table = enumerate_boltzmann(3, 3, params).unwrap();
        let mut counts = vec![0u64; table.probs.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..draws {
            let x = cftp_exact_sample(&torus, params, &mut rng).unwrap();
            counts[x.to_bits() as usize] += 1;
        }
        let (mut stat, mut cells) = (0.0, 0usize);
        let (mut pool_obs, mut pool_exp) = (0.0, 0.0);
        for (c, p) in counts.iter().zip(&table.probs) {
            let e = p * draws as f64;
            if e < 5.0 {
                pool_obs += *c as f64;
                pool_exp += e;
            } else {
                stat += (*c as f64 - e).powi(2) / e;
                cells += 1;
            }
        }
        if pool_exp > 0.0 {
            stat += (pool_obs - pool_exp).powi(2) / pool_exp;
            cells += 1;
        }
        1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
    }

    #[test]
    fn independent_sites_coalesce_in_one_sweep() {
        let torus = Torus::new(3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (_, stats) = Cftp::default()
            .sample_with_stats(
                &torus,
                IsingParams::new(0.0, 0.0),
                &mut rng,
                &mut Work::default(),
            )
            .unwrap();
        assert_eq!(stats.coalescence_sweeps, 1);
        assert_eq!(stats.site_updates, 18);
    }

    #[test]
    fn matches_enumeration_at_zero() {
        let p = chi_square_p(IsingParams::new(0.0, 0.0), 100_000, 1);
        assert!(p > 0.001, "p = {p}");
    }

    #[test]
    fn matches_enumeration_ferromagnetic() {
        let p = chi_square_p(IsingParams::new(0.3, 0.0), 100_000, 2);
        assert!(p > 0.001, "p = {p}");
    }

    #[test]
    fn rejects_antiferromagnetic_coupling() {
        let torus = Torus::new(3, 3);
        let err = cftp_exact_sample(
            &torus,
            IsingParams::new(-0.1, 0.0),
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(matches!(err, Err(Error::UnsupportedRegime { .. })));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        // A strong coupling on 8x8 cannot coalesce within four sweeps.
        let torus = Torus::new(8, 8);
        let mut work = Work::default();
        let err = Cftp::with_max_sweeps(4).sample(
            &torus,
            IsingParams::new(1.0, 0.0),
            &mut ChaCha8Rng::seed_from_u64(0),
            &mut work,
        );
        assert_eq!(err, Err(Error::CftpBudget { max_sweeps: 4 }));
        assert_eq!(work.gibbs_updates, 2 * 64 * (1 + 2 + 4));
    }

    #[test]
    fn seeded_replay_is_deterministic() {
        let torus = Torus::new(6, 6);
        let p = IsingParams::new(0.35, 0.1);
        let a = cftp_exact_sample(&torus, p, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        let b = cftp_exact_sample(&torus, p, &mut ChaCha8Rng::seed_from_u64(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coalescence_is_monotone_in_epoch_length() {
        // Once the boundary chains meet from time -T, starting further back
        // with the same replayed stream must also coalesce to the same state.
        let torus = Torus::new(5, 5);
        let p = IsingParams::new(0.4, 0.0);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let master: u64 = rng.random();
            let heat = HeatBath::new(p);
            let mut first = None;
            for epoch in 0..12u32 {
                let mut up = vec![1i8; 25];
                let mut down = vec![-1i8; 25];
                for block in (0..=epoch).rev() {
                    let mut s = ChaCha8Rng::seed_from_u64(master);
                    s.set_stream(block as u64);
                    for _ in 0..block_len(block) {
                        for site in 0..25 {
                            let u: f64 = s.random();
                            heat.update(&torus, &mut up, site, u);
                            heat.update(&torus, &mut down, site, u);
                        }
                    }
                }
                match (&first, up == down) {
                    (None, true) => first = Some(up),
                    (Some(state), coalesced) => {
                        assert!(coalesced, "seed {seed} epoch {epoch} lost coalescence");
                        assert_eq!(state, &up);
                    }
                    (None, false) => {}
                }
            }
            assert!(first.is_some());
        }
    }
}
