use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gaussian::GammaParams;
use crate::model::ParamPoint;

/// A parameter proposal `q(theta'; theta)`.
pub trait Proposal: Sync {
    fn propose<R: Rng + ?Sized>(&self, from: &ParamPoint, rng: &mut R) -> ParamPoint;

    /// `log q(to; from)`.
    fn log_density(&self, to: &ParamPoint, from: &ParamPoint) -> f64;

    /// `log q(from; to) - log q(to; from)`, the proposal factor of an M–H ratio.
    fn log_ratio(&self, from: &ParamPoint, to: &ParamPoint) -> f64 {
        self.log_density(from, to) - self.log_density(to, from)
    }
}

/// The proposals used in the experiments.
#[derive(Clone, Debug, PartialEq)]
pub enum ProposalSpec {
    /// Independent draws from a known Gamma posterior (scalar parameters only).
    IndependentPosterior(GammaParams),
    /// Isotropic Gaussian random walk; `width` is the standard deviation.
    RandomWalk { width: f64 },
}

impl ProposalSpec {
    pub fn random_walk(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Config(format!(
                "random-walk width must be positive, got {width}"
            )));
        }
        Ok(ProposalSpec::RandomWalk { width })
    }

    pub fn width(&self) -> Option<f64> {
        match self {
            ProposalSpec::RandomWalk { width } => Some(*width),
            ProposalSpec::IndependentPosterior(_) => None,
        }
    }
}

impl Proposal for ProposalSpec {
    fn propose<R: Rng + ?Sized>(&self, from: &ParamPoint, rng: &mut R) -> ParamPoint {
        match self {
            ProposalSpec::IndependentPosterior(g) => ParamPoint::scalar(g.sample(rng)),
            ProposalSpec::RandomWalk { width } => ParamPoint::new(
                from.values()
                    .iter()
                    .map(|v| v + width * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            ),
        }
    }

    fn log_density(&self, to: &ParamPoint, from: &ParamPoint) -> f64 {
        match self {
            ProposalSpec::IndependentPosterior(g) => g.ln_pdf(to[0]),
            ProposalSpec::RandomWalk { width } => {
                let norm = -0.5 * (2.0 * std::f64::consts::PI).ln() - width.ln();
                to.values()
                    .iter()
                    .zip(from.values())
                    .map(|(t, f)| norm - 0.5 * ((t - f) / width).powi(2))
                    .sum()
            }
        }
    }

    fn log_ratio(&self, from: &ParamPoint, to: &ParamPoint) -> f64 {
        match self {
            ProposalSpec::IndependentPosterior(g) => g.ln_pdf(from[0]) - g.ln_pdf(to[0]),
            // symmetric
            ProposalSpec::RandomWalk { .. } => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_walk_density_is_normalized_and_symmetric() {
        let q = ProposalSpec::random_walk(0.3).unwrap();
        let from = ParamPoint::scalar(1.0);
        let h = 1e-3;
        let total: f64 = (-3000..=3000)
            .map(|i| {
                q.log_density(&ParamPoint::scalar(1.0 + i as f64 * h), &from)
                    .exp()
                    * h
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-6);
        let to = ParamPoint::scalar(1.4);
        assert!((q.log_density(&to, &from) - q.log_density(&from, &to)).abs() < 1e-15);
        assert_eq!(q.log_ratio(&from, &to), 0.0);
    }

    #[test]
    fn random_walk_moves_every_component() {
        let q = ProposalSpec::random_walk(0.01).unwrap();
        let from = ParamPoint::new(vec![0.3, 0.0]);
        let to = q.propose(&from, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(to.dim(), 2);
        assert!(to[0] != from[0] && to[1] != from[1]);
    }

    #[test]
    fn rejects_bad_width() {
        assert!(ProposalSpec::random_walk(0.0).is_err());
        assert!(ProposalSpec::random_walk(-1.0).is_err());
        assert!(ProposalSpec::random_walk(f64::NAN).is_err());
    }

    #[test]
    fn posterior_proposal_ratio() {
        let g = GammaParams::new(1.5, 1.5).unwrap();
        let q = ProposalSpec::IndependentPosterior(g);
        let (a, b) = (ParamPoint::scalar(0.5), ParamPoint::scalar(2.0));
        assert_eq!(q.log_ratio(&a, &b), g.ln_pdf(0.5) - g.ln_pdf(2.0));
        assert_eq!(q.log_density(&b, &a), g.ln_pdf(2.0));
    }
}
