//! Zero-mean Gaussian observations with unknown precision and a conjugate
//! Gamma prior. The normalizer `Z(theta) = (2 pi / theta)^(N/2)` is known in
//! closed form, which makes this the ground-truth model for validating the
//! auxiliary-variable samplers.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::{LogNormalizer, Model, ParamPoint, Work};

/// Gamma distribution in shape/rate form (mean `shape / rate`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!(
                "gamma parameters must be positive, got shape={shape}, rate={rate}"
            )));
        }
        Ok(GammaParams { shape, rate })
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    /// Log density; `-inf` for `theta <= 0`.
    pub fn ln_pdf(&self, theta: f64) -> f64 {
        if theta <= 0.0 || theta.is_nan() {
            return f64::NEG_INFINITY;
        }
        self.shape * self.rate.ln() - ln_gamma(self.shape) + (self.shape - 1.0) * theta.ln()
            - self.rate * theta
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        // Parameters were validated on construction.
        GammaDist::new(self.shape, self.rate)
            .expect("validated gamma parameters")
            .cdf(theta)
    }

    /// Marsaglia–Tsang rejection sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rand_distr::Gamma::new(self.shape, 1.0 / self.rate)
            .expect("validated gamma parameters")
            .sample(rng)
    }
}

/// `y_n ~ N(0, 1/theta)` i.i.d., `theta ~ Gamma(alpha, beta)`.
#[derive(Clone, Debug)]
pub struct GaussianPrecisionModel {
    prior: GammaParams,
    data: Vec<f64>,
    data_sum_sq: f64,
}

fn sum_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn check_precision(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "precision must be positive and finite, got {theta}"
        )))
    }
}

/// `log Z(theta) = (N/2) log(2 pi / theta)`.
pub fn true_log_z(theta: f64, n: usize) -> Result<f64> {
    check_precision(theta)?;
    Ok(0.5 * n as f64 * (2.0 * PI / theta).ln())
}

impl GaussianPrecisionModel {
    pub fn new(alpha: f64, beta: f64, data: Vec<f64>) -> Result<Self> {
        let prior = GammaParams::new(alpha, beta)?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("observations must be finite".into()));
        }
        let data_sum_sq = sum_sq(&data);
        Ok(GaussianPrecisionModel {
            prior,
            data,
            data_sum_sq,
        })
    }

    pub fn prior(&self) -> GammaParams {
        self.prior
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Unnormalized log likelihood `-(theta/2) sum x_n^2`.
    pub fn checked_log_f(&self, x: &[f64], theta: f64) -> Result<f64> {
        check_precision(theta)?;
        Ok(-0.5 * theta * sum_sq(x))
    }

    /// Conjugate posterior `Gamma(N/2 + alpha, sum y^2 / 2 + beta)`.
    pub fn posterior_params(&self) -> GammaParams {
        GammaParams {
            shape: 0.5 * self.data.len() as f64 + self.prior.shape,
            rate: 0.5 * self.data_sum_sq + self.prior.rate,
        }
    }

    /// `N` independent draws from `N(0, 1/theta)`.
    pub fn sample_at<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Result<Vec<f64>> {
        check_precision(theta)?;
        let sd = theta.sqrt().recip();
        Ok((0..self.data.len())
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect())
    }
}

impl Model for GaussianPrecisionModel {
    type State = Vec<f64>;

    fn param_dim(&self) -> usize {
        1
    }

    fn observed(&self) -> &Vec<f64> {
        &self.data
    }

    fn log_f(&self, x: &Vec<f64>, theta: &ParamPoint) -> f64 {
        -0.5 * theta[0] * sum_sq(x)
    }

    fn log_prior(&self, theta: &ParamPoint) -> f64 {
        self.prior.ln_pdf(theta[0])
    }

    fn exact_sample<R: Rng + ?Sized>(
        &self,
        theta: &ParamPoint,
        rng: &mut R,
        _work: &mut Work,
    ) -> Result<Vec<f64>> {
        self.sample_at(theta[0], rng)
    }

    /// Draws independently from `p_beta`, which is again Gaussian with
    /// precision `beta * theta_a + (1 - beta) * theta_b`. The incoming state
    /// is ignored.
    fn bridge_transition<R: Rng + ?Sized>(
        &self,
        _x: &Vec<f64>,
        theta_a: &ParamPoint,
        theta_b: &ParamPoint,
        beta: f64,
        rng: &mut R,
        _work: &mut Work,
    ) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
        check_precision(theta_a[0])?;
        check_precision(theta_b[0])?;
        let precision = beta * theta_a[0] + (1.0 - beta) * theta_b[0];
        self.sample_at(precision, rng)
    }
}

impl LogNormalizer for GaussianPrecisionModel {
    fn true_log_z(&self, theta: &ParamPoint) -> Result<f64> {
        true_log_z(theta[0], self.data.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bridge_log_f, log_z_ratio_estimate};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(data: Vec<f64>) -> GaussianPrecisionModel {
        GaussianPrecisionModel::new(1.0, 1.0, data).unwrap()
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn log_f_values() {
        let m = model(vec![1.0]);
        assert_eq!(m.checked_log_f(&[0.0, 0.0, 0.0], 3.7).unwrap(), 0.0);
        assert_eq!(m.checked_log_f(&[1.0], 1.0).unwrap(), -0.5);
        assert_eq!(m.checked_log_f(&[1.0, 2.0], 0.5).unwrap(), -1.25);
        assert!(m.checked_log_f(&[1.0], 0.0).is_err());
        assert!(m.checked_log_f(&[1.0], -2.0).is_err());
    }

    #[test]
    fn true_log_z_values() {
        assert!(true_log_z(2.0 * PI, 2).unwrap().abs() < 1e-15);
        assert!((true_log_z(1.0, 1).unwrap() - 0.918_938_533_204_672_7).abs() < 1e-12);
        assert!((true_log_z(1.0, 4).unwrap() - 3.675_754_132_818_691).abs() < 1e-12);
        assert!(true_log_z(0.0, 1).is_err());
    }

    #[test]
    fn normalized_density_integrates_to_one() {
        // Trapezoid rule over +-10 standard deviations.
        for &theta in &[0.25, 1.0, 4.0] {
            let m = model(vec![0.0]);
            let log_z = true_log_z(theta, 1).unwrap();
            let half = 10.0 / f64::sqrt(theta);
            let n = 200_000;
            let h = 2.0 * half / n as f64;
            let mut total = 0.0;
            for i in 0..=n {
                let x = -half + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                total += w * (m.checked_log_f(&[x], theta).unwrap() - log_z).exp();
            }
            assert!(
                (total * h - 1.0).abs() < 1e-6,
                "theta={theta}: {}",
                total * h
            );
        }
    }

    #[test]
    fn posterior_params_examples() {
        assert_eq!(
            model(vec![1.0]).posterior_params(),
            GammaParams {
                shape: 1.5,
                rate: 1.5
            }
        );
        assert_eq!(
            model(vec![]).posterior_params(),
            GammaParams {
                shape: 1.0,
                rate: 1.0
            }
        );
        let m = GaussianPrecisionModel::new(2.0, 3.0, vec![1.0, 1.0]).unwrap();
        assert_eq!(
            m.posterior_params(),
            GammaParams {
                shape: 3.0,
                rate: 4.0
            }
        );
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        assert!(GaussianPrecisionModel::new(0.0, 1.0, vec![1.0]).is_err());
        assert!(GaussianPrecisionModel::new(1.0, -1.0, vec![1.0]).is_err());
        assert!(GaussianPrecisionModel::new(1.0, 1.0, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn gamma_ln_pdf_matches_direct_formula() {
        // Gamma(1.5, 1.5) at theta = 2: 1.5 ln 1.5 - lnGamma(1.5) + 0.5 ln 2 - 3,
        // with lnGamma(1.5) = ln(sqrt(pi) / 2).
        let g = GammaParams::new(1.5, 1.5).unwrap();
        let expected = 1.5 * 1.5f64.ln() - (PI.sqrt() / 2.0).ln() + 0.5 * 2f64.ln() - 3.0;
        assert!((g.ln_pdf(2.0) - expected).abs() < 1e-13);
        assert_eq!(g.ln_pdf(0.0), f64::NEG_INFINITY);
        assert_eq!(g.ln_pdf(-1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn exact_sample_moments() {
        let m = model(vec![0.0; 100_000]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs = m.sample_at(4.0, &mut rng).unwrap();
        let (mean, var) = mean_var(&xs);
        let n = xs.len() as f64;
        assert!(mean.abs() < 4.0 * 0.5 / n.sqrt(), "mean {mean}");
        // Var of the sample variance for a Gaussian: 2 sigma^4 / (n - 1).
        let sd_var = (2.0 * 0.25f64.powi(2) / (n - 1.0)).sqrt();
        assert!((var - 0.25).abs() < 4.0 * sd_var, "var {var}");
    }

    #[test]
    fn exact_sample_replays_with_seed() {
        let m = model(vec![0.0; 10]);
        let a = m.sample_at(2.0, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = m.sample_at(2.0, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(m
            .sample_at(-1.0, &mut ChaCha8Rng::seed_from_u64(5))
            .is_err());
    }

    #[test]
    fn bridge_endpoint_matches_exact_sample_bitwise() {
        let m = model(vec![0.0; 16]);
        let (a, b) = (ParamPoint::scalar(2.0), ParamPoint::scalar(0.7));
        let mut work = Work::default();
        let x = vec![0.0; 16];
        let bridged = m
            .bridge_transition(
                &x,
                &a,
                &b,
                1.0,
                &mut ChaCha8Rng::seed_from_u64(3),
                &mut work,
            )
            .unwrap();
        let exact = m
            .exact_sample(&a, &mut ChaCha8Rng::seed_from_u64(3), &mut work)
            .unwrap();
        assert_eq!(bridged, exact);
        let bridged = m
            .bridge_transition(
                &x,
                &a,
                &b,
                0.0,
                &mut ChaCha8Rng::seed_from_u64(3),
                &mut work,
            )
            .unwrap();
        let exact = m
            .exact_sample(&b, &mut ChaCha8Rng::seed_from_u64(3), &mut work)
            .unwrap();
        assert_eq!(bridged, exact);
    }

    #[test]
    fn bridge_endpoint_two_sample_ks() {
        // Two-sample KS between bridge(beta = 1) and exact draws from independent
        // streams; critical value at p = 0.01 is 1.628 * sqrt(2 / n).
        let m = model(vec![0.0]);
        let (a, b) = (ParamPoint::scalar(2.0), ParamPoint::scalar(0.5));
        let mut work = Work::default();
        let mut r1 = ChaCha8Rng::seed_from_u64(100);
        let mut r2 = ChaCha8Rng::seed_from_u64(200);
        let n = 10_000;
        let mut xs: Vec<f64> = (0..n)
            .map(|_| {
                m.bridge_transition(&vec![0.0], &a, &b, 1.0, &mut r1, &mut work)
                    .unwrap()[0]
            })
            .collect();
        let mut ys: Vec<f64> = (0..n)
            .map(|_| m.exact_sample(&a, &mut r2, &mut work).unwrap()[0])
            .collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < n && j < n {
            if xs[i] <= ys[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / n as f64 - j as f64 / n as f64).abs());
        }
        assert!(d < 1.628 * (2.0 / n as f64).sqrt(), "D = {d}");
    }

    #[test]
    fn bridge_interior_variance() {
        let m = model(vec![0.0; 100_000]);
        let mut work = Work::default();
        let xs = m
            .bridge_transition(
                &vec![0.0; 100_000],
                &ParamPoint::scalar(2.0),
                &ParamPoint::scalar(1.0),
                0.5,
                &mut ChaCha8Rng::seed_from_u64(9),
                &mut work,
            )
            .unwrap();
        let (_, var) = mean_var(&xs);
        let target = 1.0 / 1.5;
        let sd_var = (2.0 * target * target / (xs.len() as f64 - 1.0)).sqrt();
        assert!((var - target).abs() < 4.0 * sd_var, "var {var}");
        assert!(m
            .bridge_transition(
                &xs,
                &ParamPoint::scalar(2.0),
                &ParamPoint::scalar(1.0),
                1.5,
                &mut ChaCha8Rng::seed_from_u64(9),
                &mut work
            )
            .is_err());
    }

    #[test]
    fn bridge_log_f_examples() {
        let m = model(vec![1.0]);
        let x = vec![1.0];
        let (a, b) = (ParamPoint::scalar(2.0), ParamPoint::scalar(1.0));
        assert_eq!(bridge_log_f(&m, &x, &a, &b, 1.0), m.log_f(&x, &a));
        assert_eq!(bridge_log_f(&m, &x, &a, &b, 0.0), m.log_f(&x, &b));
        // 0.5 * (-1.0) + 0.5 * (-0.5)
        assert!((bridge_log_f(&m, &x, &a, &b, 0.5) - (-0.75)).abs() < 1e-15);
    }

    #[test]
    fn z_ratio_estimate_examples() {
        let m = model(vec![1.0]);
        let x = vec![1.0];
        let t = ParamPoint::scalar(3.3);
        assert_eq!(log_z_ratio_estimate(&m, &x, &t, &t), 0.0);
        let est = log_z_ratio_estimate(&m, &x, &ParamPoint::scalar(1.0), &ParamPoint::scalar(2.0));
        assert_eq!(est, 0.5);
    }

    #[test]
    fn z_ratio_estimate_is_unbiased() {
        // Z(1)/Z(2) = sqrt(2) for N = 1.
        let m = model(vec![1.0]);
        let (num, den) = (ParamPoint::scalar(1.0), ParamPoint::scalar(2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut work = Work::default();
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                let x = m.exact_sample(&den, &mut rng, &mut work).unwrap();
                log_z_ratio_estimate(&m, &x, &num, &den).exp()
            })
            .collect();
        let (mean, var) = mean_var(&draws);
        let se = (var / draws.len() as f64).sqrt();
        assert!((mean - 2f64.sqrt()).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    proptest! {
        #[test]
        fn conjugate_update_is_sequential(
            alpha in 0.1f64..5.0,
            beta in 0.1f64..5.0,
            data in proptest::collection::vec(-5.0f64..5.0, 2..20),
        ) {
            let split = data.len() / 2;
            let full = GaussianPrecisionModel::new(alpha, beta, data.clone()).unwrap().posterior_params();
            let first = GaussianPrecisionModel::new(alpha, beta, data[..split].to_vec()).unwrap().posterior_params();
            let second = GaussianPrecisionModel::new(first.shape, first.rate, data[split..].to_vec())
                .unwrap()
                .posterior_params();
            prop_assert!((full.shape - second.shape).abs() < 1e-12);
            prop_assert!((full.rate - second.rate).abs() < 1e-9 * full.rate);
        }

        #[test]
        fn bridge_log_f_endpoints_are_bitwise(
            x in proptest::collection::vec(-10.0f64..10.0, 1..8),
            a in 0.01f64..10.0,
            b in 0.01f64..10.0,
        ) {
            let m = model(vec![0.0; x.len()]);
            let (ta, tb) = (ParamPoint::scalar(a), ParamPoint::scalar(b));
            prop_assert_eq!(bridge_log_f(&m, &x, &ta, &tb, 1.0).to_bits(), m.log_f(&x, &ta).to_bits());
            prop_assert_eq!(bridge_log_f(&m, &x, &ta, &tb, 0.0).to_bits(), m.log_f(&x, &tb).to_bits());
        }
    }
}
