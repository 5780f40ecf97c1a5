//! Chain quality metrics.

use crate::error::{Error, Result};
use crate::samplers::ChainTrace;

/// Asymptotic Kolmogorov–Smirnov critical value at significance 0.01, times `sqrt(n)`.
pub const KS_CRITICAL_0_01: f64 = 1.628;

pub fn acceptance_rate(trace: &ChainTrace) -> Result<f64> {
    acceptance_rate_of(&trace.accept_flags)
}

pub fn acceptance_rate_of(flags: &[bool]) -> Result<f64> {
    if flags.is_empty() {
        return Err(Error::Domain("acceptance rate of an empty trace".into()));
    }
    Ok(flags.iter().filter(|&&a| a).count() as f64 / flags.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EssEstimate {
    pub ess: f64,
    /// Integrated autocorrelation time, at least 1.
    pub autocorrelation_time: f64,
    /// Set when the series is constant and autocorrelations are undefined.
    pub degenerate: bool,
    pub method: &'static str,
}

const IPS: &str = "initial-positive-sequence";

/// Effective sample size `n / tau` with `tau = -1 + 2 sum_m (rho_2m + rho_2m+1)`,
/// summing pairs while they stay positive (Geyer's initial positive sequence).
pub fn effective_sample_size(series: &[f64]) -> Result<EssEstimate> {
    let n = series.len();
    if n < 10 {
        return Err(Error::Domain(format!(
            "effective sample size needs at least 10 values, got {n}"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("series contains non-finite values".into()));
    }
    let degenerate = EssEstimate {
        ess: 0.0,
        autocorrelation_time: 1.0,
        degenerate: true,
        method: IPS,
    };
    if series.iter().all(|&v| v == series[0]) {
        return Ok(degenerate);
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let c0 = autocov(0);
    if c0 <= 0.0 {
        return Ok(degenerate);
    }
    let mut pair_total = 0.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        pair_total += pair;
        lag += 2;
    }
    let tau = (2.0 * pair_total - 1.0).max(1.0);
    Ok(EssEstimate {
        ess: n as f64 / tau,
        autocorrelation_time: tau,
        degenerate: false,
        method: IPS,
    })
}

/// Effective samples per Gibbs update. Normalizing against a baseline is
/// left to the caller.
pub fn efficiency(trace: &ChainTrace, series: &[f64]) -> Result<f64> {
    if trace.counters.gibbs_updates == 0 {
        return Err(Error::Domain(
            "efficiency needs a non-zero Gibbs update count".into(),
        ));
    }
    Ok(effective_sample_size(series)?.ess / trace.counters.gibbs_updates as f64)
}

/// Every `step`-th value, starting with the first.
pub fn thin(series: &[f64], step: usize) -> Vec<f64> {
    series.iter().step_by(step.max(1)).copied().collect()
}

/// Thins by the estimated integrated autocorrelation time, rounded up.
pub fn thin_by_autocorrelation(series: &[f64]) -> Result<Vec<f64>> {
    let est = effective_sample_size(series)?;
    Ok(thin(series, est.autocorrelation_time.ceil() as usize))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    /// `statistic < 1.628 / sqrt(n)`.
    pub pass_at_0_01: bool,
}

/// One-sample Kolmogorov–Smirnov test against `cdf`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let n = samples.len();
    if n < 30 {
        return Err(Error::Domain(format!(
            "KS test needs at least 30 samples, got {n}"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    Ok(KsResult {
        statistic,
        pass_at_0_01: statistic < KS_CRITICAL_0_01 / nf.sqrt(),
    })
}
