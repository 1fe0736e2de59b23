use num_complex::Complex64;

use super::Provenance;
use crate::error::{Error, Result};

/// Binning stops once fewer bins than this remain.
const MIN_BINS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorStats {
    pub mean: Complex64,
    /// Standard error of the real part of the mean.
    pub std_error: f64,
    /// Sample variance of the real parts.
    pub variance: f64,
    pub n_samples: usize,
    /// Integrated autocorrelation time `1 + 2 Σ_t ρ(t)`; Metropolis only.
    pub autocorr_time: Option<f64>,
}

/// Mean and error bar of equally weighted `values`. Direct samples use the
/// i.i.d. formula, Metropolis samples a binning analysis with doubling bin
/// sizes. Exact batches carry non-uniform weights and are summarized by the
/// optimizer instead; here they are treated like direct samples.
pub fn estimate(values: &[Complex64], provenance: Provenance) -> Result<EstimatorStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let mean: Complex64 = values.iter().sum::<Complex64>() / n as f64;
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let variance = sample_variance(&re);
    let naive = (variance / n as f64).sqrt();
    match provenance {
        Provenance::Direct | Provenance::Exact => Ok(EstimatorStats {
            mean,
            std_error: naive,
            variance,
            n_samples: n,
            autocorr_time: None,
        }),
        Provenance::Metropolis => Ok(EstimatorStats {
            mean,
            std_error: binning_error(&re).max(naive),
            variance,
            n_samples: n,
            autocorr_time: Some(integrated_autocorr_time(&re)),
        }),
    }
}

fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
}

/// Largest standard error over bin sizes `1, 2, 4, …` that leave at least
/// `MIN_BINS` bins.
fn binning_error(v: &[f64]) -> f64 {
    let mut level: Vec<f64> = v.to_vec();
    let mut best = 0.0f64;
    while level.len() >= MIN_BINS {
        let err = (sample_variance(&level) / level.len() as f64).sqrt();
        best = best.max(err);
        level = level.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect();
    }
    if best == 0.0 && v.len() >= 2 {
        best = (sample_variance(v) / v.len() as f64).sqrt();
    }
    best
}

/// `τ = 1 + 2 Σ_{t=1}^{W} ρ(t)` with the self-consistent window `W ≥ 6τ`.
pub fn integrated_autocorr_time(v: &[f64]) -> f64 {
    let n = v.len();
    let m = v.iter().sum::<f64>() / n as f64;
    let c0 = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for t in 1..n / 2 {
        let ct = v[..n - t]
            .iter()
            .zip(&v[t..])
            .map(|(a, b)| (a - m) * (b - m))
            .sum::<f64>()
            / n as f64;
        tau += 2.0 * ct / c0;
        if t as f64 >= 6.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}
