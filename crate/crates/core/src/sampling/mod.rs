//! Direct autoregressive sampling, Metropolis exchange sampling and estimators.

mod metropolis;
mod stats;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hilbert::Configuration;
use crate::wavefunction::DirectSampler;

pub use metropolis::{MetropolisConfig, MetropolisSampler};
pub use stats::{estimate, integrated_autocorr_time, EstimatorStats};

/// Samples drawn per parallel work unit of [`direct_batch`]. Fixed so results
/// do not depend on the number of workers.
pub const DIRECT_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Direct,
    Metropolis,
    /// Whole sector with exact Born weights.
    Exact,
}

#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub configs: Vec<Configuration>,
    pub log_amps: Vec<Complex64>,
    /// Normalized sample weights: uniform for the samplers, `|ψ(x)|²` for exact batches.
    pub weights: Vec<f64>,
    pub provenance: Provenance,
    /// Mean Metropolis acceptance rate.
    pub acceptance: Option<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
}

/// Independent generator for the work unit `(a, b)` of a run seeded with `seed`.
pub fn rng_for(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&a.to_le_bytes());
    key[16..24].copy_from_slice(&b.to_le_bytes());
    key[24..].copy_from_slice(b"gpsvmc\0\0");
    ChaCha8Rng::from_seed(key)
}

/// One direct sample.
pub fn direct_sample<W: DirectSampler, R: rand::Rng + ?Sized>(model: &W, rng: &mut R) -> Result<Configuration> {
    Ok(model.sample_direct(rng)?.0)
}

/// `n` i.i.d. samples; deterministic in `(seed, stream)`.
pub fn direct_batch<W: DirectSampler>(model: &W, n: usize, seed: u64, stream: u64) -> Result<SampleBatch> {
    let chunks = n.div_ceil(DIRECT_CHUNK);
    let parts: Vec<Result<Vec<(Configuration, Complex64)>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, stream, c as u64);
            let len = DIRECT_CHUNK.min(n - c * DIRECT_CHUNK);
            (0..len).map(|_| model.sample_direct(&mut rng)).collect()
        })
        .collect();
    let mut configs = Vec::with_capacity(n);
    let mut log_amps = Vec::with_capacity(n);
    for part in parts {
        for (x, l) in part? {
            configs.push(x);
            log_amps.push(l);
        }
    }
    Ok(SampleBatch {
        configs,
        log_amps,
        weights: vec![1.0 / n as f64; n],
        provenance: Provenance::Direct,
        acceptance: None,
    })
}
