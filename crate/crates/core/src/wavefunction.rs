//! Interfaces shared by every amplitude engine: GPS models, symmetrized
//! wrappers and exact lookup tables.

use num_complex::Complex64;
use rand::Rng;

use crate::ansatz::{AmplitudeCache, GpsModel, LogDerivatives};
use crate::error::{Error, Result};
use crate::hilbert::{Configuration, LocalSpace};

pub trait Wavefunction: Send + Sync {
    type Cache: Clone + Send + Sync;

    fn n_sites(&self) -> usize;
    fn local_space(&self) -> LocalSpace;
    fn log_amplitude(&self, x: &Configuration) -> Complex64;
    /// `Σ_x |ψ(x)|² = 1` holds by construction.
    fn is_normalized(&self) -> bool;

    fn build_cache(&self, x: &Configuration) -> Self::Cache;
    fn cached_log_amplitude(&self, cache: &Self::Cache) -> Complex64;
    fn cached_configuration<'a>(&self, cache: &'a Self::Cache) -> &'a Configuration;
    /// `log ψ` of the cached configuration with `changes` applied.
    fn log_amplitude_after(&self, cache: &Self::Cache, changes: &[(usize, u8)]) -> Complex64;
    /// Cache of the cached configuration with `changes` applied.
    fn update_cache(&self, cache: &Self::Cache, changes: &[(usize, u8)]) -> Self::Cache;
}

/// Engines with real optimization parameters.
pub trait Variational: Wavefunction {
    fn n_real_params(&self) -> usize;
    fn real_params(&self) -> Vec<f64>;
    fn set_real_params(&mut self, theta: &[f64]);
    /// Parameters are complex numbers split into `(re, im)` pairs.
    fn is_complex(&self) -> bool;
    fn log_derivatives(&self, x: &Configuration) -> LogDerivatives;
}

/// Engines that draw exact, independent samples from `|ψ|²`.
pub trait DirectSampler: Wavefunction {
    /// A configuration and its log-amplitude.
    fn sample_direct<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Configuration, Complex64)>;
}

impl Wavefunction for GpsModel {
    type Cache = AmplitudeCache;

    fn n_sites(&self) -> usize {
        GpsModel::n_sites(self)
    }

    fn local_space(&self) -> LocalSpace {
        GpsModel::local_space(self)
    }

    fn log_amplitude(&self, x: &Configuration) -> Complex64 {
        GpsModel::log_amplitude(self, x)
    }

    fn is_normalized(&self) -> bool {
        self.variant().normalized()
    }

    fn build_cache(&self, x: &Configuration) -> AmplitudeCache {
        GpsModel::build_cache(self, x)
    }

    fn cached_log_amplitude(&self, cache: &AmplitudeCache) -> Complex64 {
        cache.log_amplitude()
    }

    fn cached_configuration<'a>(&self, cache: &'a AmplitudeCache) -> &'a Configuration {
        cache.configuration()
    }

    fn log_amplitude_after(&self, cache: &AmplitudeCache, changes: &[(usize, u8)]) -> Complex64 {
        GpsModel::log_amplitude_after(self, cache, changes)
            .unwrap_or_else(|_| GpsModel::log_amplitude(self, &cache.configuration().with_changes(changes)))
    }

    fn update_cache(&self, cache: &AmplitudeCache, changes: &[(usize, u8)]) -> AmplitudeCache {
        match self.fast_update(cache, changes) {
            Ok((_, c)) => c,
            Err(_) => GpsModel::build_cache(self, &cache.configuration().with_changes(changes)),
        }
    }
}

impl Variational for GpsModel {
    fn n_real_params(&self) -> usize {
        GpsModel::n_real_params(self)
    }

    fn real_params(&self) -> Vec<f64> {
        GpsModel::real_params(self)
    }

    fn set_real_params(&mut self, theta: &[f64]) {
        GpsModel::set_real_params(self, theta)
    }

    fn is_complex(&self) -> bool {
        self.dtype() == crate::ansatz::Dtype::Complex
    }

    fn log_derivatives(&self, x: &Configuration) -> LogDerivatives {
        GpsModel::log_derivatives(self, x)
    }
}

impl DirectSampler for GpsModel {
    fn sample_direct<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Configuration, Complex64)> {
        if !self.variant().normalized() {
            return Err(Error::Sampling(format!(
                "direct sampling needs an autoregressive variant, got {}",
                self.variant()
            )));
        }
        Ok(self.sample_autoregressive(rng))
    }
}
