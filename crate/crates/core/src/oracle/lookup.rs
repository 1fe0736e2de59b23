use std::collections::HashMap;

use num_complex::Complex64;

use super::GroundState;
use crate::hilbert::{Configuration, LocalSpace};
use crate::wavefunction::Wavefunction;

/// Wave function given by a table of amplitudes; configurations not in the
/// table have amplitude zero.
#[derive(Debug, Clone)]
pub struct LookupModel {
    n: usize,
    local: LocalSpace,
    table: HashMap<Configuration, Complex64>,
    normalized: bool,
}

impl LookupModel {
    pub fn new(n: usize, local: LocalSpace, amplitudes: impl IntoIterator<Item = (Configuration, Complex64)>) -> Self {
        let table: HashMap<Configuration, Complex64> = amplitudes
            .into_iter()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(x, a)| (x, a.ln()))
            .collect();
        let norm: f64 = table.values().map(|l| (2.0 * l.re).exp()).sum();
        LookupModel {
            n,
            local,
            table,
            normalized: (norm - 1.0).abs() < 1e-10,
        }
    }

    pub fn from_ground_state(gs: &GroundState) -> Self {
        let n = gs.basis.configs().first().map_or(0, |c| c.len());
        Self::new(
            n,
            gs.basis.local_space(),
            gs.basis
                .configs()
                .iter()
                .cloned()
                .zip(gs.vector.iter().map(|&v| Complex64::new(v, 0.0))),
        )
    }
}

impl Wavefunction for LookupModel {
    type Cache = (Configuration, Complex64);

    fn n_sites(&self) -> usize {
        self.n
    }

    fn local_space(&self) -> LocalSpace {
        self.local
    }

    fn log_amplitude(&self, x: &Configuration) -> Complex64 {
        self.table
            .get(x)
            .copied()
            .unwrap_or(Complex64::new(f64::NEG_INFINITY, 0.0))
    }

    fn is_normalized(&self) -> bool {
        self.normalized
    }

    fn build_cache(&self, x: &Configuration) -> Self::Cache {
        (x.clone(), self.log_amplitude(x))
    }

    fn cached_log_amplitude(&self, cache: &Self::Cache) -> Complex64 {
        cache.1
    }

    fn cached_configuration<'a>(&self, cache: &'a Self::Cache) -> &'a Configuration {
        &cache.0
    }

    fn log_amplitude_after(&self, cache: &Self::Cache, changes: &[(usize, u8)]) -> Complex64 {
        self.log_amplitude(&cache.0.with_changes(changes))
    }

    fn update_cache(&self, cache: &Self::Cache, changes: &[(usize, u8)]) -> Self::Cache {
        self.build_cache(&cache.0.with_changes(changes))
    }
}
