use num_complex::Complex64;
use thiserror::Error;

use super::{GpsModel, Layout, Params, NO_SLOT, SELF_SLOT};
use crate::hilbert::Configuration;
use crate::scalar::Scalar;

/// The cached product for a changed site contains a zero entry, so the
/// update ratio is undefined. Callers rebuild the cache instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("zero-valued cached factor; rebuild the cache")]
pub struct FastUpdateError;

#[derive(Debug, Clone)]
pub(crate) struct Tables<T> {
    /// `partial[c·M + m]`: product of the non-self factors of correlator `c`.
    pub partial: Vec<T>,
    pub contrib: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub(crate) enum CacheData {
    Real(Tables<f64>),
    Complex(Tables<Complex64>),
}

/// Intermediate products of one configuration, allowing `O(N·M·K)`
/// evaluation of configurations that differ in `K` sites.
#[derive(Debug, Clone)]
pub struct AmplitudeCache {
    config: Configuration,
    xp: Vec<u8>,
    data: CacheData,
    log_amp: Complex64,
}

impl AmplitudeCache {
    pub fn configuration(&self) -> &Configuration {
        &self.config
    }

    pub fn log_amplitude(&self) -> Complex64 {
        self.log_amp
    }

    /// Full product `Π_j ε[·, m, x_j]` of correlator `c` including its own factor.
    pub fn product(&self, model: &GpsModel, c: usize, m: usize) -> Complex64 {
        let lay = model.layout();
        let part = match &self.data {
            CacheData::Real(t) => Complex64::new(t.partial[c * lay.m + m], 0.0),
            CacheData::Complex(t) => t.partial[c * lay.m + m],
        };
        if lay.self_block[c] == NO_SLOT {
            part
        } else {
            let k = (lay.self_block[c] as usize * lay.m + m) * lay.d + self.xp[c] as usize;
            part * model.params().get(k)
        }
    }
}

trait TableAccess<T> {
    fn tables(data: &CacheData) -> &Tables<T>;
    fn wrap(t: Tables<T>) -> CacheData;
}

impl TableAccess<f64> for f64 {
    fn tables(data: &CacheData) -> &Tables<f64> {
        match data {
            CacheData::Real(t) => t,
            CacheData::Complex(_) => panic!("cache dtype mismatch"),
        }
    }
    fn wrap(t: Tables<f64>) -> CacheData {
        CacheData::Real(t)
    }
}

impl TableAccess<Complex64> for Complex64 {
    fn tables(data: &CacheData) -> &Tables<Complex64> {
        match data {
            CacheData::Complex(t) => t,
            CacheData::Real(_) => panic!("cache dtype mismatch"),
        }
    }
    fn wrap(t: Tables<Complex64>) -> CacheData {
        CacheData::Complex(t)
    }
}

impl GpsModel {
    pub fn build_cache(&self, x: &Configuration) -> AmplitudeCache {
        self.check_config(x);
        let xp = self.position_states(x);
        let (data, log_amp) = match &self.params {
            Params::Real(p) => {
                let (t, l) = self.build_tables(p, &xp);
                (CacheData::Real(t), l)
            }
            Params::Complex(p) => {
                let (t, l) = self.build_tables(p, &xp);
                (CacheData::Complex(t), l)
            }
        };
        AmplitudeCache {
            config: x.clone(),
            xp,
            data,
            log_amp,
        }
    }

    fn build_tables<T: Scalar>(&self, eps: &[T], xp: &[u8]) -> (Tables<T>, Complex64) {
        let lay = self.layout();
        let mut partial = vec![T::zero(); lay.n_corr * lay.m];
        let mut contrib = Vec::with_capacity(lay.n_corr);
        let mut counts = (0, 0);
        let mut total = Complex64::new(0.0, 0.0);
        for c in 0..lay.n_corr {
            let part = &mut partial[c * lay.m..(c + 1) * lay.m];
            lay.partial(eps, xp, c, part);
            let xs = if lay.has_self() { xp[c] } else { 0 };
            let (z, _) = lay.contribution(eps, c, part, xs, &self.allowed(c, counts));
            contrib.push(z);
            total += z;
            if lay.has_self() {
                counts = self.add_counts(counts, xp[c]);
            }
        }
        (Tables { partial, contrib }, total)
    }

    /// `log ψ(x')` where `x'` is the cached configuration with `changes`
    /// `(site, new_state)` applied. The cache is left untouched.
    pub fn log_amplitude_after(
        &self,
        cache: &AmplitudeCache,
        changes: &[(usize, u8)],
    ) -> Result<Complex64, FastUpdateError> {
        if changes.is_empty() {
            return Ok(cache.log_amp);
        }
        match &self.params {
            Params::Real(eps) => self.update_generic(eps, f64::tables(&cache.data), &cache.xp, changes, None),
            Params::Complex(eps) => self.update_generic(eps, Complex64::tables(&cache.data), &cache.xp, changes, None),
        }
    }

    /// New log-amplitude and the cache of the updated configuration.
    pub fn fast_update(
        &self,
        cache: &AmplitudeCache,
        changes: &[(usize, u8)],
    ) -> Result<(Complex64, AmplitudeCache), FastUpdateError> {
        if changes.is_empty() {
            return Ok((cache.log_amp, cache.clone()));
        }
        let mut xp = cache.xp.clone();
        for &(site, s) in changes {
            xp[self.ordering().position(site)] = s;
        }
        let (log_amp, data) = match &self.params {
            Params::Real(eps) => {
                let t = f64::tables(&cache.data);
                let mut out = t.clone();
                let l = self.update_generic(eps, t, &cache.xp, changes, Some(&mut out))?;
                (l, f64::wrap(out))
            }
            Params::Complex(eps) => {
                let t = Complex64::tables(&cache.data);
                let mut out = t.clone();
                let l = self.update_generic(eps, t, &cache.xp, changes, Some(&mut out))?;
                (l, Complex64::wrap(out))
            }
        };
        Ok((
            log_amp,
            AmplitudeCache {
                config: cache.config.with_changes(changes),
                xp,
                data,
                log_amp,
            },
        ))
    }

    fn update_generic<T: Scalar>(
        &self,
        eps: &[T],
        tables: &Tables<T>,
        xp_old: &[u8],
        changes: &[(usize, u8)],
        mut store: Option<&mut Tables<T>>,
    ) -> Result<Complex64, FastUpdateError> {
        let lay: &Layout = self.layout();
        let (m, d, n) = (lay.m, lay.d, lay.n);
        let mut pos_changes = [(0usize, 0u8, 0u8); 8];
        let k = changes.len();
        assert!(k <= pos_changes.len(), "at most 8 simultaneous changes supported");
        for (slot, &(site, s)) in pos_changes.iter_mut().zip(changes) {
            let p = self.ordering().position(site);
            *slot = (p, xp_old[p], s);
        }
        let pos_changes = &pos_changes[..k];
        let state_at = |p: usize| pos_changes.iter().find(|c| c.0 == p).map(|c| c.2).unwrap_or(xp_old[p]);
        let first = if lay.masked {
            pos_changes.iter().map(|c| c.0).min().unwrap()
        } else {
            0
        };
        let gauged = lay.normalized && self.gauge().is_some();

        let mut counts = (0, 0);
        let mut total = Complex64::new(0.0, 0.0);
        for c in 0..first {
            total += tables.contrib[c];
            if gauged {
                counts = self.add_counts(counts, xp_old[c]);
            }
        }

        let mut scratch = if store.is_some() {
            Vec::new()
        } else {
            vec![T::zero(); m]
        };
        for c in first..lay.n_corr {
            let row = &lay.slot[c * n..(c + 1) * n];
            let touched = pos_changes.iter().any(|ch| row[ch.0] != NO_SLOT);
            let xs = if lay.has_self() { state_at(c) } else { 0 };
            let z = if touched || gauged {
                let old_part = &tables.partial[c * m..(c + 1) * m];
                let part: &mut [T] = match store.as_deref_mut() {
                    Some(out) => &mut out.partial[c * m..(c + 1) * m],
                    None => {
                        scratch.copy_from_slice(old_part);
                        &mut scratch
                    }
                };
                for &(p, old, new) in pos_changes {
                    let f = row[p];
                    if f == NO_SLOT || f == SELF_SLOT {
                        continue;
                    }
                    let block = &eps[lay.fblock[f as usize] as usize * m * d..][..m * d];
                    for (v, e) in part.iter_mut().zip(block.chunks_exact(d)) {
                        let o = e[old as usize];
                        if o.is_zero() {
                            return Err(FastUpdateError);
                        }
                        *v = *v * e[new as usize] / o;
                    }
                }
                let allowed = self.allowed(c, counts);
                lay.contribution(eps, c, part, xs, &allowed).0
            } else {
                tables.contrib[c]
            };
            total += z;
            if let Some(out) = store.as_deref_mut() {
                out.contrib[c] = z;
            }
            if gauged {
                counts = self.add_counts(counts, xs);
            }
        }
        Ok(total)
    }
}
