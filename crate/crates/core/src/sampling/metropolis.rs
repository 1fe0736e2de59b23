use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rng_for, Provenance, SampleBatch};
use crate::error::{Error, Result};
use crate::hilbert::{Configuration, LocalSpace, DOUBLE, EMPTY};
use crate::symmetry::GaugeConstraint;
use crate::wavefunction::Wavefunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetropolisConfig {
    pub n_chains: usize,
    /// Fraction of sweeps discarded at the start of every batch.
    pub burn_in_fraction: f64,
    /// Fermionic systems: probability of proposing a doubly-occupied/empty swap
    /// instead of a single-electron hop.
    pub pair_swap_probability: f64,
}

impl Default for MetropolisConfig {
    fn default() -> Self {
        MetropolisConfig {
            n_chains: 16,
            burn_in_fraction: 0.1,
            pair_swap_probability: 0.1,
        }
    }
}

/// Exchange-move Metropolis sampler with persistent chains.
#[derive(Debug, Clone)]
pub struct MetropolisSampler {
    cfg: MetropolisConfig,
    chains: Vec<Configuration>,
}

impl MetropolisSampler {
    pub fn new(cfg: MetropolisConfig, chains: Vec<Configuration>) -> Result<Self> {
        if chains.is_empty() || chains.len() != cfg.n_chains {
            return Err(Error::Sampling(format!(
                "expected {} initial chain states, got {}",
                cfg.n_chains,
                chains.len()
            )));
        }
        if !(0.0..1.0).contains(&cfg.burn_in_fraction) || !(0.0..=1.0).contains(&cfg.pair_swap_probability) {
            return Err(Error::Sampling(
                "burn-in and pair-swap fractions must lie in [0, 1)".into(),
            ));
        }
        Ok(MetropolisSampler { cfg, chains })
    }

    /// Chains started from uniformly random configurations of the constrained sector.
    pub fn random_start<R: Rng + ?Sized>(
        cfg: MetropolisConfig,
        n: usize,
        local: LocalSpace,
        gauge: Option<&GaugeConstraint>,
        rng: &mut R,
    ) -> Result<Self> {
        let chains = (0..cfg.n_chains)
            .map(|_| random_sector_config(n, local, gauge, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cfg, chains)
    }

    pub fn chains(&self) -> &[Configuration] {
        &self.chains
    }

    pub fn config(&self) -> &MetropolisConfig {
        &self.cfg
    }

    /// At least `n_samples` samples (rounded up to a multiple of the chain
    /// count), one per sweep of `N` proposals. Chains continue from their
    /// last state; deterministic in `(seed, stream)`.
    pub fn sample<W: Wavefunction>(&mut self, model: &W, n_samples: usize, seed: u64, stream: u64) -> SampleBatch {
        let n_chains = self.chains.len();
        let per_chain = n_samples.div_ceil(n_chains).max(1);
        let burn = (self.cfg.burn_in_fraction * per_chain as f64).ceil() as usize;
        let cfg = self.cfg;
        let results: Vec<(Vec<Configuration>, Vec<Complex64>, usize, usize)> = self
            .chains
            .par_iter()
            .enumerate()
            .map(|(c, start)| {
                let mut rng = rng_for(seed, stream, c as u64);
                run_chain(model, &cfg, start.clone(), burn, per_chain, &mut rng)
            })
            .collect();
        let mut configs = Vec::with_capacity(per_chain * n_chains);
        let mut log_amps = Vec::with_capacity(per_chain * n_chains);
        let (mut acc, mut tot) = (0usize, 0usize);
        for (c, (xs, ls, a, t)) in results.into_iter().enumerate() {
            self.chains[c] = xs.last().cloned().unwrap_or_else(|| self.chains[c].clone());
            configs.extend(xs);
            log_amps.extend(ls);
            acc += a;
            tot += t;
        }
        let n = configs.len();
        SampleBatch {
            configs,
            log_amps,
            weights: vec![1.0 / n as f64; n],
            provenance: Provenance::Metropolis,
            acceptance: Some(if tot == 0 { 0.0 } else { acc as f64 / tot as f64 }),
        }
    }
}

fn run_chain<W: Wavefunction, R: Rng + ?Sized>(
    model: &W,
    cfg: &MetropolisConfig,
    start: Configuration,
    burn: usize,
    keep: usize,
    rng: &mut R,
) -> (Vec<Configuration>, Vec<Complex64>, usize, usize) {
    let n = model.n_sites();
    let local = model.local_space();
    let mut cache = model.build_cache(&start);
    let mut xs = Vec::with_capacity(keep);
    let mut ls = Vec::with_capacity(keep);
    let (mut accepted, mut proposed) = (0, 0);
    for sweep in 0..burn + keep {
        for _ in 0..n {
            let x = model.cached_configuration(&cache);
            let Some(changes) = propose(x, local, cfg, rng) else {
                proposed += 1;
                continue;
            };
            proposed += 1;
            let l_old = model.cached_log_amplitude(&cache);
            let l_new = model.log_amplitude_after(&cache, &changes);
            let ratio = (2.0 * (l_new.re - l_old.re)).exp();
            if ratio >= 1.0 || rng.gen::<f64>() < ratio {
                cache = model.update_cache(&cache, &changes);
                accepted += 1;
            }
        }
        if sweep >= burn {
            xs.push(model.cached_configuration(&cache).clone());
            ls.push(model.cached_log_amplitude(&cache));
        }
    }
    (xs, ls, accepted, proposed)
}

/// Sector-preserving symmetric proposal; `None` is an automatic rejection.
fn propose<R: Rng + ?Sized>(
    x: &Configuration,
    local: LocalSpace,
    cfg: &MetropolisConfig,
    rng: &mut R,
) -> Option<[(usize, u8); 2]> {
    let s = x.as_slice();
    let n = s.len();
    match local {
        LocalSpace::Spin => {
            let ups = s.iter().filter(|&&v| v == 1).count();
            if ups == 0 || ups == n {
                return None;
            }
            let i = nth_matching(s, rng.gen_range(0..ups), |v| v == 1);
            let j = nth_matching(s, rng.gen_range(0..n - ups), |v| v == 0);
            Some([(i, 0), (j, 1)])
        }
        LocalSpace::Fermion => {
            if rng.gen::<f64>() < cfg.pair_swap_probability {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                let pair = (s[i], s[j]);
                if i != j && (pair == (DOUBLE, EMPTY) || pair == (EMPTY, DOUBLE)) {
                    return Some([(i, s[j]), (j, s[i])]);
                }
                return None;
            }
            let bit: u8 = if rng.gen::<bool>() { 1 } else { 2 };
            let occ = s.iter().filter(|&&v| v & bit != 0).count();
            if occ == 0 || occ == n {
                return None;
            }
            let i = nth_matching(s, rng.gen_range(0..occ), |v| v & bit != 0);
            let j = nth_matching(s, rng.gen_range(0..n - occ), |v| v & bit == 0);
            Some([(i, s[i] ^ bit), (j, s[j] ^ bit)])
        }
    }
}

fn nth_matching(s: &[u8], k: usize, pred: impl Fn(u8) -> bool) -> usize {
    s.iter()
        .enumerate()
        .filter(|(_, &v)| pred(v))
        .nth(k)
        .map(|(i, _)| i)
        .expect("k is below the match count")
}

/// Uniformly random configuration satisfying `gauge` (any configuration if `None`).
pub(crate) fn random_sector_config<R: Rng + ?Sized>(
    n: usize,
    local: LocalSpace,
    gauge: Option<&GaugeConstraint>,
    rng: &mut R,
) -> Result<Configuration> {
    let Some(g) = gauge else {
        let v = (0..n).map(|_| rng.gen_range(0..local.dim() as u8)).collect();
        return Ok(Configuration::from_vec_unchecked(v));
    };
    g.check(n, local)?;
    let (up, down) = g.targets(n)?;
    let place = |k: usize, rng: &mut R| {
        let mut v: Vec<bool> = (0..n).map(|i| i < k).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            v.swap(i, j);
        }
        v
    };
    let states = match local {
        LocalSpace::Spin => place(up, rng).into_iter().map(u8::from).collect(),
        LocalSpace::Fermion => {
            let a = place(up, rng);
            let b = place(down, rng);
            a.iter()
                .zip(&b)
                .map(|(&u, &d)| u8::from(u) | (u8::from(d) << 1))
                .collect()
        }
    };
    Ok(Configuration::from_vec_unchecked(states))
}
