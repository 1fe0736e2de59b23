use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ar_combine, projective_combine, SymmetryGroup};
use crate::ansatz::LogDerivatives;
use crate::error::{Error, Result};
use crate::hilbert::{Configuration, LocalSpace};
use crate::wavefunction::{DirectSampler, Variational, Wavefunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetrizationKind {
    /// Character-weighted amplitude average.
    Projective,
    /// Separate averages of `|ψ|²` and of the phase; keeps `Σ|ψ|² = 1`.
    Normalized,
}

/// A base engine symmetrized over a group. Caches hold one base cache per
/// group element, for the image `τ(x)`.
#[derive(Debug, Clone)]
pub struct Symmetrized<W> {
    base: W,
    group: SymmetryGroup,
    kind: SymmetrizationKind,
    degenerate: Arc<AtomicU64>,
}

#[derive(Debug, Clone)]
pub struct SymmetrizedCache<C> {
    config: Configuration,
    images: Vec<C>,
    log_amp: Complex64,
}

impl<W: Wavefunction> Symmetrized<W> {
    pub fn new(base: W, group: SymmetryGroup, kind: SymmetrizationKind) -> Result<Self> {
        let n = base.n_sites();
        if group.ops().iter().any(|op| op.site_perm().len() != n) {
            return Err(Error::Symmetry("group acts on a different number of sites".into()));
        }
        if group
            .ops()
            .iter()
            .any(|op| op.local_map().len() != base.local_space().dim())
        {
            return Err(Error::Symmetry("group acts on a different local space".into()));
        }
        Ok(Symmetrized {
            base,
            group,
            kind,
            degenerate: Arc::new(AtomicU64::new(0)),
        })
    }

    pub fn base(&self) -> &W {
        &self.base
    }

    pub fn base_mut(&mut self) -> &mut W {
        &mut self.base
    }

    pub fn into_base(self) -> W {
        self.base
    }

    pub fn group(&self) -> &SymmetryGroup {
        &self.group
    }

    pub fn kind(&self) -> SymmetrizationKind {
        self.kind
    }

    /// Evaluations whose phase sum vanished so far.
    pub fn degenerate_phase_count(&self) -> u64 {
        self.degenerate.load(Ordering::Relaxed)
    }

    fn combine(&self, logs: &[Complex64]) -> Complex64 {
        match self.kind {
            SymmetrizationKind::Projective => projective_combine(logs, self.group.ops().iter().map(|o| o.character())),
            SymmetrizationKind::Normalized => {
                let r = ar_combine(logs);
                if r.degenerate {
                    self.degenerate.fetch_add(1, Ordering::Relaxed);
                }
                r.log_amp
            }
        }
    }

    fn mapped(&self, k: usize, changes: &[(usize, u8)]) -> Vec<(usize, u8)> {
        let op = &self.group.ops()[k];
        changes.iter().map(|&c| op.map_change(c)).collect()
    }
}

impl<W: Wavefunction> Wavefunction for Symmetrized<W> {
    type Cache = SymmetrizedCache<W::Cache>;

    fn n_sites(&self) -> usize {
        self.base.n_sites()
    }

    fn local_space(&self) -> LocalSpace {
        self.base.local_space()
    }

    fn log_amplitude(&self, x: &Configuration) -> Complex64 {
        let logs: Vec<Complex64> = self
            .group
            .ops()
            .iter()
            .map(|op| self.base.log_amplitude(&op.apply(x)))
            .collect();
        self.combine(&logs)
    }

    fn is_normalized(&self) -> bool {
        self.kind == SymmetrizationKind::Normalized && self.base.is_normalized()
    }

    fn build_cache(&self, x: &Configuration) -> Self::Cache {
        let images: Vec<W::Cache> = self
            .group
            .ops()
            .iter()
            .map(|op| self.base.build_cache(&op.apply(x)))
            .collect();
        let logs: Vec<Complex64> = images.iter().map(|c| self.base.cached_log_amplitude(c)).collect();
        SymmetrizedCache {
            config: x.clone(),
            images,
            log_amp: self.combine(&logs),
        }
    }

    fn cached_log_amplitude(&self, cache: &Self::Cache) -> Complex64 {
        cache.log_amp
    }

    fn cached_configuration<'a>(&self, cache: &'a Self::Cache) -> &'a Configuration {
        &cache.config
    }

    fn log_amplitude_after(&self, cache: &Self::Cache, changes: &[(usize, u8)]) -> Complex64 {
        let logs: Vec<Complex64> = cache
            .images
            .iter()
            .enumerate()
            .map(|(k, c)| self.base.log_amplitude_after(c, &self.mapped(k, changes)))
            .collect();
        self.combine(&logs)
    }

    fn update_cache(&self, cache: &Self::Cache, changes: &[(usize, u8)]) -> Self::Cache {
        let images: Vec<W::Cache> = cache
            .images
            .iter()
            .enumerate()
            .map(|(k, c)| self.base.update_cache(c, &self.mapped(k, changes)))
            .collect();
        let logs: Vec<Complex64> = images.iter().map(|c| self.base.cached_log_amplitude(c)).collect();
        SymmetrizedCache {
            config: cache.config.with_changes(changes),
            images,
            log_amp: self.combine(&logs),
        }
    }
}

impl<W: Variational> Variational for Symmetrized<W> {
    fn n_real_params(&self) -> usize {
        self.base.n_real_params()
    }

    fn real_params(&self) -> Vec<f64> {
        self.base.real_params()
    }

    fn set_real_params(&mut self, theta: &[f64]) {
        self.base.set_real_params(theta)
    }

    fn is_complex(&self) -> bool {
        self.base.is_complex()
    }

    /// Projective: `Σ_τ χ_τ ψ_τ O_τ / Σ_τ χ_τ ψ_τ`. Normalized: the modulus
    /// part is the `|ψ_τ|²`-weighted mean of `Re O_τ`, the phase part is
    /// `Re(Σ_τ e^{iφ_τ} Im O_τ / Σ_τ e^{iφ_τ})`.
    fn log_derivatives(&self, x: &Configuration) -> LogDerivatives {
        let ops = self.group.ops();
        let images: Vec<Configuration> = ops.iter().map(|op| op.apply(x)).collect();
        let logs: Vec<Complex64> = images.iter().map(|y| self.base.log_amplitude(y)).collect();
        let ders: Vec<LogDerivatives> = images.iter().map(|y| self.base.log_derivatives(y)).collect();
        let p = self.base.n_real_params();
        let max = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let real_base = matches!(ders.first(), Some(LogDerivatives::Real(_)));

        let mut out = vec![Complex64::new(0.0, 0.0); p];
        match self.kind {
            SymmetrizationKind::Projective => {
                let w: Vec<Complex64> = logs
                    .iter()
                    .zip(ops)
                    .map(|(l, op)| op.character() * (l - max).exp())
                    .collect();
                let total: Complex64 = w.iter().sum();
                for (wt, d) in w.iter().zip(&ders) {
                    let f = wt / total;
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += f * d.get(k);
                    }
                }
            }
            SymmetrizationKind::Normalized => {
                let prob: Vec<f64> = logs.iter().map(|l| (2.0 * (l.re - max)).exp()).collect();
                let ptot: f64 = prob.iter().sum();
                let phases: Vec<Complex64> = logs
                    .iter()
                    .map(|l| {
                        if l.re > f64::NEG_INFINITY {
                            Complex64::from_polar(1.0, l.im)
                        } else {
                            0.0.into()
                        }
                    })
                    .collect();
                let z: Complex64 = phases.iter().sum();
                let degenerate = z.norm() < super::DEGENERATE_PHASE_TOL;
                for t in 0..ops.len() {
                    let a = prob[t] / ptot;
                    let b = if degenerate {
                        Complex64::new(0.0, 0.0)
                    } else {
                        phases[t] / z
                    };
                    for (k, o) in out.iter_mut().enumerate() {
                        let d = ders[t].get(k);
                        o.re += a * d.re;
                        o.im += b.re * d.im;
                    }
                }
            }
        }
        if real_base {
            LogDerivatives::Real(out.iter().map(|z| z.re).collect())
        } else {
            LogDerivatives::Complex(out)
        }
    }
}

impl<W: DirectSampler> DirectSampler for Symmetrized<W> {
    fn sample_direct<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Configuration, Complex64)> {
        if self.kind != SymmetrizationKind::Normalized {
            return Err(Error::Sampling(
                "projective symmetrization breaks normalization; direct sampling is undefined".into(),
            ));
        }
        let (x, _) = self.base.sample_direct(rng)?;
        let y = self.group.random_image(&x, rng);
        let l = self.log_amplitude(&y);
        Ok((y, l))
    }
}
