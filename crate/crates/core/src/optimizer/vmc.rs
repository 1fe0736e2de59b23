use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{accumulate_qgt, preconditioned_cg, update_moving_average, CgResult, SrConfig, SrState, FINAL_WINDOW};
use crate::ansatz::LogDerivatives;
use crate::error::{Error, Result};
use crate::hamiltonians::{local_energy_with, Hamiltonian};
use crate::hilbert::Configuration;
use crate::oracle::{exact_distribution, SectorBasis};
use crate::sampling::{direct_batch, estimate, EstimatorStats, MetropolisSampler, Provenance, SampleBatch};
use crate::wavefunction::{DirectSampler, Variational};

pub const TRACE_HEADER: &str = "iter,energy,stderr,aux,solver_iters,wall_ms";

/// Source of the configurations of every step.
#[derive(Debug, Clone)]
pub enum Sampler {
    Direct,
    Metropolis(MetropolisSampler),
    /// Full enumeration with exact weights (noise-free gradients).
    Exact(SectorBasis),
}

#[derive(Debug, Clone)]
pub struct StepReport {
    /// Index of the completed step, starting at 0.
    pub iteration: usize,
    pub stats: EstimatorStats,
    /// Metropolis acceptance rate, or the fraction of duplicate samples for direct sampling.
    pub aux: f64,
    /// CG iterations; 0 when the system was solved directly.
    pub solver_iters: usize,
    pub solver_converged: bool,
    pub unique_samples: usize,
}

/// The whole sector weighted by the normalized Born probabilities.
pub fn exact_batch<W: Variational>(model: &W, basis: &SectorBasis) -> SampleBatch {
    let (p, _) = exact_distribution(model, basis);
    let mut configs = Vec::new();
    let mut log_amps = Vec::new();
    let mut weights = Vec::new();
    for (x, w) in basis.configs().iter().zip(p) {
        if w > 0.0 {
            log_amps.push(model.log_amplitude(x));
            configs.push(x.clone());
            weights.push(w);
        }
    }
    SampleBatch {
        configs,
        log_amps,
        weights,
        provenance: Provenance::Exact,
        acceptance: None,
    }
}

/// One parameter update from `batch`. Duplicate configurations are evaluated
/// once and enter `S` and `g` with their summed weight.
pub fn sr_update<W: Variational>(
    model: &mut W,
    batch: &SampleBatch,
    h: &Hamiltonian,
    state: &mut SrState,
    cfg: &SrConfig,
) -> Result<StepReport> {
    let n = batch.len();
    if n == 0 {
        return Err(Error::TooFewSamples(0));
    }
    let mut index: HashMap<&Configuration, usize> = HashMap::with_capacity(n);
    let mut unique: Vec<&Configuration> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut map = Vec::with_capacity(n);
    for (x, &w) in batch.configs.iter().zip(&batch.weights) {
        let id = *index.entry(x).or_insert_with(|| {
            unique.push(x);
            weights.push(0.0);
            unique.len() - 1
        });
        weights[id] += w;
        map.push(id);
    }

    let engine = &*model;
    let evals: Vec<(Complex64, LogDerivatives)> = unique
        .par_iter()
        .map_init(Vec::new, |terms, x| {
            let cache = engine.build_cache(x);
            let e = local_energy_with(engine, h, &cache, terms);
            (e, engine.log_derivatives(x))
        })
        .collect();

    let stats = match batch.provenance {
        Provenance::Exact => {
            let mean: Complex64 = evals.iter().zip(&weights).map(|((e, _), w)| w * e).sum();
            let variance = evals
                .iter()
                .zip(&weights)
                .map(|((e, _), w)| w * (e - mean).norm_sqr())
                .sum();
            EstimatorStats {
                mean,
                std_error: 0.0,
                variance,
                n_samples: n,
                autocorr_time: None,
            }
        }
        p => {
            let per_sample: Vec<Complex64> = map.iter().map(|&id| evals[id].0).collect();
            estimate(&per_sample, p)?
        }
    };
    if !stats.mean.re.is_finite() {
        return Err(Error::NonFiniteEnergy(state.iteration));
    }

    let (es, os): (Vec<Complex64>, Vec<LogDerivatives>) = evals.into_iter().unzip();
    let qgt = accumulate_qgt(&weights, &os, &es);
    let np = model.n_real_params();
    if state.v.len() != np {
        state.v = vec![0.0; np];
    }
    if state.prev.len() != np {
        state.prev = vec![0.0; np];
    }
    update_moving_average(&mut state.v, &qgt.gradient, cfg.beta);
    let op = qgt.regularized_operator(&state.v, cfg.eps_shift);
    let sol = match op.solve_direct(&qgt.gradient) {
        Some(x) => CgResult {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        },
        None => {
            let inv_diag = op.inverse_diagonal();
            preconditioned_cg(
                |x, out| op.apply(x, out),
                Some(&inv_diag),
                &qgt.gradient,
                Some(&state.prev),
                cfg.solver_tol,
                cfg.solver_max_iter,
            )?
        }
    };
    let mut theta = model.real_params();
    for (t, d) in theta.iter_mut().zip(&sol.x) {
        *t -= cfg.eta * d;
    }
    model.set_real_params(&theta);

    let aux = match batch.provenance {
        Provenance::Metropolis => batch.acceptance.unwrap_or(0.0),
        _ => 1.0 - unique.len() as f64 / n as f64,
    };
    let report = StepReport {
        iteration: state.iteration,
        stats,
        aux,
        solver_iters: sol.iterations,
        solver_converged: sol.converged,
        unique_samples: unique.len(),
    };
    state.prev = sol.x;
    state.iteration += 1;
    Ok(report)
}

/// Optimization driver holding the model, sampler and optimizer state.
pub struct Vmc<W> {
    pub model: W,
    pub hamiltonian: Hamiltonian,
    pub sampler: Sampler,
    pub cfg: SrConfig,
    pub state: SrState,
    pub n_samples: usize,
    pub seed: u64,
    energies: Vec<f64>,
}

impl<W: Variational + DirectSampler> Vmc<W> {
    pub fn new(
        model: W,
        hamiltonian: Hamiltonian,
        sampler: Sampler,
        cfg: SrConfig,
        n_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        if matches!(sampler, Sampler::Direct) && !model.is_normalized() {
            return Err(Error::Sampling("direct sampling needs a normalized model".into()));
        }
        if model.n_sites() != hamiltonian.n_sites() || model.local_space() != hamiltonian.local_space() {
            return Err(Error::Model("model and Hamiltonian act on different spaces".into()));
        }
        let state = SrState::new(model.n_real_params());
        Ok(Vmc {
            model,
            hamiltonian,
            sampler,
            cfg,
            state,
            n_samples,
            seed,
            energies: Vec::new(),
        })
    }

    /// Batch for the current iteration; the random stream is fixed by `(seed, iteration)`.
    pub fn sample(&mut self) -> Result<SampleBatch> {
        let stream = self.state.iteration as u64;
        Ok(match &mut self.sampler {
            Sampler::Direct => direct_batch(&self.model, self.n_samples, self.seed, stream)?,
            Sampler::Metropolis(m) => m.sample(&self.model, self.n_samples, self.seed, stream),
            Sampler::Exact(basis) => exact_batch(&self.model, basis),
        })
    }

    pub fn step(&mut self) -> Result<StepReport> {
        let batch = self.sample()?;
        let report = sr_update(&mut self.model, &batch, &self.hamiltonian, &mut self.state, &self.cfg)?;
        self.energies.push(report.stats.mean.re);
        Ok(report)
    }

    /// Runs `n` steps, calling `on_step` after each.
    pub fn run(&mut self, n: usize, mut on_step: impl FnMut(&StepReport) -> Result<()>) -> Result<()> {
        for _ in 0..n {
            let r = self.step()?;
            on_step(&r)?;
        }
        Ok(())
    }

    /// Energies of earlier steps, e.g. read back from a trace when resuming.
    pub fn set_history(&mut self, energies: Vec<f64>) {
        self.energies = energies;
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Mean energy over the last 50 steps (fewer if fewer were taken).
    pub fn final_energy(&self) -> Option<f64> {
        if self.energies.is_empty() {
            return None;
        }
        let tail = &self.energies[self.energies.len().saturating_sub(FINAL_WINDOW)..];
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    }
}

/// CSV trace, flushed after every row.
pub struct TraceWriter {
    out: BufWriter<File>,
    timing: bool,
}

impl TraceWriter {
    /// With `timing = false` the wall-time column is written as 0, making
    /// traces of identical runs byte-identical.
    pub fn create(path: impl AsRef<Path>, timing: bool) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{TRACE_HEADER}")?;
        out.flush()?;
        Ok(TraceWriter { out, timing })
    }

    /// Appends to an existing trace (after a resume).
    pub fn append(path: impl AsRef<Path>, timing: bool) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Self::create(path, timing);
        }
        let f = std::fs::OpenOptions::new().append(true).open(path)?;
        Ok(TraceWriter {
            out: BufWriter::new(f),
            timing,
        })
    }

    pub fn write(&mut self, r: &StepReport, wall_ms: u128) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{}",
            r.iteration,
            r.stats.mean.re,
            r.stats.std_error,
            r.aux,
            r.solver_iters,
            if self.timing { wall_ms } else { 0 }
        )?;
        self.out.flush()?;
        Ok(())
    }
}
