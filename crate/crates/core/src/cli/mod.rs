//! Batch runner behind the `gpsvmc` binary: `run`, `sweep`, `ed` and `sample`.

mod config;
mod sweep;
#[cfg(test)]
mod tests;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::ansatz::checkpoint::Checkpoint;
use crate::ansatz::{active_parameter_count, init_params, GpsModel, ModelSpec};
use crate::error::{Error, Result};
use crate::hamiltonians::{parse_fcidump, Hamiltonian, HeisenbergParams, HubbardParams};
use crate::hilbert::{zigzag_ordering, Configuration, Lattice, LocalSpace, SiteOrdering};
use crate::optimizer::{Sampler, TraceWriter, Vmc};
use crate::oracle::{exact_distribution, exact_ground_state, reference_energy, SectorBasis};
use crate::sampling::{direct_batch, rng_for, MetropolisConfig, MetropolisSampler};
use crate::symmetry::{c4v_z2_group, marshall_transform, GaugeConstraint, Symmetrized, SymmetryGroup};
use crate::wavefunction::{DirectSampler, Variational};

pub use config::{
    ModelConfig, OptimizerConfig, OrderingConfig, OutputConfig, RunConfig, SamplerKind, SamplingConfig, SymmetryConfig,
    SystemConfig, SystemKind,
};
pub use sweep::{parse_grid, run_sweep, run_sweep_config, GridAxis, SweepRow, SWEEP_HEADER};

/// Environment variable overriding `output.workers`.
pub const WORKERS_ENV: &str = "GPSVMC_WORKERS";

/// Hamiltonian, conserved sector and reference-table key of a config.
#[derive(Debug, Clone)]
pub struct System {
    pub hamiltonian: Hamiltonian,
    pub sector: GaugeConstraint,
    pub lattice: Lattice,
    pub key: String,
}

/// Engines that can be written to a checkpoint.
pub trait AsGps {
    fn gps(&self) -> &GpsModel;
}

impl AsGps for GpsModel {
    fn gps(&self) -> &GpsModel {
        self
    }
}

impl AsGps for Symmetrized<GpsModel> {
    fn gps(&self) -> &GpsModel {
        self.base()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub key: String,
    pub iterations: usize,
    pub n_params: usize,
    /// Mean over the last 50 iterations.
    pub final_energy: f64,
    pub reference: Option<f64>,
    pub relative_error: Option<f64>,
    pub trace: PathBuf,
    pub checkpoint: PathBuf,
}

impl RunSummary {
    pub fn line(&self) -> String {
        let mut s = format!(
            "{}: {} iterations, final energy {:.10}",
            self.key, self.iterations, self.final_energy
        );
        if let (Some(r), Some(e)) = (self.reference, self.relative_error) {
            write!(s, ", reference {r:.10}, relative error {e:.3e}").unwrap();
        }
        s
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

pub fn build_system(cfg: &RunConfig) -> Result<System> {
    let sc = &cfg.system;
    match sc.kind {
        SystemKind::Abinitio => {
            let path = cfg.resolve(sc.fcidump.as_deref().expect("validated"));
            let ints = parse_fcidump(&path)?;
            let (up, down) = ints.electrons();
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let lattice = Lattice::chain(ints.norb(), crate::hilbert::Boundary::Open)?;
            Ok(System {
                hamiltonian: Hamiltonian::AbInitio(Arc::new(ints)),
                sector: GaugeConstraint::electrons(up, down),
                lattice,
                key: format!("fcidump/{stem}"),
            })
        }
        kind => {
            let bcs = if sc.boundary.len() == 1 {
                vec![sc.boundary[0]; sc.lattice.len()]
            } else {
                sc.boundary.clone()
            };
            let lattice = Lattice::new(sc.lattice.clone(), bcs.clone())
                .map_err(|e| Error::config("system.lattice", e.to_string()))?;
            let dims = sc.lattice.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
            let bc = bcs.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",");
            let n = lattice.n_sites();
            if kind == SystemKind::Heisenberg {
                let two_sz = sc.two_sz.unwrap_or((n % 2) as i64);
                let sector = GaugeConstraint::magnetization(two_sz);
                sector
                    .check(n, LocalSpace::Spin)
                    .map_err(|e| Error::config("system.two_sz", e.to_string()))?;
                let mut h = Hamiltonian::Heisenberg(HeisenbergParams::new(sc.j, lattice.clone()));
                if cfg.symmetry.marshall {
                    h = marshall_transform(&h).map_err(|e| Error::config("symmetry.marshall", e.to_string()))?;
                }
                Ok(System {
                    hamiltonian: h,
                    sector,
                    lattice,
                    key: format!("heisenberg/{dims}/{bc}/J={}/2sz={two_sz}", fmt_num(sc.j)),
                })
            } else {
                let [up, down] = sc.electrons.unwrap_or([n / 2, n / 2]);
                let sector = GaugeConstraint::electrons(up, down);
                sector
                    .check(n, LocalSpace::Fermion)
                    .map_err(|e| Error::config("system.electrons", e.to_string()))?;
                Ok(System {
                    hamiltonian: Hamiltonian::Hubbard(HubbardParams::new(sc.t, sc.u, lattice.clone())),
                    sector,
                    lattice,
                    key: format!(
                        "hubbard/{dims}/{bc}/t={}/U={}/n={up},{down}",
                        fmt_num(sc.t),
                        fmt_num(sc.u)
                    ),
                })
            }
        }
    }
}

pub fn build_spec(cfg: &RunConfig, system: &System) -> Result<ModelSpec> {
    let local = system.hamiltonian.local_space();
    let lattice = system.lattice.clone();
    let ordering = match &cfg.model.ordering {
        OrderingConfig::Named(s) if s == "zigzag" => zigzag_ordering(&lattice)?,
        OrderingConfig::Named(s) if s == "identity" => SiteOrdering::identity(lattice.n_sites()),
        OrderingConfig::Named(s) => {
            return Err(Error::config("model.ordering", format!("unknown ordering `{s}`")));
        }
        OrderingConfig::Explicit(seq) => {
            SiteOrdering::from_sequence(seq.clone()).map_err(|e| Error::config("model.ordering", e.to_string()))?
        }
    };
    if ordering.len() != lattice.n_sites() {
        return Err(Error::config(
            "model.ordering",
            format!("expected {} sites, got {}", lattice.n_sites(), ordering.len()),
        ));
    }
    let gauge = cfg.symmetry.gauge.then_some(system.sector);
    Ok(ModelSpec::new(cfg.variant()?, local, lattice, cfg.model.support)?
        .with_dtype(cfg.model.dtype)
        .with_ordering(ordering)
        .with_gauge(gauge)
        .with_filter_range(cfg.model.filter_range))
}

pub fn build_group(cfg: &RunConfig, system: &System) -> Result<Option<SymmetryGroup>> {
    let n = system.lattice.n_sites();
    let local = system.hamiltonian.local_space();
    let field = |e: Error| Error::config("symmetry.group", e.to_string());
    match cfg.symmetry.group.as_str() {
        "none" => Ok(None),
        "z2" if local == LocalSpace::Spin => Ok(Some(SymmetryGroup::spin_flip(n))),
        "z2" => Err(Error::config("symmetry.group", "the spin flip needs a spin system")),
        _ => c4v_z2_group(&system.lattice, local).map(Some).map_err(field),
    }
}

fn build_sampler(cfg: &RunConfig, system: &System) -> Result<Sampler> {
    let n = system.lattice.n_sites();
    let local = system.hamiltonian.local_space();
    Ok(match cfg.sampling.sampler {
        SamplerKind::Direct => Sampler::Direct,
        SamplerKind::Exact => Sampler::Exact(SectorBasis::new(n, local, Some(&system.sector))?),
        SamplerKind::Metropolis => {
            let mc = MetropolisConfig {
                n_chains: cfg.sampling.n_chains,
                burn_in_fraction: cfg.sampling.burn_in_fraction,
                ..MetropolisConfig::default()
            };
            let mut rng = rng_for(cfg.sampling.seed, u64::MAX, 0);
            Sampler::Metropolis(MetropolisSampler::random_start(
                mc,
                n,
                local,
                Some(&system.sector),
                &mut rng,
            )?)
        }
    })
}

/// Runs `f` on a pool sized by `GPSVMC_WORKERS`, else `output.workers`, else
/// rayon's default.
pub fn with_workers<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let env = std::env::var(WORKERS_ENV).ok();
    let workers = match env {
        Some(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .ok_or_else(|| Error::config(WORKERS_ENV, format!("expected a positive integer, got `{v}`")))?,
        ),
        None => cfg.output.workers,
    };
    match workers {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::config("output.workers", e.to_string()))?
            .install(f),
    }
}

/// Loads the config at `path` and runs it.
pub fn run_vmc(path: impl AsRef<Path>) -> Result<RunSummary> {
    run_vmc_config(&RunConfig::load(path)?)
}

pub fn run_vmc_config(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    with_workers(cfg, || {
        let system = build_system(cfg)?;
        let spec = build_spec(cfg, &system)?;
        let model = init_params(spec, cfg.model.init_seed, cfg.model.init_scale)?;
        match build_group(cfg, &system)? {
            None => drive(cfg, system, model),
            Some(g) => drive(cfg, system, Symmetrized::new(model, g, cfg.symmetry.kind)?),
        }
    })
}

fn drive<W>(cfg: &RunConfig, system: System, model: W) -> Result<RunSummary>
where
    W: Variational + DirectSampler + AsGps,
{
    let out_dir = cfg.output_dir();
    std::fs::create_dir_all(&out_dir)?;
    let trace_path = out_dir.join(&cfg.output.trace);
    let ckpt_path = out_dir.join(&cfg.output.checkpoint);
    let sr = cfg.sr_config();
    let n_params = model.gps().n_params();
    let sampler = build_sampler(cfg, &system)?;
    let mut vmc = Vmc::new(
        model,
        system.hamiltonian,
        sampler,
        sr,
        cfg.n_samples(),
        cfg.sampling.seed,
    )?;

    let mut trace = if cfg.output.resume && ckpt_path.exists() {
        let ck = Checkpoint::load(&ckpt_path)?;
        if ck.model.spec() != vmc.model.gps().spec() {
            return Err(Error::Checkpoint("checkpoint model does not match the config".into()));
        }
        if ck.seed != cfg.sampling.seed {
            return Err(Error::Checkpoint(format!(
                "checkpoint seed {} differs from sampling.seed {}",
                ck.seed, cfg.sampling.seed
            )));
        }
        vmc.model.set_real_params(&ck.model.real_params());
        vmc.state.v = ck.sr_v;
        vmc.state.prev = ck.sr_prev;
        vmc.state.iteration = ck.iteration;
        if let Sampler::Metropolis(m) = &mut vmc.sampler {
            if !ck.chains.is_empty() {
                *m = MetropolisSampler::new(*m.config(), ck.chains)?;
            }
        }
        vmc.set_history(truncate_trace(&trace_path, ck.iteration)?);
        TraceWriter::append(&trace_path, cfg.output.timing)?
    } else {
        TraceWriter::create(&trace_path, cfg.output.timing)?
    };

    let save = |vmc: &Vmc<W>| -> Result<()> {
        let mut ck = Checkpoint::new(vmc.model.gps().clone(), cfg.sampling.seed);
        ck.iteration = vmc.state.iteration;
        ck.sr_v = vmc.state.v.clone();
        ck.sr_prev = vmc.state.prev.clone();
        if let Sampler::Metropolis(m) = &vmc.sampler {
            ck.chains = m.chains().to_vec();
        }
        ck.save(&ckpt_path)
    };

    let every = cfg.output.checkpoint_every;
    while vmc.state.iteration < sr.n_iterations {
        let t0 = Instant::now();
        let report = vmc.step()?;
        trace.write(&report, t0.elapsed().as_millis())?;
        if every > 0 && vmc.state.iteration % every == 0 {
            save(&vmc)?;
        }
    }
    save(&vmc)?;

    let final_energy = vmc.final_energy().unwrap_or(f64::NAN);
    let reference = reference_energy(&system.key);
    Ok(RunSummary {
        key: system.key,
        iterations: vmc.state.iteration,
        n_params,
        final_energy,
        reference,
        relative_error: reference.map(|r| ((final_energy - r) / r).abs()),
        trace: trace_path,
        checkpoint: ckpt_path,
    })
}

/// Keeps the trace rows of the first `iterations` steps and returns their energies.
fn truncate_trace(path: &Path, iterations: usize) -> Result<Vec<f64>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path)?;
    let mut kept = String::new();
    let mut energies = Vec::new();
    for (no, line) in text.lines().enumerate() {
        if no == 0 {
            kept.push_str(line);
            kept.push('\n');
            continue;
        }
        let mut fields = line.split(',');
        let iter: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::Checkpoint(format!("trace line {}: bad iteration", no + 1)))?;
        if iter >= iterations {
            break;
        }
        let e: f64 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::Checkpoint(format!("trace line {}: bad energy", no + 1)))?;
        energies.push(e);
        kept.push_str(line);
        kept.push('\n');
    }
    std::fs::write(path, kept)?;
    Ok(energies)
}

/// Exact ground-state energy of the configured system and sector.
#[derive(Debug, Clone, PartialEq)]
pub struct EdResult {
    pub key: String,
    pub energy: f64,
    pub sector_dim: usize,
}

impl EdResult {
    /// Row in the format of the reference fixture.
    pub fn csv_row(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record([
            self.key.clone(),
            format!("{:.12}", self.energy),
            format!("exact diagonalization, sector dimension {}", self.sector_dim),
        ])
        .expect("writing to memory");
        let bytes = w.into_inner().expect("writing to memory");
        String::from_utf8(bytes).expect("utf-8 fields").trim_end().to_string()
    }
}

pub fn ed(path: impl AsRef<Path>) -> Result<EdResult> {
    ed_config(&RunConfig::load(path)?)
}

pub fn ed_config(cfg: &RunConfig) -> Result<EdResult> {
    with_workers(cfg, || {
        let system = build_system(cfg)?;
        let gs = exact_ground_state(&system.hamiltonian, Some(&system.sector))?;
        Ok(EdResult {
            key: system.key,
            energy: gs.energy,
            sector_dim: gs.basis.len(),
        })
    })
}

/// Histogram of `n` samples of the configured model (parameters from the
/// run's checkpoint when present).
#[derive(Debug, Clone)]
pub struct Histogram {
    pub n_samples: usize,
    /// Configuration string → count, sorted by configuration.
    pub counts: BTreeMap<String, usize>,
    /// Born probabilities, when the sector is small enough to enumerate.
    pub exact: Option<BTreeMap<String, f64>>,
}

impl Histogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config,count,frequency,exact\n");
        let mut keys: Vec<&String> = self.counts.keys().collect();
        if let Some(ex) = &self.exact {
            keys = ex.keys().collect();
        }
        for k in keys {
            let c = self.counts.get(k).copied().unwrap_or(0);
            let f = c as f64 / self.n_samples as f64;
            match self.exact.as_ref().and_then(|e| e.get(k)) {
                Some(p) => writeln!(out, "{k},{c},{f},{p}").unwrap(),
                None => writeln!(out, "{k},{c},{f},").unwrap(),
            }
        }
        out
    }

    /// Total variation distance to the exact distribution.
    pub fn tv_distance(&self) -> Option<f64> {
        let ex = self.exact.as_ref()?;
        let mut tv: f64 = ex
            .iter()
            .map(|(k, p)| (self.counts.get(k).copied().unwrap_or(0) as f64 / self.n_samples as f64 - p).abs())
            .sum();
        tv += self
            .counts
            .iter()
            .filter(|(k, _)| !ex.contains_key(*k))
            .map(|(_, &c)| c as f64 / self.n_samples as f64)
            .sum::<f64>();
        Some(0.5 * tv)
    }
}

/// Sectors up to this size get exact probabilities in the histogram.
const HISTOGRAM_EXACT_LIMIT: usize = 1 << 16;

pub fn sample(path: impl AsRef<Path>, n: usize) -> Result<Histogram> {
    sample_config(&RunConfig::load(path)?, n)
}

pub fn sample_config(cfg: &RunConfig, n: usize) -> Result<Histogram> {
    if n == 0 {
        return Err(Error::config("--n", "must be positive"));
    }
    with_workers(cfg, || {
        let system = build_system(cfg)?;
        let spec = build_spec(cfg, &system)?;
        let mut model = init_params(spec, cfg.model.init_seed, cfg.model.init_scale)?;
        let ckpt = cfg.output_dir().join(&cfg.output.checkpoint);
        if ckpt.exists() {
            let ck = Checkpoint::load(&ckpt)?;
            if ck.model.spec() != model.spec() {
                return Err(Error::Checkpoint("checkpoint model does not match the config".into()));
            }
            model = ck.model;
        }
        match build_group(cfg, &system)? {
            None => histogram(cfg, &system, model, n),
            Some(g) => histogram(cfg, &system, Symmetrized::new(model, g, cfg.symmetry.kind)?, n),
        }
    })
}

fn histogram<W: Variational + DirectSampler>(
    cfg: &RunConfig,
    system: &System,
    model: W,
    n: usize,
) -> Result<Histogram> {
    let configs: Vec<Configuration> = if model.is_normalized() && cfg.sampling.sampler == SamplerKind::Direct {
        direct_batch(&model, n, cfg.sampling.seed, 0)?.configs
    } else {
        match build_sampler(
            &RunConfig {
                sampling: SamplingConfig {
                    sampler: SamplerKind::Metropolis,
                    ..cfg.sampling.clone()
                },
                ..cfg.clone()
            },
            system,
        )? {
            Sampler::Metropolis(mut m) => m.sample(&model, n, cfg.sampling.seed, 0).configs,
            _ => unreachable!(),
        }
    };
    let mut counts = BTreeMap::new();
    for x in &configs {
        *counts.entry(x.to_string()).or_insert(0) += 1;
    }
    let n_sites = system.lattice.n_sites();
    let local = system.hamiltonian.local_space();
    let small = (local.dim() as f64).powi(n_sites as i32) <= HISTOGRAM_EXACT_LIMIT as f64;
    let exact = if small {
        let basis = SectorBasis::new(n_sites, local, Some(&system.sector))?;
        let (p, _) = exact_distribution(&model, &basis);
        Some(basis.configs().iter().map(|x| x.to_string()).zip(p).collect())
    } else {
        None
    };
    Ok(Histogram {
        n_samples: configs.len(),
        counts,
        exact,
    })
}

/// Number of variational parameters of the configured model.
pub fn parameter_count(cfg: &RunConfig) -> Result<usize> {
    let system = build_system(cfg)?;
    active_parameter_count(&build_spec(cfg, &system)?)
}
