use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::{Dtype, GpsVariant};
use crate::error::{Error, Result};
use crate::hilbert::Boundary;
use crate::optimizer::SrConfig;
use crate::symmetry::SymmetrizationKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Heisenberg,
    Hubbard,
    Abinitio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub kind: SystemKind,
    /// Sites per axis; ignored for `abinitio`.
    #[serde(default)]
    pub lattice: Vec<usize>,
    /// One entry per axis, or a single entry applied to all axes.
    #[serde(default = "default_boundary")]
    pub boundary: Vec<Boundary>,
    #[serde(default = "one")]
    pub j: f64,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default)]
    pub u: f64,
    /// `[N↑, N↓]` for Hubbard; half filling by default.
    pub electrons: Option<[usize; 2]>,
    /// `2·S_z` sector for Heisenberg; 0 (or 1 for odd N) by default.
    pub two_sz: Option<i64>,
    /// Integral file for `abinitio`, relative to the config file.
    pub fcidump: Option<PathBuf>,
}

fn default_boundary() -> Vec<Boundary> {
    vec![Boundary::Periodic]
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderingConfig {
    /// `"zigzag"`
    Named(String),
    /// Sites in visiting order.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub variant: String,
    pub support: usize,
    #[serde(default = "default_dtype")]
    pub dtype: Dtype,
    #[serde(default = "default_ordering")]
    pub ordering: OrderingConfig,
    #[serde(default = "default_init_seed")]
    pub init_seed: u64,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    pub filter_range: Option<f64>,
}

fn default_dtype() -> Dtype {
    Dtype::Real
}

fn default_ordering() -> OrderingConfig {
    OrderingConfig::Named("zigzag".into())
}

fn default_init_seed() -> u64 {
    1
}

fn default_init_scale() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryConfig {
    /// `none`, `z2` or `c4v-z2`.
    #[serde(default = "default_group")]
    pub group: String,
    #[serde(default = "default_sym_kind")]
    pub kind: SymmetrizationKind,
    /// Enforce the particle-number / magnetization sector in the conditionals.
    #[serde(default = "yes")]
    pub gauge: bool,
    #[serde(default)]
    pub marshall: bool,
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        SymmetryConfig {
            group: default_group(),
            kind: default_sym_kind(),
            gauge: true,
            marshall: false,
        }
    }
}

fn default_group() -> String {
    "none".into()
}

fn default_sym_kind() -> SymmetrizationKind {
    SymmetrizationKind::Normalized
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Direct,
    Metropolis,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    #[serde(default = "default_sampler")]
    pub sampler: SamplerKind,
    /// Defaults: 4096 (lattice), 1024 (symmetrized lattice), 5000 (*ab initio*).
    pub n_samples: Option<usize>,
    #[serde(default = "default_chains")]
    pub n_chains: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in_fraction: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            sampler: default_sampler(),
            n_samples: None,
            n_chains: default_chains(),
            burn_in_fraction: default_burn_in(),
            seed: default_seed(),
        }
    }
}

fn default_sampler() -> SamplerKind {
    SamplerKind::Direct
}

fn default_chains() -> usize {
    16
}

fn default_burn_in() -> f64 {
    0.1
}

fn default_seed() -> u64 {
    1
}

/// Unset fields fall back to the lattice or *ab initio* defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub eta: Option<f64>,
    pub eps_shift: Option<f64>,
    pub beta: Option<f64>,
    pub solver_tol: Option<f64>,
    pub solver_max_iter: Option<usize>,
    pub n_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory, relative to the config file.
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_trace")]
    pub trace: String,
    #[serde(default = "default_checkpoint")]
    pub checkpoint: String,
    /// Checkpoint cadence in iterations; 0 writes only the final checkpoint.
    #[serde(default = "default_every")]
    pub checkpoint_every: usize,
    /// Record wall times in the trace. Disable for byte-identical traces.
    #[serde(default = "yes")]
    pub timing: bool,
    /// Continue from the checkpoint in `dir` if one exists.
    #[serde(default)]
    pub resume: bool,
    /// Worker threads; `GPSVMC_WORKERS` takes precedence.
    pub workers: Option<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            trace: default_trace(),
            checkpoint: default_checkpoint(),
            checkpoint_every: default_every(),
            timing: true,
            resume: false,
            workers: None,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("run")
}

fn default_trace() -> String {
    "trace.csv".into()
}

fn default_checkpoint() -> String {
    "checkpoint.txt".into()
}

fn default_every() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub symmetry: SymmetryConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Value = toml::from_str(text).map_err(|e| Error::config("<file>", e.message()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: toml::Value) -> Result<Self> {
        let cfg: RunConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(error_path(&e), e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn variant(&self) -> Result<GpsVariant> {
        self.model
            .variant
            .parse()
            .map_err(|_| Error::config("model.variant", format!("unknown variant `{}`", self.model.variant)))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output.dir)
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetry.group != "none"
    }

    pub fn n_samples(&self) -> usize {
        self.sampling
            .n_samples
            .unwrap_or(match (self.system.kind, self.is_symmetrized()) {
                (SystemKind::Abinitio, _) => 5000,
                (_, true) => 1024,
                (_, false) => 4096,
            })
    }

    pub fn sr_config(&self) -> SrConfig {
        let base = match self.system.kind {
            SystemKind::Abinitio => SrConfig::ab_initio(),
            _ => SrConfig::lattice(),
        };
        let o = &self.optimizer;
        SrConfig {
            eta: o.eta.unwrap_or(base.eta),
            eps_shift: o.eps_shift.unwrap_or(base.eps_shift),
            beta: o.beta.unwrap_or(base.beta),
            solver_tol: o.solver_tol.unwrap_or(base.solver_tol),
            solver_max_iter: o.solver_max_iter.unwrap_or(base.solver_max_iter),
            n_iterations: o.n_iterations.unwrap_or(base.n_iterations),
        }
    }

    /// Cross-field checks, reported with the offending field names.
    pub fn validate(&self) -> Result<()> {
        let variant = self.variant()?;
        if self.model.support == 0 {
            return Err(Error::config("model.support", "must be positive"));
        }
        if !(self.model.init_scale >= 0.0) {
            return Err(Error::config("model.init_scale", "must be non-negative"));
        }
        match self.system.kind {
            SystemKind::Abinitio => {
                if self.system.fcidump.is_none() {
                    return Err(Error::config("system.fcidump", "required for abinitio systems"));
                }
            }
            _ => {
                if self.system.lattice.is_empty() || self.system.lattice.len() > 2 {
                    return Err(Error::config("system.lattice", "give one or two axis lengths"));
                }
                let nb = self.system.boundary.len();
                if nb != 1 && nb != self.system.lattice.len() {
                    return Err(Error::config("system.boundary", "one entry, or one per axis"));
                }
            }
        }
        if self.system.kind == SystemKind::Heisenberg && self.system.boundary.contains(&Boundary::Antiperiodic) {
            return Err(Error::config(
                "system.boundary",
                "antiperiodic boundaries are for fermions only",
            ));
        }
        if self.symmetry.marshall && self.system.kind != SystemKind::Heisenberg {
            return Err(Error::config(
                "symmetry.marshall",
                "the Marshall sign rule requires system.kind = \"heisenberg\"",
            ));
        }
        if self.sampling.sampler == SamplerKind::Direct && !variant.normalized() {
            return Err(Error::config(
                "sampling.sampler / model.variant",
                format!("direct sampling requires an autoregressive variant, got `{variant}`"),
            ));
        }
        if self.sampling.sampler == SamplerKind::Direct
            && self.is_symmetrized()
            && self.symmetry.kind == SymmetrizationKind::Projective
        {
            return Err(Error::config(
                "sampling.sampler / symmetry.kind",
                "projective symmetrization cannot be sampled directly",
            ));
        }
        if !["none", "z2", "c4v-z2"].contains(&self.symmetry.group.as_str()) {
            return Err(Error::config("symmetry.group", "expected none, z2 or c4v-z2"));
        }
        if self.sampling.n_chains == 0 {
            return Err(Error::config("sampling.n_chains", "must be positive"));
        }
        if self.n_samples() < 2 {
            return Err(Error::config("sampling.n_samples", "at least two samples are needed"));
        }
        if !(0.0..1.0).contains(&self.sampling.burn_in_fraction) {
            return Err(Error::config("sampling.burn_in_fraction", "must lie in [0, 1)"));
        }
        self.sr_config().validate()
    }
}

fn error_path(e: &toml::de::Error) -> String {
    let msg = e.message();
    msg.split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<file>".to_string())
}
