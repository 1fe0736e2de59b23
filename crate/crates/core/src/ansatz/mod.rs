//! Gaussian process state (GPS) ansätze: the plain GPS, its masked and
//! autoregressive adaptations, and the filter-based versions of all three.
//!
//! Every variant is evaluated through the same "correlator" picture. A model
//! has `C` correlators; correlator `c` contributes
//!
//! ```text
//! z_c = Σ_m Π_{j ∈ F(c)} ε[block(c, j), m, x_j]
//! ```
//!
//! to `log ψ`, where `F(c)` is the set of ordering positions it sees and
//! `block(c, j)` selects the parameter slice. The plain GPS has a single
//! correlator over all positions. All other variants have one correlator per
//! position `i`, whose own site is its "self" factor. Masking restricts
//! `F(i)` to `j ≤ i`. Autoregressive variants subtract the conditional
//! log-normalizer `½ log Σ_{x'} exp(2 Re z_i(x'))` from every correlator.
//!
//! Parameters are stored flat with index `(block · M + m) · D + s`:
//! * GPS: `block = j` (position)
//! * masked / AR GPS: `block = i(i+1)/2 + j` for `j ≤ i` (only active entries stored)
//! * filter variants: `block` = index of the displacement `r_i − r_j` in the
//!   sorted table of displacements the model actually uses.

mod cache;
pub mod checkpoint;
mod derivatives;
mod embed;
mod sample;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{displacement, zigzag_ordering, Configuration, Lattice, LocalSpace, SiteOrdering};
use crate::scalar::{logsumexp, Scalar};
use crate::symmetry::GaugeConstraint;

pub use cache::{AmplitudeCache, FastUpdateError};
pub use derivatives::LogDerivatives;
pub use embed::{product_state_embed, EmbedVariant, EmbeddedState, ProductStateTable, WeightSharingArGps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Correlator {
    FullyVariational,
    Filter,
}

/// One row of the GPS variant table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GpsVariant {
    masked: bool,
    normalized: bool,
    correlator: Correlator,
}

impl GpsVariant {
    pub const GPS: Self = Self::raw(false, false, Correlator::FullyVariational);
    pub const MASKED_GPS: Self = Self::raw(true, false, Correlator::FullyVariational);
    pub const AR_GPS: Self = Self::raw(true, true, Correlator::FullyVariational);
    pub const FILTER_GPS: Self = Self::raw(false, false, Correlator::Filter);
    pub const MASKED_FILTER_GPS: Self = Self::raw(true, false, Correlator::Filter);
    pub const AR_FILTER_GPS: Self = Self::raw(true, true, Correlator::Filter);

    pub const ALL: [GpsVariant; 6] = [
        Self::GPS,
        Self::MASKED_GPS,
        Self::AR_GPS,
        Self::FILTER_GPS,
        Self::MASKED_FILTER_GPS,
        Self::AR_FILTER_GPS,
    ];

    const fn raw(masked: bool, normalized: bool, correlator: Correlator) -> Self {
        GpsVariant {
            masked,
            normalized,
            correlator,
        }
    }

    /// A normalized (autoregressive) state must also be masked.
    pub fn new(masked: bool, normalized: bool, correlator: Correlator) -> Result<Self> {
        if normalized && !masked {
            return Err(Error::Model("normalized conditionals require masking".into()));
        }
        Ok(Self::raw(masked, normalized, correlator))
    }

    pub fn masked(self) -> bool {
        self.masked
    }

    pub fn normalized(self) -> bool {
        self.normalized
    }

    pub fn correlator(self) -> Correlator {
        self.correlator
    }

    pub fn name(self) -> &'static str {
        match (self.masked, self.normalized, self.correlator) {
            (false, _, Correlator::FullyVariational) => "gps",
            (true, false, Correlator::FullyVariational) => "masked-gps",
            (true, true, Correlator::FullyVariational) => "ar-gps",
            (false, _, Correlator::Filter) => "filter-gps",
            (true, false, Correlator::Filter) => "masked-filter-gps",
            (true, true, Correlator::Filter) => "ar-filter-gps",
        }
    }
}

impl fmt::Display for GpsVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GpsVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GpsVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Model(format!("unknown GPS variant `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Real,
    Complex,
}

impl FromStr for Dtype {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Dtype::Real),
            "complex" => Ok(Dtype::Complex),
            _ => Err(Error::Model(format!("unknown dtype `{s}`"))),
        }
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dtype::Real => "real",
            Dtype::Complex => "complex",
        })
    }
}

/// Everything that fixes the shape of a model, but not its parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub variant: GpsVariant,
    pub local: LocalSpace,
    pub lattice: Lattice,
    pub ordering: SiteOrdering,
    pub support: usize,
    pub dtype: Dtype,
    /// Sector enforced on the conditionals of autoregressive variants.
    pub gauge: Option<GaugeConstraint>,
    /// Optional cutoff on `|r_i − r_j|` for filter correlators; `None` keeps
    /// whole-lattice filters.
    pub filter_range: Option<f64>,
}

impl ModelSpec {
    /// Real parameters, zig-zag ordering, no gauge, whole-lattice filters.
    pub fn new(variant: GpsVariant, local: LocalSpace, lattice: Lattice, support: usize) -> Result<Self> {
        let ordering = zigzag_ordering(&lattice)?;
        Ok(ModelSpec {
            variant,
            local,
            lattice,
            ordering,
            support,
            dtype: Dtype::Real,
            gauge: None,
            filter_range: None,
        })
    }

    pub fn with_dtype(mut self, dtype: Dtype) -> Self {
        self.dtype = dtype;
        self
    }

    pub fn with_gauge(mut self, gauge: Option<GaugeConstraint>) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn with_ordering(mut self, ordering: SiteOrdering) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn with_filter_range(mut self, range: Option<f64>) -> Self {
        self.filter_range = range;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites()
    }

    fn validate(&self) -> Result<()> {
        let n = self.lattice.n_sites();
        if self.support == 0 {
            return Err(Error::Model("support dimension must be positive".into()));
        }
        if self.ordering.len() != n {
            return Err(Error::Model(format!(
                "ordering covers {} sites, lattice has {n}",
                self.ordering.len()
            )));
        }
        if n > u16::MAX as usize {
            return Err(Error::Model("too many sites".into()));
        }
        if let Some(g) = &self.gauge {
            g.check(n, self.local)?;
        }
        if let Some(r) = self.filter_range {
            if !(r >= 0.0) {
                return Err(Error::Model("filter range must be non-negative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Params {
    pub fn len(&self) -> usize {
        match self {
            Params::Real(p) => p.len(),
            Params::Complex(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: usize) -> Complex64 {
        match self {
            Params::Real(p) => Complex64::new(p[k], 0.0),
            Params::Complex(p) => p[k],
        }
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            Params::Real(_) => Dtype::Real,
            Params::Complex(_) => Dtype::Complex,
        }
    }
}

macro_rules! with_params {
    ($model:expr, |$p:ident| $body:expr) => {
        match &$model.params {
            $crate::ansatz::Params::Real($p) => $body,
            $crate::ansatz::Params::Complex($p) => $body,
        }
    };
}
pub(crate) use with_params;

pub(crate) const NO_SLOT: u32 = u32::MAX;
pub(crate) const SELF_SLOT: u32 = u32::MAX - 1;

/// Factor structure shared by all models with the same spec.
#[derive(Debug)]
pub(crate) struct Layout {
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub n_blocks: usize,
    pub n_corr: usize,
    /// CSR offsets into `fpos`/`fblock`, one range of non-self factors per correlator.
    pub starts: Vec<usize>,
    pub fpos: Vec<u16>,
    pub fblock: Vec<u32>,
    /// Parameter block of each correlator's own site; `NO_SLOT` for the plain GPS.
    pub self_block: Vec<u32>,
    /// `n_corr × n` table: CSR index of the factor at each position, `SELF_SLOT`
    /// or `NO_SLOT`.
    pub slot: Vec<u32>,
    pub offsets: Vec<Vec<i64>>,
    pub masked: bool,
    pub normalized: bool,
}

impl Layout {
    fn build(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_sites();
        let d = spec.local.dim();
        let m = spec.support;
        let v = spec.variant;
        let mut starts = vec![0usize];
        let mut fpos = Vec::new();
        let mut fblock = Vec::new();
        let mut self_block = Vec::new();
        let mut offsets = Vec::new();

        match (v.correlator, v.masked) {
            (Correlator::FullyVariational, false) => {
                for j in 0..n {
                    fpos.push(j as u16);
                    fblock.push(j as u32);
                }
                starts.push(fpos.len());
                self_block.push(NO_SLOT);
            }
            (Correlator::FullyVariational, true) => {
                for i in 0..n {
                    let tri = i * (i + 1) / 2;
                    for j in 0..i {
                        fpos.push(j as u16);
                        fblock.push((tri + j) as u32);
                    }
                    starts.push(fpos.len());
                    self_block.push((tri + i) as u32);
                }
            }
            (Correlator::Filter, masked) => {
                let ord = &spec.ordering;
                let range = spec.filter_range;
                let in_range = |dv: &[i64]| match range {
                    None => true,
                    Some(r) => (dv.iter().map(|&a| (a * a) as f64).sum::<f64>()).sqrt() <= r + 1e-12,
                };
                let mut used: BTreeMap<Vec<i64>, u32> = BTreeMap::new();
                let mut raw = Vec::new();
                for i in 0..n {
                    let upto = if masked { i + 1 } else { n };
                    let mut row = Vec::new();
                    for j in 0..upto {
                        let dv = displacement(&spec.lattice, ord.site(i), ord.site(j));
                        if j != i && !in_range(&dv) {
                            continue;
                        }
                        used.insert(dv.clone(), 0);
                        row.push((j, dv));
                    }
                    raw.push(row);
                }
                for (k, val) in used.values_mut().enumerate() {
                    *val = k as u32;
                }
                for (i, row) in raw.into_iter().enumerate() {
                    let mut own = NO_SLOT;
                    for (j, dv) in row {
                        let b = used[&dv];
                        if j == i {
                            own = b;
                        } else {
                            fpos.push(j as u16);
                            fblock.push(b);
                        }
                    }
                    starts.push(fpos.len());
                    self_block.push(own);
                }
                offsets = used.into_keys().collect();
            }
        }

        let n_corr = self_block.len();
        let n_blocks = match v.correlator {
            Correlator::FullyVariational if !v.masked => n,
            Correlator::FullyVariational => n * (n + 1) / 2,
            Correlator::Filter => offsets.len(),
        };
        let mut slot = vec![NO_SLOT; n_corr * n];
        for c in 0..n_corr {
            for f in starts[c]..starts[c + 1] {
                slot[c * n + fpos[f] as usize] = f as u32;
            }
            if self_block[c] != NO_SLOT {
                slot[c * n + c] = SELF_SLOT;
            }
        }
        Ok(Layout {
            n,
            d,
            m,
            n_blocks,
            n_corr,
            starts,
            fpos,
            fblock,
            self_block,
            slot,
            offsets,
            masked: v.masked,
            normalized: v.normalized,
        })
    }

    #[inline]
    pub fn n_params(&self) -> usize {
        self.n_blocks * self.m * self.d
    }

    #[inline]
    pub fn has_self(&self) -> bool {
        self.self_block[0] != NO_SLOT
    }

    /// Products of the non-self factors of correlator `c`, one per support index.
    #[inline]
    pub fn partial<T: Scalar>(&self, eps: &[T], xp: &[u8], c: usize, out: &mut [T]) {
        out.fill(T::one());
        let (m, d) = (self.m, self.d);
        for f in self.starts[c]..self.starts[c + 1] {
            let base = self.fblock[f] as usize * m * d + xp[self.fpos[f] as usize] as usize;
            for (k, o) in out.iter_mut().enumerate() {
                *o *= eps[base + k * d];
            }
        }
    }

    /// Exponent argument of correlator `c` for each candidate local state of its own site.
    #[inline]
    pub fn self_logs<T: Scalar>(&self, eps: &[T], c: usize, partial: &[T], out: &mut [T]) {
        let (m, d) = (self.m, self.d);
        let base = self.self_block[c] as usize * m * d;
        out[..d].fill(T::zero());
        for (k, &p) in partial.iter().enumerate() {
            let row = &eps[base + k * d..base + k * d + d];
            for s in 0..d {
                out[s] += row[s] * p;
            }
        }
    }

    /// `(log contribution, log normalizer)` of correlator `c` whose own site holds `xs`.
    #[inline]
    pub fn contribution<T: Scalar>(
        &self,
        eps: &[T],
        c: usize,
        partial: &[T],
        xs: u8,
        allowed: &[bool; 4],
    ) -> (Complex64, f64) {
        if !self.has_self() {
            let mut z = T::zero();
            for &p in partial {
                z += p;
            }
            return (z.to_c64(), 0.0);
        }
        let mut z = [T::zero(); 4];
        self.self_logs(eps, c, partial, &mut z);
        if !self.normalized {
            return (z[xs as usize].to_c64(), 0.0);
        }
        let lognorm =
            0.5 * logsumexp((0..self.d).map(|s| if allowed[s] { 2.0 * z[s].re() } else { f64::NEG_INFINITY }));
        if !allowed[xs as usize] {
            return (Complex64::new(f64::NEG_INFINITY, 0.0), lognorm);
        }
        (z[xs as usize].to_c64() - lognorm, lognorm)
    }
}

/// A GPS-family wave function with concrete parameter values.
#[derive(Debug, Clone)]
pub struct GpsModel {
    spec: ModelSpec,
    layout: Arc<Layout>,
    params: Params,
}

impl GpsModel {
    pub fn new(spec: ModelSpec, params: Params) -> Result<Self> {
        let layout = Layout::build(&spec)?;
        if params.len() != layout.n_params() {
            return Err(Error::Model(format!(
                "expected {} parameters, got {}",
                layout.n_params(),
                params.len()
            )));
        }
        if params.dtype() != spec.dtype {
            return Err(Error::Model(format!(
                "spec dtype {} does not match parameter dtype {}",
                spec.dtype,
                params.dtype()
            )));
        }
        Ok(GpsModel {
            spec,
            layout: Arc::new(layout),
            params,
        })
    }

    /// Model with every parameter produced by `f(canonical_index)`.
    pub fn from_fn(spec: ModelSpec, mut f: impl FnMut(usize) -> Complex64) -> Result<Self> {
        let n = Layout::build(&spec)?.n_params();
        let params = match spec.dtype {
            Dtype::Real => Params::Real((0..n).map(|k| f(k).re).collect()),
            Dtype::Complex => Params::Complex((0..n).map(f).collect()),
        };
        Self::new(spec, params)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn variant(&self) -> GpsVariant {
        self.spec.variant
    }

    pub fn dtype(&self) -> Dtype {
        self.spec.dtype
    }

    pub fn local_space(&self) -> LocalSpace {
        self.spec.local
    }

    pub fn n_sites(&self) -> usize {
        self.layout.n
    }

    pub fn support(&self) -> usize {
        self.layout.m
    }

    pub fn ordering(&self) -> &SiteOrdering {
        &self.spec.ordering
    }

    pub fn gauge(&self) -> Option<&GaugeConstraint> {
        self.spec.gauge.as_ref()
    }

    /// Number of (complex or real) entries of the parameter tensors.
    pub fn n_params(&self) -> usize {
        self.layout.n_params()
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    /// Displacement vectors indexing the filter blocks (empty for fully-variational models).
    pub fn filter_offsets(&self) -> &[Vec<i64>] {
        &self.layout.offsets
    }

    pub fn n_blocks(&self) -> usize {
        self.layout.n_blocks
    }

    /// Canonical flat index of `ε[block, m, s]`.
    pub fn param_index(&self, block: usize, m: usize, s: usize) -> usize {
        (block * self.layout.m + m) * self.layout.d + s
    }

    /// Block holding `ε^{(i)}_{·,·,j}` of a masked fully-variational model (`j ≤ i`).
    pub fn masked_block(i: usize, j: usize) -> usize {
        debug_assert!(j <= i);
        i * (i + 1) / 2 + j
    }

    /// Block of filter displacement `dv`, if the model uses it.
    pub fn offset_block(&self, dv: &[i64]) -> Option<usize> {
        self.layout.offsets.iter().position(|o| o == dv)
    }

    pub(crate) fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Number of real optimization parameters (twice `n_params` for complex models).
    pub fn n_real_params(&self) -> usize {
        match self.spec.dtype {
            Dtype::Real => self.n_params(),
            Dtype::Complex => 2 * self.n_params(),
        }
    }

    /// Real parametrization; complex entries are interleaved `(re, im)`.
    pub fn real_params(&self) -> Vec<f64> {
        match &self.params {
            Params::Real(p) => p.clone(),
            Params::Complex(p) => p.iter().flat_map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn set_real_params(&mut self, theta: &[f64]) {
        assert_eq!(theta.len(), self.n_real_params());
        match &mut self.params {
            Params::Real(p) => p.copy_from_slice(theta),
            Params::Complex(p) => {
                for (z, pair) in p.iter_mut().zip(theta.chunks_exact(2)) {
                    *z = Complex64::new(pair[0], pair[1]);
                }
            }
        }
    }

    /// Local states reordered along the model's one-dimensional ordering.
    pub fn position_states(&self, x: &Configuration) -> Vec<u8> {
        (0..self.layout.n).map(|p| x[self.spec.ordering.site(p)]).collect()
    }

    pub(crate) fn check_config(&self, x: &Configuration) {
        assert_eq!(x.len(), self.layout.n, "configuration length mismatch");
    }

    #[inline]
    pub(crate) fn allowed(&self, pos: usize, counts: (usize, usize)) -> [bool; 4] {
        let mut out = [true; 4];
        if let (true, Some(g)) = (self.layout.normalized, &self.spec.gauge) {
            for (s, o) in out.iter_mut().enumerate().take(self.layout.d) {
                *o = g.allows(self.spec.local, self.layout.n, pos, counts, s as u8);
            }
        }
        out
    }

    #[inline]
    pub(crate) fn add_counts(&self, counts: (usize, usize), s: u8) -> (usize, usize) {
        let (a, b) = self.spec.local.counts(s);
        (counts.0 + a as usize, counts.1 + b as usize)
    }

    /// Unnormalized exponent arguments of the conditional at ordering position
    /// `i`, one per candidate local state. For unmasked variants the product
    /// runs over all other sites with the candidate substituted at `i`.
    pub fn conditional_logs(&self, x: &Configuration, i: usize) -> Vec<Complex64> {
        self.check_config(x);
        assert!(i < self.layout.n);
        with_params!(self, |eps| self.conditional_logs_generic(eps, x, i))
    }

    fn conditional_logs_generic<T: Scalar>(&self, eps: &[T], x: &Configuration, i: usize) -> Vec<Complex64> {
        let lay = &self.layout;
        let mut xp = self.position_states(x);
        let mut partial = vec![T::zero(); lay.m];
        if lay.has_self() {
            let mut z = [T::zero(); 4];
            lay.partial(eps, &xp, i, &mut partial);
            lay.self_logs(eps, i, &partial, &mut z);
            z[..lay.d].iter().map(|v| v.to_c64()).collect()
        } else {
            (0..lay.d as u8)
                .map(|s| {
                    xp[i] = s;
                    lay.partial(eps, &xp, 0, &mut partial);
                    partial.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.to_c64())
                })
                .collect()
        }
    }

    /// `log ψ(x)`, evaluated from scratch in `O(N² M)`.
    pub fn log_amplitude(&self, x: &Configuration) -> Complex64 {
        self.check_config(x);
        with_params!(self, |eps| self.log_amplitude_generic(eps, x))
    }

    fn log_amplitude_generic<T: Scalar>(&self, eps: &[T], x: &Configuration) -> Complex64 {
        let lay = &self.layout;
        let xp = self.position_states(x);
        let mut partial = vec![T::zero(); lay.m];
        let mut counts = (0, 0);
        let mut total = Complex64::new(0.0, 0.0);
        for c in 0..lay.n_corr {
            lay.partial(eps, &xp, c, &mut partial);
            let allowed = self.allowed(c, counts);
            let xs = if lay.has_self() { xp[c] } else { 0 };
            total += lay.contribution(eps, c, &partial, xs, &allowed).0;
            counts = self.add_counts(counts, xp[c.min(lay.n - 1)]);
        }
        total
    }
}

/// Near-identity random initialization: every entry is `1 + scale·g` with
/// `g ~ N(0, 1)`, plus `i·scale·g'` for complex models. Deterministic in `seed`.
pub fn init_params(spec: ModelSpec, seed: u64, scale: f64) -> Result<GpsModel> {
    if !(scale >= 0.0) {
        return Err(Error::Model("initialization scale must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dtype = spec.dtype;
    GpsModel::from_fn(spec, |_| {
        let re: f64 = StandardNormal.sample(&mut rng);
        match dtype {
            Dtype::Real => Complex64::new(1.0 + scale * re, 0.0),
            Dtype::Complex => {
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(1.0 + scale * re, scale * im)
            }
        }
    })
}

/// Number of variational entries for a variant, following the table of
/// scalings: `D·M·N` (GPS), `D·M·N(N+1)/2` (masked / AR), `D·M·N_offsets` (filters).
pub fn active_parameter_count(spec: &ModelSpec) -> Result<usize> {
    Ok(Layout::build(spec)?.n_params())
}
