//! Symmetry groups, the two symmetrization schemes, gauge blocks and the
//! Marshall sign rule.

mod gauge;
mod symmetrized;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hamiltonians::Hamiltonian;
use crate::hilbert::{Configuration, Lattice, LocalSpace};

pub use gauge::{gauge_mask, GaugeConstraint};
pub use symmetrized::{SymmetrizationKind, Symmetrized, SymmetrizedCache};

/// Below this modulus the phase sum of the normalization-preserving
/// symmetrization is treated as vanishing.
pub const DEGENERATE_PHASE_TOL: f64 = 1e-14;

/// Site permutation combined with a permutation of local states:
/// `τ(x)[site_perm[s]] = local_map[x[s]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOp {
    site_perm: Vec<usize>,
    local_map: Vec<u8>,
    character: Complex64,
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &v in p {
        if v >= p.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

impl SymmetryOp {
    pub fn new(site_perm: Vec<usize>, local_map: Vec<u8>, character: Complex64) -> Result<Self> {
        if !is_permutation(&site_perm) {
            return Err(Error::Symmetry("site map is not a permutation".into()));
        }
        let lm: Vec<usize> = local_map.iter().map(|&v| v as usize).collect();
        if !is_permutation(&lm) {
            return Err(Error::Symmetry("local map is not a permutation".into()));
        }
        if (character.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Symmetry("character must have unit modulus".into()));
        }
        Ok(SymmetryOp {
            site_perm,
            local_map,
            character,
        })
    }

    pub fn identity(n: usize, d: usize) -> Self {
        SymmetryOp {
            site_perm: (0..n).collect(),
            local_map: (0..d as u8).collect(),
            character: Complex64::new(1.0, 0.0),
        }
    }

    pub fn site_perm(&self) -> &[usize] {
        &self.site_perm
    }

    pub fn local_map(&self) -> &[u8] {
        &self.local_map
    }

    pub fn character(&self) -> Complex64 {
        self.character
    }

    pub fn is_identity(&self) -> bool {
        self.site_perm.iter().enumerate().all(|(i, &p)| i == p)
            && self.local_map.iter().enumerate().all(|(i, &p)| i == p as usize)
    }

    pub fn apply(&self, x: &Configuration) -> Configuration {
        let mut out = vec![0u8; x.len()];
        for (s, &v) in x.as_slice().iter().enumerate() {
            out[self.site_perm[s]] = self.local_map[v as usize];
        }
        Configuration::from_vec_unchecked(out)
    }

    /// Image of a list of site changes.
    #[inline]
    pub fn map_change(&self, (site, state): (usize, u8)) -> (usize, u8) {
        (self.site_perm[site], self.local_map[state as usize])
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &SymmetryOp) -> SymmetryOp {
        SymmetryOp {
            site_perm: self.site_perm.iter().map(|&p| other.site_perm[p]).collect(),
            local_map: self.local_map.iter().map(|&v| other.local_map[v as usize]).collect(),
            character: self.character * other.character,
        }
    }

    fn same_action(&self, other: &SymmetryOp) -> bool {
        self.site_perm == other.site_perm && self.local_map == other.local_map
    }
}

#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    name: String,
    ops: Vec<SymmetryOp>,
}

impl SymmetryGroup {
    /// Requires the identity to be present and the set closed under composition.
    pub fn new(name: impl Into<String>, ops: Vec<SymmetryOp>) -> Result<Self> {
        let g = SymmetryGroup { name: name.into(), ops };
        if !g.ops.iter().any(SymmetryOp::is_identity) {
            return Err(Error::Symmetry("group lacks the identity".into()));
        }
        if !g.is_closed() {
            return Err(Error::Symmetry("operations are not closed under composition".into()));
        }
        Ok(g)
    }

    pub fn trivial(n: usize, local: LocalSpace) -> Self {
        SymmetryGroup {
            name: "trivial".into(),
            ops: vec![SymmetryOp::identity(n, local.dim())],
        }
    }

    /// `{identity, global ↑↔↓ flip}` for spin-1/2 systems.
    pub fn spin_flip(n: usize) -> Self {
        SymmetryGroup {
            name: "z2".into(),
            ops: vec![
                SymmetryOp::identity(n, 2),
                SymmetryOp {
                    site_perm: (0..n).collect(),
                    local_map: vec![1, 0],
                    character: Complex64::new(1.0, 0.0),
                },
            ],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ops(&self) -> &[SymmetryOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Every product of two elements is again an element (with the product character).
    pub fn is_closed(&self) -> bool {
        self.ops.iter().all(|a| {
            self.ops.iter().all(|b| {
                let ab = a.then(b);
                self.ops
                    .iter()
                    .any(|c| c.same_action(&ab) && (c.character - ab.character).norm() < 1e-10)
            })
        })
    }

    /// Configuration `τ(x)` for `τ` drawn uniformly from the group.
    pub fn random_image<R: Rng + ?Sized>(&self, x: &Configuration, rng: &mut R) -> Configuration {
        self.ops[rng.gen_range(0..self.ops.len())].apply(x)
    }
}

/// Point group of the square (rotations and reflections) times the global
/// spin flip, all with character one. Point operations act first.
pub fn c4v_z2_group(lattice: &Lattice, local: LocalSpace) -> Result<SymmetryGroup> {
    if !lattice.is_square() {
        return Err(Error::Symmetry("C4v needs an L×L lattice".into()));
    }
    if local != LocalSpace::Spin {
        return Err(Error::Symmetry(
            "the Z2 spin flip is implemented for spin-1/2 only".into(),
        ));
    }
    let l = lattice.dims()[0] as i64;
    let n = lattice.n_sites();
    let point = |f: &dyn Fn(i64, i64) -> (i64, i64)| -> Vec<usize> {
        (0..n)
            .map(|s| {
                let r = lattice.coords(s);
                let (a, b) = f(r[0], r[1]);
                lattice.site_at(&[a, b])
            })
            .collect()
    };
    let maps: [&dyn Fn(i64, i64) -> (i64, i64); 8] = [
        &|a, b| (a, b),
        &|a, b| (b, l - 1 - a),
        &|a, b| (l - 1 - a, l - 1 - b),
        &|a, b| (l - 1 - b, a),
        &|a, b| (b, a),
        &|a, b| (a, l - 1 - b),
        &|a, b| (l - 1 - b, l - 1 - a),
        &|a, b| (l - 1 - a, b),
    ];
    let mut ops = Vec::with_capacity(16);
    for flip in [false, true] {
        for f in maps.iter() {
            ops.push(SymmetryOp {
                site_perm: point(*f),
                local_map: if flip { vec![1, 0] } else { vec![0, 1] },
                character: Complex64::new(1.0, 0.0),
            });
        }
    }
    SymmetryGroup::new("c4v-z2", ops)
}

/// `log( (1/|S|) Σ_τ χ(τ) exp(l_τ) )` for the base log-amplitudes `l_τ = log ψ(τ(x))`.
pub fn projective_combine(logs: &[Complex64], characters: impl Iterator<Item = Complex64>) -> Complex64 {
    let max = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Complex64::new(f64::NEG_INFINITY, 0.0);
    }
    let sum: Complex64 = logs.iter().zip(characters).map(|(l, chi)| chi * (l - max).exp()).sum();
    if sum.norm() == 0.0 {
        return Complex64::new(f64::NEG_INFINITY, 0.0);
    }
    (sum / logs.len() as f64).ln() + max
}

/// Result of the normalization-preserving combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArCombined {
    pub log_amp: Complex64,
    /// The phase sum vanished and the phase was set to zero.
    pub degenerate: bool,
}

/// Modulus `sqrt(mean_τ |ψ(τx)|²)` and phase `arg Σ_τ exp(i Im l_τ)`.
pub fn ar_combine(logs: &[Complex64]) -> ArCombined {
    let modulus = 0.5 * (crate::scalar::logsumexp(logs.iter().map(|l| 2.0 * l.re)) - (logs.len() as f64).ln());
    let phase_sum: Complex64 = logs
        .iter()
        .filter(|l| l.re > f64::NEG_INFINITY)
        .map(|l| Complex64::from_polar(1.0, l.im))
        .sum();
    let degenerate = phase_sum.norm() < DEGENERATE_PHASE_TOL;
    let phase = if degenerate { 0.0 } else { phase_sum.arg() };
    ArCombined {
        log_amp: Complex64::new(modulus, phase),
        degenerate,
    }
}

/// Projective (character-weighted average) symmetrization of an arbitrary
/// amplitude function. Does not preserve normalization.
pub fn projective_symmetrize(
    base: impl Fn(&Configuration) -> Complex64,
    group: &SymmetryGroup,
    x: &Configuration,
) -> Complex64 {
    let logs: Vec<Complex64> = group.ops.iter().map(|op| base(&op.apply(x))).collect();
    projective_combine(&logs, group.ops.iter().map(|o| o.character))
}

/// Normalization-preserving symmetrization of a normalized base amplitude.
pub fn ar_symmetrize(
    base: impl Fn(&Configuration) -> Complex64,
    group: &SymmetryGroup,
    x: &Configuration,
) -> ArCombined {
    let logs: Vec<Complex64> = group.ops.iter().map(|op| base(&op.apply(x))).collect();
    ar_combine(&logs)
}

/// Draw `x` from the base Born distribution, then apply a uniformly random group element.
pub fn sample_symmetrized<W, R>(base: &W, group: &SymmetryGroup, rng: &mut R) -> Result<Configuration>
where
    W: crate::wavefunction::DirectSampler,
    R: Rng + ?Sized,
{
    let (x, _) = base.sample_direct(rng)?;
    Ok(group.random_image(&x, rng))
}

/// Heisenberg Hamiltonian in the sublattice-rotated basis, where every
/// exchange element is non-positive.
pub fn marshall_transform(h: &Hamiltonian) -> Result<Hamiltonian> {
    match h {
        Hamiltonian::Heisenberg(p) => {
            if !p.lattice.is_bipartite() {
                return Err(Error::Symmetry("Marshall sign rule needs a bipartite lattice".into()));
            }
            let mut p = p.clone();
            p.marshall = !p.marshall;
            Ok(Hamiltonian::Heisenberg(p))
        }
        _ => Err(Error::Symmetry(
            "Marshall sign rule applies to the Heisenberg model only".into(),
        )),
    }
}
