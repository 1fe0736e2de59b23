//! Configurations, local Fock spaces, lattice geometry and site orderings.
//!
//! Configurations are always stored in lattice-site order. The one-dimensional
//! ordering used by masked and autoregressive models is carried separately as a
//! [`SiteOrdering`] and applied by the model itself, so Hamiltonians and
//! symmetry operations never need to know about it.
//!
//! Local-state encodings:
//! * spin-1/2 (`D = 2`): `0 = ↓`, `1 = ↑`
//! * fermionic sites (`D = 4`): `0 = empty`, `1 = ↑`, `2 = ↓`, `3 = ↑↓`

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmetry::GaugeConstraint;

/// Largest Hilbert space (before constraints) that [`enumerate_sector`] will walk.
pub const ENUMERATION_GUARD: u128 = 1 << 24;

pub const SPIN_DOWN: u8 = 0;
pub const SPIN_UP: u8 = 1;

pub const EMPTY: u8 = 0;
pub const UP: u8 = 1;
pub const DOWN: u8 = 2;
pub const DOUBLE: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocalSpace {
    Spin,
    Fermion,
}

impl LocalSpace {
    pub fn from_dim(d: usize) -> Result<Self> {
        match d {
            2 => Ok(LocalSpace::Spin),
            4 => Ok(LocalSpace::Fermion),
            _ => Err(Error::Configuration(format!("local dimension must be 2 or 4, got {d}"))),
        }
    }

    #[inline]
    pub fn dim(self) -> usize {
        match self {
            LocalSpace::Spin => 2,
            LocalSpace::Fermion => 4,
        }
    }

    /// Number of (↑, ↓) particles carried by a local state.
    #[inline]
    pub fn counts(self, state: u8) -> (u8, u8) {
        match self {
            LocalSpace::Spin => (state, 0),
            LocalSpace::Fermion => (state & 1, (state >> 1) & 1),
        }
    }
}

/// Occupation string over the sites of a lattice, one local-state index per site.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Configuration(Vec<u8>);

impl Configuration {
    pub fn new(states: Vec<u8>, local: LocalSpace) -> Result<Self> {
        let d = local.dim() as u8;
        if let Some(bad) = states.iter().find(|&&s| s >= d) {
            return Err(Error::Configuration(format!(
                "local state {bad} out of range for D = {d}"
            )));
        }
        Ok(Configuration(states))
    }

    /// Wraps a state vector without range checks.
    #[inline]
    pub fn from_vec_unchecked(states: Vec<u8>) -> Self {
        Configuration(states)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    /// Copy of `self` with the listed `(site, new_state)` changes applied.
    pub fn with_changes(&self, changes: &[(usize, u8)]) -> Self {
        let mut out = self.clone();
        for &(s, v) in changes {
            out.0[s] = v;
        }
        out
    }

    pub fn particle_counts(&self, local: LocalSpace) -> (usize, usize) {
        self.0.iter().fold((0, 0), |(u, d), &s| {
            let (a, b) = local.counts(s);
            (u + a as usize, d + b as usize)
        })
    }
}

impl std::ops::Index<usize> for Configuration {
    type Output = u8;
    #[inline]
    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration(")?;
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
    Antiperiodic,
}

impl Boundary {
    #[inline]
    pub fn wraps(self) -> bool {
        !matches!(self, Boundary::Open)
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
            Boundary::Antiperiodic => "antiperiodic",
        })
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            "open" | "obc" => Ok(Boundary::Open),
            "antiperiodic" | "apbc" => Ok(Boundary::Antiperiodic),
            _ => Err(Error::Lattice(format!("unknown boundary `{s}`"))),
        }
    }
}

/// Nearest-neighbour pair. `wraps` marks bonds that cross a periodic or
/// antiperiodic boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub wraps: bool,
}

/// Hypercubic lattice with sites numbered row-major: in 2D site `(r0, r1)` has
/// index `r0 * dims[1] + r1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    dims: Vec<usize>,
    boundary: Vec<Boundary>,
}

impl Lattice {
    pub fn new(dims: Vec<usize>, boundary: Vec<Boundary>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 {
            return Err(Error::Lattice(format!(
                "only 1D and 2D lattices are supported, got rank {}",
                dims.len()
            )));
        }
        if dims.len() != boundary.len() {
            return Err(Error::Lattice("one boundary condition per axis is required".into()));
        }
        if dims.contains(&0) {
            return Err(Error::Lattice("zero-length axis".into()));
        }
        Ok(Lattice { dims, boundary })
    }

    pub fn chain(length: usize, boundary: Boundary) -> Result<Self> {
        Self::new(vec![length], vec![boundary])
    }

    pub fn square(lx: usize, ly: usize, boundary: Boundary) -> Result<Self> {
        Self::new(vec![lx, ly], vec![boundary, boundary])
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn boundary(&self) -> &[Boundary] {
        &self.boundary
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn is_square(&self) -> bool {
        self.dims.len() == 2 && self.dims[0] == self.dims[1]
    }

    pub fn has_antiperiodic(&self) -> bool {
        self.boundary.contains(&Boundary::Antiperiodic)
    }

    /// Bipartite iff every wrapping axis has even length.
    pub fn is_bipartite(&self) -> bool {
        self.dims
            .iter()
            .zip(&self.boundary)
            .all(|(&l, b)| !b.wraps() || l % 2 == 0 || l <= 2)
    }

    pub fn coords(&self, site: usize) -> Vec<i64> {
        let mut rest = site;
        let mut out = vec![0i64; self.dims.len()];
        for axis in (0..self.dims.len()).rev() {
            out[axis] = (rest % self.dims[axis]) as i64;
            rest /= self.dims[axis];
        }
        out
    }

    pub fn site_at(&self, coords: &[i64]) -> usize {
        coords
            .iter()
            .zip(&self.dims)
            .fold(0usize, |acc, (&c, &l)| acc * l + c.rem_euclid(l as i64) as usize)
    }

    /// Parity of the coordinate sum, used as the A/B sublattice label.
    pub fn sublattice(&self, site: usize) -> usize {
        (self.coords(site).iter().sum::<i64>().rem_euclid(2)) as usize
    }

    /// Nearest-neighbour bonds. On a wrapping axis of length 2 the wrap bond
    /// coincides with the direct one and is not repeated.
    pub fn bonds(&self) -> Vec<Bond> {
        let mut out = Vec::new();
        for site in 0..self.n_sites() {
            let r = self.coords(site);
            for axis in 0..self.dims.len() {
                let l = self.dims[axis] as i64;
                if l < 2 {
                    continue;
                }
                let mut nb = r.clone();
                nb[axis] += 1;
                if nb[axis] < l {
                    out.push(Bond {
                        a: site,
                        b: self.site_at(&nb),
                        wraps: false,
                    });
                } else if self.boundary[axis].wraps() && l > 2 {
                    nb[axis] = 0;
                    out.push(Bond {
                        a: site,
                        b: self.site_at(&nb),
                        wraps: true,
                    });
                }
            }
        }
        out
    }
}

/// Signed displacement `r_i - r_j` per axis. Wrapping axes are reduced to the
/// minimum image in `(-L/2, L/2]`, so a half-lattice tie resolves to the
/// positive representative. Open axes return the raw difference.
pub fn displacement(lattice: &Lattice, i: usize, j: usize) -> Vec<i64> {
    let ri = lattice.coords(i);
    let rj = lattice.coords(j);
    ri.iter()
        .zip(&rj)
        .zip(lattice.dims.iter().zip(&lattice.boundary))
        .map(|((&a, &b), (&l, bc))| {
            let d = a - b;
            if bc.wraps() {
                let l = l as i64;
                let mut w = d.rem_euclid(l);
                if 2 * w > l {
                    w -= l;
                }
                w
            } else {
                d
            }
        })
        .collect()
}

/// One-dimensional ordering of lattice sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteOrdering {
    /// position → site
    order: Vec<usize>,
    /// site → position
    position: Vec<usize>,
}

impl SiteOrdering {
    pub fn identity(n: usize) -> Self {
        SiteOrdering {
            order: (0..n).collect(),
            position: (0..n).collect(),
        }
    }

    /// Builds an ordering from the sequence of sites visited.
    pub fn from_sequence(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (p, &s) in order.iter().enumerate() {
            if s >= n || position[s] != usize::MAX {
                return Err(Error::Lattice(format!("site ordering is not a permutation of 0..{n}")));
            }
            position[s] = p;
        }
        Ok(SiteOrdering { order, position })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Site visited at position `p`.
    #[inline]
    pub fn site(&self, p: usize) -> usize {
        self.order[p]
    }

    /// Position of `site` in the ordering.
    #[inline]
    pub fn position(&self, site: usize) -> usize {
        self.position[site]
    }

    pub fn sequence(&self) -> &[usize] {
        &self.order
    }
}

/// Boustrophedon ordering: rows in order, every odd row traversed backwards.
pub fn zigzag_ordering(lattice: &Lattice) -> Result<SiteOrdering> {
    match lattice.dims() {
        [n] => Ok(SiteOrdering::identity(*n)),
        [lx, ly] => {
            let mut seq = Vec::with_capacity(lx * ly);
            for row in 0..*lx {
                let cols: Box<dyn Iterator<Item = usize>> = if row % 2 == 0 {
                    Box::new(0..*ly)
                } else {
                    Box::new((0..*ly).rev())
                };
                seq.extend(cols.map(|c| row * ly + c));
            }
            SiteOrdering::from_sequence(seq)
        }
        dims => Err(Error::Lattice(format!(
            "zig-zag ordering needs a 1D or 2D lattice, got rank {}",
            dims.len()
        ))),
    }
}

/// All configurations of `n` sites with local dimension `d` satisfying the
/// optional constraint, in lexicographic order (site 0 most significant).
pub fn enumerate_sector(n: usize, d: usize, constraint: Option<&GaugeConstraint>) -> Result<Vec<Configuration>> {
    let local = LocalSpace::from_dim(d)?;
    let size = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > ENUMERATION_GUARD {
        return Err(Error::SectorTooLarge {
            size,
            limit: ENUMERATION_GUARD,
        });
    }
    if let Some(c) = constraint {
        c.check(n, local)?;
    }
    let mut out = Vec::new();
    let mut current = vec![0u8; n];
    fn rec(
        pos: usize,
        counts: (usize, usize),
        current: &mut Vec<u8>,
        local: LocalSpace,
        constraint: Option<&GaugeConstraint>,
        out: &mut Vec<Configuration>,
    ) {
        let n = current.len();
        if pos == n {
            out.push(Configuration(current.clone()));
            return;
        }
        for s in 0..local.dim() as u8 {
            let allowed = constraint.map(|c| c.allows(local, n, pos, counts, s)).unwrap_or(true);
            if !allowed {
                continue;
            }
            let (a, b) = local.counts(s);
            current[pos] = s;
            rec(
                pos + 1,
                (counts.0 + a as usize, counts.1 + b as usize),
                current,
                local,
                constraint,
                out,
            );
        }
    }
    rec(0, (0, 0), &mut current, local, constraint, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zigzag_chain_is_identity() {
        let l = Lattice::chain(4, Boundary::Periodic).unwrap();
        assert_eq!(zigzag_ordering(&l).unwrap().sequence(), &[0, 1, 2, 3]);
    }

    #[test]
    fn zigzag_two_by_two() {
        let l = Lattice::square(2, 2, Boundary::Open).unwrap();
        let o = zigzag_ordering(&l).unwrap();
        let coords: Vec<_> = o.sequence().iter().map(|&s| l.coords(s)).collect();
        assert_eq!(coords, vec![vec![0, 0], vec![0, 1], vec![1, 1], vec![1, 0]]);
    }

    #[test]
    fn zigzag_three_by_three_is_bijective() {
        let l = Lattice::square(3, 3, Boundary::Periodic).unwrap();
        let o = zigzag_ordering(&l).unwrap();
        let mut seen = [false; 9];
        for &s in o.sequence() {
            assert!(!seen[s]);
            seen[s] = true;
        }
        assert!(seen.iter().all(|&b| b));
        // second row right-to-left
        assert_eq!(&o.sequence()[3..6], &[5, 4, 3]);
        for s in 0..9 {
            assert_eq!(o.site(o.position(s)), s);
        }
    }

    #[test]
    fn rank_three_lattice_rejected() {
        assert!(Lattice::new(vec![2, 2, 2], vec![Boundary::Open; 3]).is_err());
    }

    #[test]
    fn displacement_examples() {
        let l = Lattice::square(6, 6, Boundary::Periodic).unwrap();
        let i = l.site_at(&[0, 0]);
        let j = l.site_at(&[5, 0]);
        assert_eq!(displacement(&l, i, j), vec![1, 0]);

        let c = Lattice::chain(8, Boundary::Open).unwrap();
        assert_eq!(displacement(&c, 0, 7), vec![-7]);

        let l4 = Lattice::square(4, 4, Boundary::Periodic).unwrap();
        let (i, j) = (l4.site_at(&[1, 1]), l4.site_at(&[3, 3]));
        assert_eq!(displacement(&l4, i, j), vec![2, 2]);
    }

    #[test]
    fn displacement_tie_matches_image_enumeration() {
        // brute force: all images, minimal |d|, ties broken toward positive
        let l = Lattice::square(4, 4, Boundary::Periodic).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let (ri, rj) = (l.coords(i), l.coords(j));
                let mut best = Vec::new();
                for axis in 0..2 {
                    let raw = ri[axis] - rj[axis];
                    let mut cand: Vec<i64> = (-2..=2).map(|k| raw + 4 * k).collect();
                    cand.sort_by_key(|&d| (d.abs(), -d));
                    best.push(cand[0]);
                }
                assert_eq!(displacement(&l, i, j), best);
            }
        }
    }

    #[test]
    fn bonds_counts() {
        assert_eq!(Lattice::square(4, 4, Boundary::Periodic).unwrap().bonds().len(), 32);
        assert_eq!(Lattice::chain(4, Boundary::Periodic).unwrap().bonds().len(), 4);
        assert_eq!(Lattice::chain(4, Boundary::Open).unwrap().bonds().len(), 3);
        assert_eq!(Lattice::chain(2, Boundary::Periodic).unwrap().bonds().len(), 1);
        assert_eq!(Lattice::square(2, 2, Boundary::Periodic).unwrap().bonds().len(), 4);
    }

    #[test]
    fn sector_enumeration_examples() {
        let all = enumerate_sector(2, 2, None).unwrap();
        let strs: Vec<String> = all.iter().map(|c| c.to_string()).collect();
        assert_eq!(strs, ["00", "01", "10", "11"]);

        let sz0 = GaugeConstraint::magnetization(0);
        assert_eq!(enumerate_sector(4, 2, Some(&sz0)).unwrap().len(), 6);

        let el = GaugeConstraint::electrons(2, 2);
        let sector = enumerate_sector(4, 4, Some(&el)).unwrap();
        // brute force count over all 4^4 strings
        let brute = (0..256u32)
            .filter(|&k| {
                let states: Vec<u8> = (0..4).map(|p| ((k >> (2 * (3 - p))) & 3) as u8).collect();
                Configuration(states).particle_counts(LocalSpace::Fermion) == (2, 2)
            })
            .count();
        assert_eq!(brute, 36);
        assert_eq!(sector.len(), 36);
        assert!(sector.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sector_guard() {
        assert!(matches!(
            enumerate_sector(13, 4, None),
            Err(Error::SectorTooLarge { .. })
        ));
    }
}
