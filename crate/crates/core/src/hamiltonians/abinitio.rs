use smallvec::SmallVec;

use super::ConnectedTerm;
use crate::error::{Error, Result};
use crate::hilbert::Configuration;

/// Terms with `|H_{x'x}|` below this are dropped.
pub const DEFAULT_CUTOFF: f64 = 1e-12;

/// `H = E_core + Σ_{ij,σ} h_ij c†_iσ c_jσ + ½ Σ_{ijkl,στ} (ij|kl) c†_iσ c†_kτ c_lτ c_jσ`
/// with two-body integrals in chemists' notation.
#[derive(Debug, Clone, PartialEq)]
pub struct AbInitioIntegrals {
    norb: usize,
    n_elec: usize,
    ms2: i64,
    h1: Vec<f64>,
    h2: Vec<f64>,
    e_core: f64,
    cutoff: f64,
}

impl AbInitioIntegrals {
    /// `h1` is `norb²` row-major, `h2` is the full `norb⁴` tensor `(ij|kl)`.
    pub fn new(norb: usize, n_elec: usize, ms2: i64, h1: Vec<f64>, h2: Vec<f64>, e_core: f64) -> Result<Self> {
        if norb == 0 || norb > 64 {
            return Err(Error::Hamiltonian(format!("{norb} orbitals not supported (1..=64)")));
        }
        if h1.len() != norb * norb || h2.len() != norb.pow(4) {
            return Err(Error::Hamiltonian("integral array sizes do not match NORB".into()));
        }
        if (n_elec as i64 + ms2) % 2 != 0 || ms2.unsigned_abs() as usize > n_elec || n_elec > 2 * norb {
            return Err(Error::Hamiltonian(format!("inconsistent NELEC={n_elec}, MS2={ms2}")));
        }
        let h = AbInitioIntegrals {
            norb,
            n_elec,
            ms2,
            h1,
            h2,
            e_core,
            cutoff: DEFAULT_CUTOFF,
        };
        h.check_symmetry()?;
        Ok(h)
    }

    fn check_symmetry(&self) -> Result<()> {
        let n = self.norb;
        for i in 0..n {
            for j in 0..n {
                if (self.h1(i, j) - self.h1(j, i)).abs() > 1e-10 {
                    return Err(Error::Hamiltonian(format!("h1 not symmetric at ({i},{j})")));
                }
                for k in 0..n {
                    for l in 0..n {
                        let v = self.h2(i, j, k, l);
                        for w in [self.h2(j, i, k, l), self.h2(i, j, l, k), self.h2(k, l, i, j)] {
                            if (v - w).abs() > 1e-10 {
                                return Err(Error::Hamiltonian(format!(
                                    "h2 lacks permutational symmetry at ({i},{j},{k},{l})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn norb(&self) -> usize {
        self.norb
    }

    pub fn n_elec(&self) -> usize {
        self.n_elec
    }

    pub fn ms2(&self) -> i64 {
        self.ms2
    }

    /// `(N↑, N↓)` from `NELEC` and `MS2`.
    pub fn electrons(&self) -> (usize, usize) {
        let up = (self.n_elec as i64 + self.ms2) / 2;
        (up as usize, self.n_elec - up as usize)
    }

    pub fn e_core(&self) -> f64 {
        self.e_core
    }

    #[inline]
    pub fn h1(&self, i: usize, j: usize) -> f64 {
        self.h1[i * self.norb + j]
    }

    #[inline]
    pub fn h2(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.norb;
        self.h2[((i * n + j) * n + k) * n + l]
    }

    /// Spin-orbital occupation bitmask: bit `p` for orbital `p` spin ↑,
    /// bit `norb + p` for spin ↓.
    fn occupation(&self, x: &Configuration) -> u128 {
        let mut bits = 0u128;
        for (p, &s) in x.as_slice().iter().enumerate() {
            if s & 1 != 0 {
                bits |= 1 << p;
            }
            if s & 2 != 0 {
                bits |= 1 << (self.norb + p);
            }
        }
        bits
    }

    #[inline]
    fn spatial(&self, so: usize) -> (usize, usize) {
        (so % self.norb, so / self.norb)
    }

    pub(crate) fn connected_into(&self, x: &Configuration, out: &mut Vec<ConnectedTerm>) {
        let n = self.norb;
        let occ = self.occupation(x);
        let occupied: SmallVec<[usize; 64]> = (0..2 * n).filter(|&p| occ >> p & 1 == 1).collect();
        let virt: SmallVec<[usize; 64]> = (0..2 * n).filter(|&p| occ >> p & 1 == 0).collect();

        let mut diag = self.e_core;
        for (a, &p) in occupied.iter().enumerate() {
            let (i, si) = self.spatial(p);
            diag += self.h1(i, i);
            for &q in &occupied[a + 1..] {
                let (j, sj) = self.spatial(q);
                diag += self.h2(i, i, j, j);
                if si == sj {
                    diag -= self.h2(i, j, j, i);
                }
            }
        }
        out.push(ConnectedTerm::diagonal(diag));

        // single excitations c†_a c_i
        for &p in &occupied {
            let (i, si) = self.spatial(p);
            for &q in &virt {
                let (a, sa) = self.spatial(q);
                if sa != si {
                    continue;
                }
                let mut v = self.h1(a, i);
                for &r in &occupied {
                    let (j, sj) = self.spatial(r);
                    v += self.h2(a, i, j, j);
                    if sj == si {
                        v -= self.h2(a, j, j, i);
                    }
                }
                if v.abs() < self.cutoff {
                    continue;
                }
                let mut bits = occ;
                let sign = annihilate(&mut bits, p) * create(&mut bits, q);
                out.push(self.term(x, bits, sign * v));
            }
        }

        // double excitations c†_a c†_b c_j c_i with i < j, a < b
        for (u, &p) in occupied.iter().enumerate() {
            let (i, si) = self.spatial(p);
            for &q in &occupied[u + 1..] {
                let (j, sj) = self.spatial(q);
                for (w, &r) in virt.iter().enumerate() {
                    let (a, sa) = self.spatial(r);
                    for &s in &virt[w + 1..] {
                        let (b, sb) = self.spatial(s);
                        if sa + sb != si + sj {
                            continue;
                        }
                        let mut v = 0.0;
                        if sa == si && sb == sj {
                            v += self.h2(a, i, b, j);
                        }
                        if sa == sj && sb == si {
                            v -= self.h2(a, j, b, i);
                        }
                        if v.abs() < self.cutoff {
                            continue;
                        }
                        let mut bits = occ;
                        let sign = annihilate(&mut bits, p)
                            * annihilate(&mut bits, q)
                            * create(&mut bits, s)
                            * create(&mut bits, r);
                        out.push(self.term(x, bits, sign * v));
                    }
                }
            }
        }
    }

    fn term(&self, x: &Configuration, bits: u128, element: f64) -> ConnectedTerm {
        let n = self.norb;
        let mut changes = SmallVec::new();
        for (p, &old) in x.as_slice().iter().enumerate() {
            let new = ((bits >> p & 1) | ((bits >> (n + p) & 1) << 1)) as u8;
            if new != old {
                changes.push((p, new));
            }
        }
        ConnectedTerm { changes, element }
    }
}

#[inline]
fn parity_below(bits: u128, p: usize) -> f64 {
    let below = bits & ((1u128 << p) - 1);
    if below.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn annihilate(bits: &mut u128, p: usize) -> f64 {
    debug_assert!(*bits >> p & 1 == 1);
    let s = parity_below(*bits, p);
    *bits &= !(1u128 << p);
    s
}

#[inline]
fn create(bits: &mut u128, p: usize) -> f64 {
    debug_assert!(*bits >> p & 1 == 0);
    let s = parity_below(*bits, p);
    *bits |= 1u128 << p;
    s
}
