use smallvec::smallvec;

use super::ConnectedTerm;
use crate::hilbert::{Boundary, Configuration, Lattice, DOUBLE};

/// `H = −t Σ_⟨ij⟩σ (c†_iσ c_jσ + h.c.) + U Σ_i n_i↑ n_i↓`.
///
/// Fermion operators are ordered with all ↑ orbitals (in site order) before
/// all ↓ orbitals. With antiperiodic boundaries every hop across the wrap
/// bond picks up an extra factor −1.
#[derive(Debug, Clone, PartialEq)]
pub struct HubbardParams {
    pub t: f64,
    pub u: f64,
    pub lattice: Lattice,
}

impl HubbardParams {
    pub fn new(t: f64, u: f64, lattice: Lattice) -> Self {
        HubbardParams { t, u, lattice }
    }

    pub(crate) fn connected_into(&self, x: &Configuration, out: &mut Vec<ConnectedTerm>) {
        let doubles = x.as_slice().iter().filter(|&&s| s == DOUBLE).count();
        out.push(ConnectedTerm::diagonal(self.u * doubles as f64));
        let apbc = self.lattice.has_antiperiodic();
        for bond in self.lattice.bonds() {
            let boundary_sign = if bond.wraps && apbc && self.wrap_is_antiperiodic(bond.a, bond.b) {
                -1.0
            } else {
                1.0
            };
            for bit in [1u8, 2u8] {
                for (from, to) in [(bond.a, bond.b), (bond.b, bond.a)] {
                    let (sf, st) = (x[from], x[to]);
                    if sf & bit == 0 || st & bit != 0 {
                        continue;
                    }
                    let (lo, hi) = if from < to { (from, to) } else { (to, from) };
                    let between = x.as_slice()[lo + 1..hi].iter().filter(|&&s| s & bit != 0).count();
                    let parity = if between % 2 == 0 { 1.0 } else { -1.0 };
                    out.push(ConnectedTerm {
                        changes: smallvec![(from, sf ^ bit), (to, st ^ bit)],
                        element: -self.t * parity * boundary_sign,
                    });
                }
            }
        }
    }

    /// Whether the axis crossed by the wrap bond `(a, b)` is antiperiodic.
    fn wrap_is_antiperiodic(&self, a: usize, b: usize) -> bool {
        let ra = self.lattice.coords(a);
        let rb = self.lattice.coords(b);
        ra.iter()
            .zip(&rb)
            .zip(self.lattice.boundary())
            .any(|((p, q), bc)| p != q && *bc == Boundary::Antiperiodic)
    }
}
