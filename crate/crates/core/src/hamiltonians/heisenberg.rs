use smallvec::smallvec;

use super::ConnectedTerm;
use crate::hilbert::{Configuration, Lattice};

/// `H = J Σ_⟨ij⟩ S_i·S_j` on the nearest-neighbour bonds of `lattice`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergParams {
    pub j: f64,
    pub lattice: Lattice,
    /// Work in the Marshall-rotated basis: exchange elements become `−J/2`.
    pub marshall: bool,
}

impl HeisenbergParams {
    pub fn new(j: f64, lattice: Lattice) -> Self {
        HeisenbergParams {
            j,
            lattice,
            marshall: false,
        }
    }

    pub(crate) fn connected_into(&self, x: &Configuration, out: &mut Vec<ConnectedTerm>) {
        let bonds = self.lattice.bonds();
        let exchange = if self.marshall { -0.5 * self.j } else { 0.5 * self.j };
        let mut diag = 0.0;
        let start = out.len();
        out.push(ConnectedTerm::diagonal(0.0));
        for b in bonds {
            let (sa, sb) = (x[b.a], x[b.b]);
            if sa == sb {
                diag += 0.25 * self.j;
            } else {
                diag -= 0.25 * self.j;
                out.push(ConnectedTerm {
                    changes: smallvec![(b.a, sb), (b.b, sa)],
                    element: exchange,
                });
            }
        }
        out[start].element = diag;
    }
}
