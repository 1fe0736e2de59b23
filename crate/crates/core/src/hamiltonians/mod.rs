//! Connected-configuration expansions `H|x⟩ = Σ_{x'} H_{x'x} |x'⟩` and local energies.

mod abinitio;
mod fcidump;
mod heisenberg;
mod hubbard;

use std::sync::Arc;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::hilbert::{Configuration, LocalSpace};
use crate::wavefunction::Wavefunction;

pub use abinitio::{AbInitioIntegrals, DEFAULT_CUTOFF};
pub use fcidump::parse_fcidump;
pub use heisenberg::HeisenbergParams;
pub use hubbard::HubbardParams;

/// One connected configuration. An empty change list is the diagonal term.
/// All supported Hamiltonians are real in the occupation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectedTerm {
    pub changes: SmallVec<[(usize, u8); 4]>,
    pub element: f64,
}

impl ConnectedTerm {
    pub fn diagonal(element: f64) -> Self {
        ConnectedTerm {
            changes: SmallVec::new(),
            element,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.changes.is_empty()
    }

    pub fn target(&self, x: &Configuration) -> Configuration {
        x.with_changes(&self.changes)
    }
}

#[derive(Debug, Clone)]
pub enum Hamiltonian {
    Heisenberg(HeisenbergParams),
    Hubbard(HubbardParams),
    AbInitio(Arc<AbInitioIntegrals>),
}

impl Hamiltonian {
    pub fn n_sites(&self) -> usize {
        match self {
            Hamiltonian::Heisenberg(p) => p.lattice.n_sites(),
            Hamiltonian::Hubbard(p) => p.lattice.n_sites(),
            Hamiltonian::AbInitio(h) => h.norb(),
        }
    }

    pub fn local_space(&self) -> LocalSpace {
        match self {
            Hamiltonian::Heisenberg(_) => LocalSpace::Spin,
            _ => LocalSpace::Fermion,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Hamiltonian::Heisenberg(_) => "heisenberg",
            Hamiltonian::Hubbard(_) => "hubbard",
            Hamiltonian::AbInitio(_) => "abinitio",
        }
    }

    /// Appends every connected term of `x` to `out`. The diagonal term comes
    /// first and is always present.
    pub fn connected_into(&self, x: &Configuration, out: &mut Vec<ConnectedTerm>) {
        match self {
            Hamiltonian::Heisenberg(p) => p.connected_into(x, out),
            Hamiltonian::Hubbard(p) => p.connected_into(x, out),
            Hamiltonian::AbInitio(h) => h.connected_into(x, out),
        }
    }

    pub fn connected(&self, x: &Configuration) -> Vec<ConnectedTerm> {
        let mut out = Vec::new();
        self.connected_into(x, &mut out);
        out
    }
}

/// `E_loc(x) = Σ_{x'} H_{xx'} ψ(x')/ψ(x)` with every ratio taken from the cache.
pub fn local_energy<W: Wavefunction>(engine: &W, h: &Hamiltonian, cache: &W::Cache) -> Complex64 {
    let mut terms = Vec::new();
    local_energy_with(engine, h, cache, &mut terms)
}

/// [`local_energy`] reusing a scratch buffer.
pub fn local_energy_with<W: Wavefunction>(
    engine: &W,
    h: &Hamiltonian,
    cache: &W::Cache,
    terms: &mut Vec<ConnectedTerm>,
) -> Complex64 {
    terms.clear();
    let x = engine.cached_configuration(cache);
    h.connected_into(x, terms);
    let l0 = engine.cached_log_amplitude(cache);
    let mut e = Complex64::new(0.0, 0.0);
    for t in terms.iter() {
        if t.is_diagonal() {
            e += t.element;
        } else {
            let l = engine.log_amplitude_after(cache, &t.changes);
            if l.re > f64::NEG_INFINITY {
                e += t.element * (l - l0).exp();
            }
        }
    }
    e
}

/// Local energy from independent, uncached amplitude evaluations.
pub fn local_energy_fresh<W: Wavefunction>(engine: &W, h: &Hamiltonian, x: &Configuration) -> Complex64 {
    let l0 = engine.log_amplitude(x);
    h.connected(x)
        .iter()
        .map(|t| {
            if t.is_diagonal() {
                Complex64::new(t.element, 0.0)
            } else {
                let l = engine.log_amplitude(&t.target(x));
                if l.re > f64::NEG_INFINITY {
                    t.element * (l - l0).exp()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        })
        .sum()
}
