//! Exact diagonalization and full-summation references for small systems.

mod lanczos;
mod lookup;
mod references;

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonians::{local_energy_fresh, Hamiltonian};
use crate::hilbert::{enumerate_sector, Configuration, LocalSpace};
use crate::symmetry::GaugeConstraint;
use crate::wavefunction::Wavefunction;

pub use lanczos::lanczos_ground_state;
pub use lookup::LookupModel;
pub use references::{reference_energy, ReferenceEntry, REFERENCES};

/// Largest sector diagonalized with the dense solver by default.
pub const DENSE_LIMIT: usize = 512;
/// Largest sector accepted at all.
pub const SECTOR_LIMIT: usize = 1 << 24;

/// Configurations of a sector with their row indices.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    configs: Vec<Configuration>,
    index: HashMap<Configuration, usize>,
    local: LocalSpace,
}

impl SectorBasis {
    pub fn new(n: usize, local: LocalSpace, gauge: Option<&GaugeConstraint>) -> Result<Self> {
        let configs = enumerate_sector(n, local.dim(), gauge)?;
        let index = configs.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(SectorBasis { configs, index, local })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn index_of(&self, x: &Configuration) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn local_space(&self) -> LocalSpace {
        self.local
    }
}

/// Sparse symmetric matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pub dim: usize,
    pub row_start: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        for r in 0..self.dim {
            let mut acc = 0.0;
            for k in self.row_start[r]..self.row_start[r + 1] {
                acc += self.vals[k] * v[self.cols[k]];
            }
            out[r] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_start[r]..self.row_start[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

/// `H_{x'x}` on the sector; rows are `x'`. Fails if a connected term leaves the sector.
pub fn hamiltonian_matrix(h: &Hamiltonian, basis: &SectorBasis) -> Result<SparseMatrix> {
    if h.local_space() != basis.local || h.n_sites() != basis.configs.first().map_or(0, |c| c.len()) {
        return Err(Error::Hamiltonian("Hamiltonian and sector do not match".into()));
    }
    let dim = basis.len();
    let mut triples: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
    let mut terms = Vec::new();
    for (col, x) in basis.configs.iter().enumerate() {
        terms.clear();
        h.connected_into(x, &mut terms);
        for t in &terms {
            let row = if t.is_diagonal() {
                col
            } else {
                basis
                    .index_of(&t.target(x))
                    .ok_or_else(|| Error::Hamiltonian(format!("term from {x} leaves the sector")))?
            };
            triples[row].push((col, t.element));
        }
    }
    let mut row_start = vec![0];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for mut row in triples {
        row.sort_by_key(|e| e.0);
        let mut last: Option<usize> = None;
        for (c, v) in row {
            if last == Some(c) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                last = Some(c);
            }
        }
        row_start.push(cols.len());
    }
    Ok(SparseMatrix {
        dim,
        row_start,
        cols,
        vals,
    })
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Normalized; the largest-magnitude entry is positive.
    pub vector: Vec<f64>,
    pub basis: SectorBasis,
}

impl GroundState {
    pub fn amplitude(&self, x: &Configuration) -> f64 {
        self.basis.index_of(x).map_or(0.0, |i| self.vector[i])
    }
}

pub(crate) fn fix_phase(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (imax, _) = v.iter().enumerate().fold(
        (0, 0.0f64),
        |(bi, bv), (i, x)| if x.abs() > bv + 1e-12 { (i, x.abs()) } else { (bi, bv) },
    );
    let s = if v[imax] < 0.0 { -1.0 / norm } else { 1.0 / norm };
    for x in v.iter_mut() {
        *x *= s;
    }
}

pub fn dense_ground_state(h: &Hamiltonian, basis: SectorBasis) -> Result<GroundState> {
    let m = hamiltonian_matrix(h, &basis)?.to_dense();
    let eig = SymmetricEigen::new(m);
    let (k, &energy) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Hamiltonian("empty sector".into()))?;
    let mut vector: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    fix_phase(&mut vector);
    Ok(GroundState { energy, vector, basis })
}

/// Lowest eigenpair: dense for sectors up to [`DENSE_LIMIT`], Lanczos otherwise.
pub fn exact_ground_state(h: &Hamiltonian, gauge: Option<&GaugeConstraint>) -> Result<GroundState> {
    let basis = SectorBasis::new(h.n_sites(), h.local_space(), gauge)?;
    if basis.len() > SECTOR_LIMIT {
        return Err(Error::SectorTooLarge {
            size: basis.len() as u128,
            limit: SECTOR_LIMIT as u128,
        });
    }
    if basis.len() <= DENSE_LIMIT {
        dense_ground_state(h, basis)
    } else {
        lanczos_ground_state(h, basis)
    }
}

/// Normalized `|ψ(x)|²` over the sector and the raw sum `Σ_x |ψ(x)|²`.
pub fn exact_distribution<W: Wavefunction>(model: &W, basis: &SectorBasis) -> (Vec<f64>, f64) {
    let logs: Vec<f64> = basis.configs.iter().map(|x| 2.0 * model.log_amplitude(x).re).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = w.iter().sum();
    let raw = s * max.exp();
    (w.into_iter().map(|v| v / s).collect(), raw)
}

/// `Σ_x |ψ(x)|² E_loc(x) / Σ_x |ψ(x)|²` over the sector.
pub fn full_sum_expectation<W: Wavefunction>(model: &W, h: &Hamiltonian, basis: &SectorBasis) -> f64 {
    let (p, _) = exact_distribution(model, basis);
    basis
        .configs
        .iter()
        .zip(&p)
        .filter(|(_, &w)| w > 0.0)
        .map(|(x, &w)| w * local_energy_fresh(model, h, x).re)
        .sum()
}
