//! Variational Monte Carlo with Gaussian process states and their
//! autoregressive, masked and filter-based relatives.
//!
//! The crate is organised bottom-up:
//!
//! * [`hilbert`]: configurations, lattices, orderings, sector enumeration
//! * [`ansatz`]: the six GPS variants, caches and log-derivatives
//! * [`symmetry`]: groups, symmetrization wrappers, gauge constraints
//! * [`hamiltonians`]: Heisenberg, Hubbard and *ab initio* connected elements
//! * [`sampling`]: direct and Metropolis samplers plus estimators
//! * [`optimizer`]: stochastic reconfiguration
//! * [`oracle`]: exact diagonalization and full-summation references
//! * [`cli`]: config-driven runs used by the `gpsvmc` binary

pub mod ansatz;
pub mod cli;
pub mod error;
pub mod hamiltonians;
pub mod hilbert;
pub mod optimizer;
pub mod oracle;
pub mod sampling;
pub mod scalar;
pub mod symmetry;
pub mod wavefunction;

pub use error::{Error, Result};
