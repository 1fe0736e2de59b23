//! Stochastic reconfiguration with an RMSProp-style diagonal shift.
//!
//! One step: local energies and log-derivatives on a batch, the quantum
//! geometric tensor `S` and force `g`, the moving average
//! `v ← βv + (1−β)|g|²`, the regularized metric
//! `S_reg = (1−ε)S + ε diag(√v + 1e-8)`, a conjugate-gradient solve of
//! `S_reg δθ = g`, and finally `θ ← θ − η δθ`.

mod cg;
mod qgt;
mod vmc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cg::{conjugate_gradient, preconditioned_cg, CgResult};
pub use qgt::{accumulate_qgt, regularize, QgtEstimate, RegularizedS, DENSE_MAX_PARAMS, SAMPLE_SPACE_MAX_ROWS};
pub use vmc::{exact_batch, sr_update, Sampler, StepReport, TraceWriter, Vmc, TRACE_HEADER};

/// Added to `√v` on the regularizing diagonal.
pub const SHIFT_EPS: f64 = 1e-8;
/// Iterations averaged for the reported final energy.
pub const FINAL_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SrConfig {
    /// Learning rate η.
    pub eta: f64,
    /// Mixing ε between the sampled metric and the diagonal shift.
    pub eps_shift: f64,
    /// Momentum β of the squared-gradient moving average.
    pub beta: f64,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    pub n_iterations: usize,
}

impl Default for SrConfig {
    fn default() -> Self {
        Self::lattice()
    }
}

impl SrConfig {
    /// `η = 0.01`, `ε = 0.1`.
    pub fn lattice() -> Self {
        SrConfig {
            eta: 0.01,
            eps_shift: 0.1,
            beta: 0.9,
            solver_tol: 1e-6,
            solver_max_iter: 500,
            n_iterations: 1000,
        }
    }

    /// `η = 0.04`, `ε = 0.01`.
    pub fn ab_initio() -> Self {
        SrConfig {
            eta: 0.04,
            eps_shift: 0.01,
            ..Self::lattice()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::config("optimizer.eta", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.eps_shift) {
            return Err(Error::config("optimizer.eps_shift", "must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::config("optimizer.beta", "must lie in [0, 1)"));
        }
        if !(self.solver_tol > 0.0) || self.solver_max_iter == 0 {
            return Err(Error::config(
                "optimizer.solver_tol",
                "tolerance and iteration cap must be positive",
            ));
        }
        Ok(())
    }
}

/// Optimizer memory carried between steps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SrState {
    /// Moving average of squared gradient components; starts at zero.
    pub v: Vec<f64>,
    /// Previous solution, used as the CG starting point.
    pub prev: Vec<f64>,
    pub iteration: usize,
}

impl SrState {
    pub fn new(n_params: usize) -> Self {
        SrState {
            v: vec![0.0; n_params],
            prev: vec![0.0; n_params],
            iteration: 0,
        }
    }
}

/// `v ← βv + (1−β)|g|²` elementwise.
pub fn update_moving_average(v: &mut [f64], g: &[f64], beta: f64) {
    assert_eq!(v.len(), g.len());
    for (vk, gk) in v.iter_mut().zip(g) {
        *vk = beta * *vk + (1.0 - beta) * gk * gk;
    }
}

#[cfg(test)]
mod tests;
