// Stochastic reconfiguration of an AR-filter-GPS on a 12-site Heisenberg
// ring, compared against exact diagonalization.

use gpsvmc::ansatz::{init_params, GpsVariant, ModelSpec};
use gpsvmc::hamiltonians::{Hamiltonian, HeisenbergParams};
use gpsvmc::hilbert::{Boundary, Lattice, LocalSpace};
use gpsvmc::optimizer::{Sampler, SrConfig, Vmc};
use gpsvmc::oracle::exact_ground_state;
use gpsvmc::symmetry::GaugeConstraint;

pub fn run_example() -> gpsvmc::Result<()> {
    let ring = Lattice::chain(12, Boundary::Periodic)?;
    let gauge = GaugeConstraint::magnetization(0);
    let mut params = HeisenbergParams::new(1.0, ring.clone());
    params.marshall = true;
    let h = Hamiltonian::Heisenberg(params);
    let exact = exact_ground_state(&h, Some(&gauge))?.energy;

    let spec = ModelSpec::new(GpsVariant::AR_FILTER_GPS, LocalSpace::Spin, ring, 8)?.with_gauge(Some(gauge));
    let model = init_params(spec, 0, 0.01)?;
    let mut vmc = Vmc::new(model, h, Sampler::Direct, SrConfig::lattice(), 1024, 0)?;
    vmc.run(150, |r| {
        if r.iteration % 25 == 0 {
            println!("{:>4} {:.6} ± {:.6}", r.iteration, r.stats.mean.re, r.stats.std_error);
        }
        Ok(())
    })?;
    let e = vmc.final_energy().unwrap_or(f64::NAN);
    println!(
        "final {e:.6}, exact {exact:.6}, relative error {:.2e}",
        ((e - exact) / exact).abs()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> gpsvmc::Result<()> {
    run_example()
}
