// Energy of a fixed AR-GPS estimated with direct and Metropolis samples,
// next to the full-sum value.

use gpsvmc::ansatz::{init_params, GpsVariant, ModelSpec};
use gpsvmc::hamiltonians::{local_energy_fresh, Hamiltonian, HeisenbergParams};
use gpsvmc::hilbert::{Boundary, Lattice, LocalSpace};
use gpsvmc::oracle::{full_sum_expectation, SectorBasis};
use gpsvmc::sampling::{direct_batch, estimate, rng_for, MetropolisConfig, MetropolisSampler, Provenance};
use gpsvmc::symmetry::GaugeConstraint;

pub fn run_example() -> gpsvmc::Result<()> {
    let lattice = Lattice::square(2, 4, Boundary::Periodic)?;
    let gauge = GaugeConstraint::magnetization(0);
    let h = Hamiltonian::Heisenberg(HeisenbergParams::new(1.0, lattice.clone()));
    let spec = ModelSpec::new(GpsVariant::AR_GPS, LocalSpace::Spin, lattice, 2)?.with_gauge(Some(gauge));
    let model = init_params(spec, 4, 0.5)?;

    let basis = SectorBasis::new(8, LocalSpace::Spin, Some(&gauge))?;
    println!("full sum   {:.5}", full_sum_expectation(&model, &h, &basis));

    let batch = direct_batch(&model, 20_000, 1, 0)?;
    let e: Vec<_> = batch
        .configs
        .iter()
        .map(|x| local_energy_fresh(&model, &h, x))
        .collect();
    let s = estimate(&e, Provenance::Direct)?;
    println!("direct     {:.5} ± {:.5}", s.mean.re, s.std_error);

    let mut mh = MetropolisSampler::random_start(
        MetropolisConfig::default(),
        8,
        LocalSpace::Spin,
        Some(&gauge),
        &mut rng_for(1, 1, 0),
    )?;
    let batch = mh.sample(&model, 20_000, 1, 0);
    let e: Vec<_> = batch
        .configs
        .iter()
        .map(|x| local_energy_fresh(&model, &h, x))
        .collect();
    let s = estimate(&e, Provenance::Metropolis)?;
    println!(
        "metropolis {:.5} ± {:.5}  (τ = {:.1}, acceptance {:.2})",
        s.mean.re,
        s.std_error,
        s.autocorr_time.unwrap_or(f64::NAN),
        batch.acceptance.unwrap_or(f64::NAN)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> gpsvmc::Result<()> {
    run_example()
}
