// The six GPS variants on a 4×4 lattice: parameter counts, amplitudes of
// one configuration, and a cached two-site update.

use gpsvmc::ansatz::{init_params, GpsVariant, ModelSpec};
use gpsvmc::hilbert::{Boundary, Configuration, Lattice, LocalSpace};

pub fn run_example() -> gpsvmc::Result<()> {
    let lattice = Lattice::square(4, 4, Boundary::Periodic)?;
    let x = Configuration::new((0..16).map(|i| (i % 2) as u8).collect(), LocalSpace::Spin)?;
    println!("{:<18} {:>7} {:>24}", "variant", "params", "log ψ(x)");
    for variant in GpsVariant::ALL {
        let spec = ModelSpec::new(variant, LocalSpace::Spin, lattice.clone(), 4)?;
        let model = init_params(spec, 7, 0.1)?;
        let cache = model.build_cache(&x);
        let (after, _) = model
            .fast_update(&cache, &[(0, 1), (1, 0)])
            .expect("no zero factors at this initialization");
        println!(
            "{:<18} {:>7} {:>24.6}   after swap {:.6}",
            variant.name(),
            model.n_params(),
            cache.log_amplitude(),
            after
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> gpsvmc::Result<()> {
    run_example()
}
