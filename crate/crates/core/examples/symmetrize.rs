// Projecting an AR-GPS onto C4v×Z2. The normalized form keeps the Born
// distribution summing to one; the projective form does not.

use gpsvmc::ansatz::{init_params, Dtype, GpsVariant, ModelSpec};
use gpsvmc::hilbert::{Boundary, Lattice, LocalSpace};
use gpsvmc::oracle::{exact_distribution, SectorBasis};
use gpsvmc::symmetry::{c4v_z2_group, SymmetrizationKind, Symmetrized};

pub fn run_example() -> gpsvmc::Result<()> {
    let lattice = Lattice::square(3, 3, Boundary::Periodic)?;
    let group = c4v_z2_group(&lattice, LocalSpace::Spin)?;
    let spec = ModelSpec::new(GpsVariant::AR_GPS, LocalSpace::Spin, lattice, 2)?.with_dtype(Dtype::Complex);
    let base = init_params(spec, 1, 0.3)?;
    let basis = SectorBasis::new(9, LocalSpace::Spin, None)?;
    println!("{} operations", group.len());
    for kind in [SymmetrizationKind::Normalized, SymmetrizationKind::Projective] {
        let model = Symmetrized::new(base.clone(), group.clone(), kind)?;
        let (_, sum) = exact_distribution(&model, &basis);
        println!("{kind:?}: Σ|ψ|² = {sum:.12}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> gpsvmc::Result<()> {
    run_example()
}
