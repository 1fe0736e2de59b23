// Exact ground-state energies for the three Hamiltonian families.

use std::path::Path;
use std::sync::Arc;

use gpsvmc::hamiltonians::{parse_fcidump, Hamiltonian, HeisenbergParams, HubbardParams};
use gpsvmc::hilbert::{Boundary, Lattice};
use gpsvmc::oracle::exact_ground_state;
use gpsvmc::symmetry::GaugeConstraint;

pub fn run_example() -> gpsvmc::Result<()> {
    let ring = Lattice::chain(10, Boundary::Periodic)?;
    let heisenberg = Hamiltonian::Heisenberg(HeisenbergParams::new(1.0, ring));
    let gs = exact_ground_state(&heisenberg, Some(&GaugeConstraint::magnetization(0)))?;
    println!(
        "Heisenberg ring N=10: E0 = {:.10} ({} states)",
        gs.energy,
        gs.basis.len()
    );

    let chain = Lattice::chain(6, Boundary::Antiperiodic)?;
    let hubbard = Hamiltonian::Hubbard(HubbardParams::new(1.0, 4.0, chain));
    let gs = exact_ground_state(&hubbard, Some(&GaugeConstraint::electrons(3, 3)))?;
    println!(
        "Hubbard N=6 APBC U=4: E0 = {:.10} ({} states)",
        gs.energy,
        gs.basis.len()
    );

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/h2_sto3g.fcidump");
    let ints = parse_fcidump(&path)?;
    let (up, down) = ints.electrons();
    let h2 = Hamiltonian::AbInitio(Arc::new(ints));
    let gs = exact_ground_state(&h2, Some(&GaugeConstraint::electrons(up, down)))?;
    println!("H2 STO-3G: E0 = {:.10}", gs.energy);
    Ok(())
}

#[allow(dead_code)]
fn main() -> gpsvmc::Result<()> {
    run_example()
}
