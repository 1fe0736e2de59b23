// Lattices, bonds, the zig-zag ordering and fixed-quantum-number sectors.

use gpsvmc::hilbert::{displacement, enumerate_sector, zigzag_ordering, Boundary, Lattice};
use gpsvmc::symmetry::GaugeConstraint;

pub fn run_example() -> gpsvmc::Result<()> {
    let lattice = Lattice::square(4, 4, Boundary::Periodic)?;
    let wrapping = lattice.bonds().iter().filter(|b| b.wraps).count();
    println!(
        "4x4 torus: {} bonds, {wrapping} across the boundary",
        lattice.bonds().len()
    );
    println!("zig-zag order: {:?}", zigzag_ordering(&lattice)?.sequence());
    println!("displacement 0 -> 10: {:?}", displacement(&lattice, 10, 0));

    let sz0 = enumerate_sector(16, 2, Some(&GaugeConstraint::magnetization(0)))?;
    println!("spin sector Sz = 0: {} of {} states", sz0.len(), 1 << 16);
    let half = enumerate_sector(8, 4, Some(&GaugeConstraint::electrons(4, 4)))?;
    println!("8 orbitals, 4 up + 4 down: {} states", half.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> gpsvmc::Result<()> {
    run_example()
}
