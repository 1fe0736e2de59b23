"""Regenerates the FCIDUMP fixtures and their FCI reference energies.

Requires PySCF. Run from this directory:

    python3 generate_fixtures.py

Outputs are committed; rerunning should reproduce them up to the last digits
of the printed integrals.
"""
from pyscf import gto, scf, fci, lo, ao2mo
from pyscf.tools import fcidump
import numpy as np


def write(name, mol, coeff, mf, note):
    norb = coeff.shape[1]
    h1 = coeff.T @ mf.get_hcore() @ coeff
    eri = ao2mo.full(mol, coeff)
    fcidump.from_integrals(name + ".fcidump", h1, eri, norb, mol.nelectron,
                           nuc=mol.energy_nuc(), ms=0, tol=1e-14)
    e, _ = fci.direct_spin1.kernel(h1, ao2mo.restore(1, eri, norb), norb,
                                   mol.nelectron, ecore=mol.energy_nuc(),
                                   conv_tol=1e-14)
    return name, norb, mol.nelectron, e, note


rows = []

mol = gto.M(atom="H 0 0 0; H 0 0 0.7414", basis="sto-3g", unit="Angstrom")
mf = scf.RHF(mol).run(conv_tol=1e-13)
rows.append(write("h2_sto3g", mol, mf.mo_coeff, mf,
                  "H2 0.7414 A, STO-3G, canonical RHF orbitals"))

mol = gto.M(atom="; ".join(f"H 0 0 {1.5 * i}" for i in range(4)),
            basis="sto-6g", unit="Angstrom")
mf = scf.RHF(mol).run(conv_tol=1e-13)
loc = lo.Boys(mol, mf.mo_coeff).kernel()
# order localized orbitals along the chain axis
centers = [np.einsum("i,ij,j->", c, mol.intor("int1e_r")[2], c) for c in loc.T]
loc = loc[:, np.argsort(centers)]
# fix orbital signs so nearest-neighbour one-body couplings are negative
hcore = mf.get_hcore()
for i in range(1, loc.shape[1]):
    if loc[:, i - 1] @ hcore @ loc[:, i] > 0:
        loc[:, i] *= -1
rows.append(write("h4_chain_sto6g_local", mol, loc, mf,
                  "linear H4 1.5 A spacing, STO-6G, Foster-Boys localized, ordered along chain"))
rows.append(write("h4_chain_sto6g_canonical", mol, mf.mo_coeff, mf,
                  "linear H4 1.5 A spacing, STO-6G, canonical RHF orbitals"))

with open("fci_references.csv", "w") as f:
    f.write("fixture,norb,nelec,e_fci,provenance\n")
    for name, norb, nelec, e, note in rows:
        f.write(f"{name},{norb},{nelec},{e:.14f},\"PySCF FCI; {note}\"\n")
