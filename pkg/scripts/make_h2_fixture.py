"""Regenerate ``src/trotterchem/data/h2_sto3g.json`` with PySCF.

PySCF is only needed here, not by the package:  ``pip install pyscf``.
Spin orbitals are ordered (sigma_g up, sigma_g down, sigma_u up, sigma_u down).
Only the integrals belonging to the four H2 symmetry classes are written; each
value is read from the full spin-orbital tensor, so class agreement is checked
downstream rather than assumed here.
"""

import json
import re
from pathlib import Path

import numpy as np
from pyscf import ao2mo, gto, scf

from trotterchem.fermion_map import H2_CLASSES

BOND_ANGSTROM = 0.7414
OUT = Path(__file__).resolve().parents[1] / "src" / "trotterchem" / "data" / "h2_sto3g.json"


def main() -> None:
    mol = gto.M(atom=f"H 0 0 0; H 0 0 {BOND_ANGSTROM}", basis="sto-3g", unit="Angstrom")
    mf = scf.RHF(mol)
    mf.verbose = 0
    mf.kernel()
    c = mf.mo_coeff
    h1 = c.T @ mf.get_hcore() @ c
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), c.shape[1])  # chemist (pq|rs)

    def spatial(p):
        return (p - 1) // 2

    def spin(p):
        return (p - 1) % 2

    def two(i, j, k, l):
        # h_ijkl = int phi_i*(1) phi_j*(2) phi_k(2) phi_l(1) / r12 = (il|jk)
        if spin(i) != spin(l) or spin(j) != spin(k):
            return 0.0
        return float(eri[spatial(i), spatial(l), spatial(j), spatial(k)])

    members = sorted({m for ms in H2_CLASSES.values() for m in ms})
    doc = {
        "description": "H2, STO-3G, RHF molecular spin orbitals",
        "bond_length_angstrom": BOND_ANGSTROM,
        "nuclear_repulsion": float(mol.energy_nuc()),
        "rhf_energy": float(mf.e_tot),
        "n_orbitals": 4,
        "one_body": [[i, i, float(h1[spatial(i), spatial(i)])] for i in range(1, 5)],
        "two_body": [[*m, two(*m)] for m in members],
    }
    assert np.allclose(h1 - np.diag(np.diag(h1)), 0, atol=1e-12)
    text = json.dumps(doc, indent=2)
    # one integral per line
    text = re.sub(r"\[\s+([^\[\]]+?)\s+\]", lambda m: "[" + " ".join(m.group(1).split()) + "]", text)
    OUT.write_text(text + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
