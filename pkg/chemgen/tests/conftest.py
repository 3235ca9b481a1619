import shutil

import numpy as np
import pytest

from chemgen.gaussians import ANGSTROM_TO_BOHR, Molecule, integrals


@pytest.fixture(scope="session")
def h2_sto3g():
    mol = Molecule([("H", np.zeros(3)),
                    ("H", np.array([0.0, 0.0, 0.74 * ANGSTROM_TO_BOHR]))])
    return mol, integrals(mol, "sto-3g")


@pytest.fixture(scope="session")
def h4_sto6g():
    mol = Molecule([("H", np.array([0.0, 0.0, i * ANGSTROM_TO_BOHR]))
                    for i in range(4)])
    return mol, integrals(mol, "sto-6g")


def mo_transform(h, eri, c):
    return (c.T @ h @ c,
            np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, c, c, c, c, optimize=True))


def primary_cli_available() -> bool:
    return shutil.which("creservoir") is not None
