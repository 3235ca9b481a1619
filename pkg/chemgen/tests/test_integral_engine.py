import math

import numpy as np
import pytest

from chemgen.gaussians import ANGSTROM_TO_BOHR, Molecule, integrals
from chemgen.scf import rhf, rohf

from conftest import mo_transform


def water(bond=0.9572, angle_deg=104.52, basis_rotation=None):
    half = math.radians(angle_deg) / 2
    x, z = bond * math.sin(half), bond * math.cos(half)
    atoms = [("O", np.zeros(3)),
             ("H", np.array([x, 0.0, z]) * ANGSTROM_TO_BOHR),
             ("H", np.array([-x, 0.0, z]) * ANGSTROM_TO_BOHR)]
    if basis_rotation is not None:
        atoms = [(el, basis_rotation @ xyz) for el, xyz in atoms]
    return Molecule(atoms)


def test_hydrogen_atom_sto3g_literature_value():
    mol = Molecule([("H", np.zeros(3))], multiplicity=2)
    s, t, v, eri, _ = integrals(mol, "sto-3g")
    res = rohf(s, t + v, eri, 1, 0, 0.0)
    assert res.energy == pytest.approx(-0.4665819, abs=1e-6)


def test_h2_sto3g_literature_value(h2_sto3g):
    mol, (s, t, v, eri, _) = h2_sto3g
    res = rhf(s, t + v, eri, 2, mol.nuclear_repulsion())
    # Standard restricted result for H2/STO-3G at 0.74 Angstrom.
    assert res.energy == pytest.approx(-1.116759307, abs=1e-8)


def test_n2_sto3g_literature_value():
    mol = Molecule([("N", np.zeros(3)),
                    ("N", np.array([0, 0, 1.0977 * ANGSTROM_TO_BOHR]))])
    s, t, v, eri, _ = integrals(mol, "sto-3g")
    res = rhf(s, t + v, eri, 14, mol.nuclear_repulsion())
    assert res.energy == pytest.approx(-107.4959, abs=2e-3)


def test_overlap_properties(h4_sto6g):
    _mol, (s, t, _v, _eri, _dip) = h4_sto6g
    assert np.max(np.abs(s - s.T)) < 1e-14
    np.testing.assert_allclose(np.diag(s), 1.0, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(s)) > 0
    assert np.all(np.diag(t) > 0)


def test_eri_eightfold_symmetry(h4_sto6g):
    _mol, (_s, _t, _v, eri, _dip) = h4_sto6g
    for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0)]:
        assert np.max(np.abs(eri - eri.transpose(perm))) < 1e-12


def test_rotation_invariance_631g():
    res0 = None
    a, b = 0.53, -0.91
    rot = (np.array([[math.cos(a), -math.sin(a), 0],
                     [math.sin(a), math.cos(a), 0], [0, 0, 1]])
           @ np.array([[1, 0, 0], [0, math.cos(b), -math.sin(b)],
                       [0, math.sin(b), math.cos(b)]]))
    for rotation in (None, rot):
        mol = water(basis_rotation=rotation)
        s, t, v, eri, _ = integrals(mol, "6-31g")
        res = rhf(s, t + v, eri, 10, mol.nuclear_repulsion())
        if res0 is None:
            res0 = res
    assert abs(res.energy - res0.energy) < 1e-9


def test_translation_invariance():
    shift = np.array([1.7, -0.4, 2.2])
    energies = []
    for offset in (np.zeros(3), shift):
        mol = Molecule([("H", offset), ("H", offset + [0, 0, 1.4])])
        s, t, v, eri, _ = integrals(mol, "sto-6g")
        energies.append(rhf(s, t + v, eri, 2, mol.nuclear_repulsion()).energy)
    assert abs(energies[0] - energies[1]) < 1e-10


def test_dipole_centers_match_atoms():
    mol = Molecule([("H", np.zeros(3)), ("H", np.array([0, 0, 4.0]))])
    s, t, v, eri, dip = integrals(mol, "sto-6g")
    # Diagonal dipole elements of atom-centered functions sit on the atoms.
    assert dip[2, 0, 0] == pytest.approx(0.0, abs=1e-6)
    assert dip[2, 1, 1] == pytest.approx(4.0, abs=1e-6)


def test_rohf_o2_triplet_converges():
    mol = Molecule([("O", np.zeros(3)),
                    ("O", np.array([0, 0, 1.21 * ANGSTROM_TO_BOHR]))],
                   multiplicity=3)
    s, t, v, eri, _ = integrals(mol, "sto-6g")
    res = rohf(s, t + v, eri, 9, 7, mol.nuclear_repulsion())
    assert res.converged
    assert -149.3 < res.energy < -148.8
    assert res.n_singly == 2
