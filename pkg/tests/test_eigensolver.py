import numpy as np
import pytest

from creservoir.ansatz import AnsatzSpec, initial_state, propagate
from creservoir.detspace import SectorBasis
from creservoir.eigensolver import (SpectrumResult, infidelity, lowest_states,
                                    same_spin_gap)
from creservoir.errors import ConvergenceError, DomainError, InsufficientStates
from creservoir.hamop import HamiltonianAction, StateVector, matrix_via_action
from creservoir.integrals import MolecularHamiltonian, load_fcidump, read_metadata

from conftest import random_hamiltonian, require_data


def test_davidson_matches_dense_small():
    for dims, k in [((4, 2, 2), 3), ((5, 3, 2), 4), ((6, 3, 3), 5)]:
        ham = random_hamiltonian(*dims, seed=sum(dims))
        act = HamiltonianAction(ham)
        res = lowest_states(act, k=k, tol=1e-9)
        dense = np.linalg.eigvalsh(matrix_via_action(act))
        assert np.max(np.abs(res.eigenvalues - dense[:k])) < 1e-10
        assert np.all(np.diff(res.eigenvalues) >= -1e-12)
        assert np.all(res.residual_norms <= 1e-9)


def test_davidson_matches_dense_on_generated_medium_dump():
    (dump,) = require_data("h6_sto6g_er_1.fcidump")
    ham = load_fcidump(dump)
    act = HamiltonianAction(ham)
    assert act.sector.dim == 400
    res = lowest_states(act, k=4, tol=1e-9)
    dense = np.linalg.eigvalsh(matrix_via_action(act))
    assert np.max(np.abs(res.eigenvalues - dense[:4])) < 1e-10


def test_h2_ground_state_matches_generator_reference():
    dump, meta = require_data("h2_sto6g_er_0.7414.fcidump",
                              "h2_sto6g_er_0.7414.meta")
    ham = load_fcidump(dump)
    refs = read_metadata(meta.read_text()).reference_energies
    res = lowest_states(HamiltonianAction(ham), k=1)
    assert abs(res.ground_energy - refs["fci"]) < 1e-8


def test_zero_integral_ground_is_core_energy():
    ham = MolecularHamiltonian(4, 2, 2, core_energy=3.5)
    res = lowest_states(HamiltonianAction(ham), k=1)
    assert abs(res.ground_energy - 3.5) < 1e-10


def test_eigenvector_orthonormality():
    ham = random_hamiltonian(5, 3, 2, seed=17)
    res = lowest_states(HamiltonianAction(ham), k=4, tol=1e-9)
    mat = np.stack([s.amplitudes for s in res.states])
    gram = mat.conj() @ mat.T
    assert np.max(np.abs(gram - np.eye(4))) < 1e-10


def test_spin_flip_sector_symmetry():
    base = random_hamiltonian(4, 3, 1, seed=19)
    flipped = MolecularHamiltonian(4, 1, 3, core_energy=base.core_energy,
                                   h1=base.h1, h2=base.h2)
    e1 = lowest_states(HamiltonianAction(base), k=3, tol=1e-9).eigenvalues
    e2 = lowest_states(HamiltonianAction(flipped), k=3, tol=1e-9).eigenvalues
    assert np.max(np.abs(e1 - e2)) < 1e-10


def test_variational_bound_against_ansatz():
    ham = random_hamiltonian(4, 2, 2, seed=20)
    act = HamiltonianAction(ham)
    ground = lowest_states(act, k=1).ground_energy
    spec = AnsatzSpec(4, 3)
    psi = initial_state(act.sector)
    rng = np.random.default_rng(0)
    for _ in range(4):
        out = propagate(spec, rng.normal(size=spec.n_params), psi)
        e = act.expectation(out)
        assert e >= ground - 1e-9


def test_convergence_error_carries_residuals():
    ham = random_hamiltonian(5, 3, 2, seed=23)
    with pytest.raises(ConvergenceError) as err:
        lowest_states(HamiltonianAction(ham), k=2, tol=1e-12, max_iter=2)
    assert err.value.residuals is not None


def test_k_out_of_range():
    ham = random_hamiltonian(3, 2, 1, seed=2)
    with pytest.raises(DomainError):
        lowest_states(HamiltonianAction(ham), k=0)
    with pytest.raises(DomainError):
        lowest_states(HamiltonianAction(ham), k=100)


def test_infidelity_limits():
    sec = SectorBasis(4, 2, 2)
    v = StateVector.basis_state(sec, 3)
    w = StateVector.basis_state(sec, 5)
    assert infidelity(v, v) == 0.0
    assert infidelity(v, w) == 1.0


def test_same_spin_gap_skips_triplet():
    # H2: first excited state is the triplet; the gap must skip to the
    # second singlet.
    (dump,) = require_data("h2_sto6g_er_0.7414.fcidump")
    ham = load_fcidump(dump)
    res = lowest_states(HamiltonianAction(ham), k=4, tol=1e-9)
    assert abs(res.s2_values[0]) < 1e-6
    assert abs(res.s2_values[1] - 2.0) < 1e-6
    gap = same_spin_gap(res)
    singlets = [i for i in range(1, 4) if abs(res.s2_values[i]) < 1e-6]
    assert gap == pytest.approx(res.eigenvalues[singlets[0]] - res.eigenvalues[0])


def test_same_spin_gap_synthetic_two_level():
    vals = np.array([-2.0, -1.4])
    sec = SectorBasis(2, 1, 1)
    states = [StateVector.basis_state(sec, 0), StateVector.basis_state(sec, 1)]
    spec = SpectrumResult(vals, states, np.array([0.0, 0.0]),
                          np.zeros(2))
    assert same_spin_gap(spec) == pytest.approx(0.6)


def test_same_spin_gap_insufficient_states():
    (dump,) = require_data("h2_sto6g_er_0.7414.fcidump")
    ham = load_fcidump(dump)
    res = lowest_states(HamiltonianAction(ham), k=2, tol=1e-9)
    with pytest.raises(InsufficientStates):
        same_spin_gap(res)


def test_fci_invariant_across_orbital_bases():
    canonical, localized = require_data("n2_sto6g_1.2.fcidump",
                                        "n2_sto6g_er_1.2.fcidump")
    e_can = lowest_states(HamiltonianAction(load_fcidump(canonical)),
                          k=1, tol=1e-9).ground_energy
    e_loc = lowest_states(HamiltonianAction(load_fcidump(localized)),
                          k=1, tol=1e-9).ground_energy
    assert abs(e_can - e_loc) < 1e-8
