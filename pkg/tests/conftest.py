import math
from pathlib import Path

import numpy as np
import pytest

from creservoir.detspace import SectorBasis, hop_sign
from creservoir.integrals import MolecularHamiltonian

DATA = Path(__file__).resolve().parent.parent / "data"


def random_hamiltonian(n_orb, n_alpha, n_beta, seed=0, scale=1.0,
                       core=None) -> MolecularHamiltonian:
    """Random real symmetric integrals (8-fold h2 symmetry by storage)."""
    rng = np.random.default_rng(seed)
    ham = MolecularHamiltonian(
        n_orb, n_alpha, n_beta,
        core_energy=rng.normal() if core is None else core)
    a = rng.normal(size=(n_orb, n_orb))
    ham.h1 = (a + a.T) / 2.0
    ham.h2 = scale * rng.normal(size=ham.h2.shape)
    return ham


def dense_hop_generator(sector: SectorBasis, p, q, spin):
    """Dense c+_p c_q + c+_q c_p for one spin channel, built from hop signs."""
    g = np.zeros((sector.dim, sector.dim))
    strings = sector.strings(spin)
    rank = {int(m): r for r, m in enumerate(strings)}
    for r, m in enumerate(strings):
        for (src, dst) in ((q, p), (p, q)):
            res = hop_sign(int(m), src, dst)
            if res is None:
                continue
            s, m2 = res
            r2 = rank[m2]
            if spin == "a":
                for ib in range(sector.dim_b):
                    g[r2 * sector.dim_b + ib, r * sector.dim_b + ib] += s
            else:
                for ia in range(sector.dim_a):
                    g[ia * sector.dim_b + r2, ia * sector.dim_b + r] += s
    return g


def dense_onsite_generator(sector: SectorBasis, p):
    occ_a = sector.occupancy("a")[:, p]
    occ_b = sector.occupancy("b")[:, p]
    return np.diag(np.outer(occ_a, occ_b).reshape(-1))


def dense_circuit(spec, params, sector):
    """Product of dense gate exponentials in application order."""
    from scipy.linalg import expm
    u = np.eye(sector.dim, dtype=complex)
    params = np.asarray(params, float)
    for layer in range(spec.layers):
        st, sp, su = spec.layer_slices(layer)
        for pairs, sl in ((spec.pairs_t, st), (spec.pairs_tprime, sp)):
            par = params[sl]
            for i, (p, q) in enumerate(pairs):
                for spin in ("a", "b"):
                    u = expm(-1j * par[i] * dense_hop_generator(sector, p, q, spin)) @ u
        for p in range(spec.n_orb):
            u = expm(-1j * params[su][p] * dense_onsite_generator(sector, p)) @ u
    return u


def require_data(*names):
    missing = [n for n in names if not (DATA / n).exists()]
    if missing:
        pytest.skip(f"pre-generated dump(s) missing: {missing}")
    return [DATA / n for n in names]
