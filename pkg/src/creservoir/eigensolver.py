"""Davidson eigensolver for the lowest sector eigenpairs, plus overlap
diagnostics (infidelity) and the same-spin excitation gap.

Real symmetric problem: integrals are real, so the solver works in float64
and the returned eigenvectors are real states wrapped as StateVectors.
Deterministic by construction: unit-vector guesses on the lowest diagonal
entries, fixed-order Gram-Schmidt, fixed restart policy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import s_squared_expectation
from .detspace import SectorBasis
from .errors import ConvergenceError, DomainError, InsufficientStates
from .hamop import HamiltonianAction, StateVector
from .integrals import MolecularHamiltonian

__all__ = ["SpectrumResult", "lowest_states", "infidelity", "same_spin_gap"]


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray          # ascending, Hartree
    states: list                     # StateVector per eigenvalue
    s2_values: np.ndarray            # <S^2> per state
    residual_norms: np.ndarray
    iterations: int = 0

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> StateVector:
        return self.states[0]


def _orthonormalize(w: np.ndarray, basis: np.ndarray, nb: int) -> float:
    """Two-pass modified Gram-Schmidt of w against basis[:, :nb], in place."""
    for _ in range(2):
        for j in range(nb):
            w -= np.dot(basis[:, j], w) * basis[:, j]
    return float(np.linalg.norm(w))


def lowest_states(ham, sector: SectorBasis | None = None, k: int = 1,
                  tol: float = 1e-8, max_iter: int = 600,
                  max_subspace: int = 30) -> SpectrumResult:
    """k lowest eigenpairs by Davidson iteration with diagonal preconditioning.

    ``ham`` may be a MolecularHamiltonian or a prebuilt HamiltonianAction.
    Raises ConvergenceError (carrying the best residual norms) if the
    iteration cap is reached first.
    """
    action = ham if isinstance(ham, HamiltonianAction) else HamiltonianAction(ham, sector)
    sector = action.sector
    dim = sector.dim
    if k < 1:
        raise DomainError("k must be >= 1")
    if k > dim:
        raise DomainError(f"k = {k} exceeds sector dimension {dim}")
    # Clustered excited states need room: scale the basis cap with k.
    max_subspace = min(max(max_subspace, 8 * k, 2 * k + 2), dim)

    diag = action.diagonal()
    order = np.argsort(diag, kind="stable")

    basis = np.zeros((dim, max_subspace))
    hbasis = np.zeros((dim, max_subspace))
    for i in range(k):
        basis[order[i], i] = 1.0
    nb = k

    def matvec(vec):
        return action.apply2d(vec.reshape(sector.dim_a, sector.dim_b)).reshape(-1)

    for i in range(k):
        hbasis[:, i] = matvec(basis[:, i])

    last_resid = np.full(k, np.inf)
    for iteration in range(1, max_iter + 1):
        smat = basis[:, :nb].T @ hbasis[:, :nb]
        smat = 0.5 * (smat + smat.T)
        vals, vecs = np.linalg.eigh(smat)
        ritz_vals = vals[:k]
        ritz_x = basis[:, :nb] @ vecs[:, :k]
        ritz_hx = hbasis[:, :nb] @ vecs[:, :k]

        residuals = ritz_hx - ritz_x * ritz_vals[None, :]
        last_resid = np.linalg.norm(residuals, axis=0)
        if np.all(last_resid <= tol):
            states = []
            s2 = np.empty(k)
            for i in range(k):
                x = ritz_x[:, i] / np.linalg.norm(ritz_x[:, i])
                sv = StateVector(sector, x.astype(np.complex128))
                states.append(sv)
                s2[i] = s_squared_expectation(sv)
            return SpectrumResult(np.array(ritz_vals), states, s2,
                                  last_resid, iteration)

        if nb + 1 > max_subspace:
            # Restart: collapse onto the leading Ritz vectors (an orthonormal
            # combination of an orthonormal basis — no re-orthogonalization).
            keep = min(max(2 * k + 2, k + 4), nb, max_subspace - 1)
            new_basis = basis[:, :nb] @ vecs[:, :keep]
            new_hbasis = hbasis[:, :nb] @ vecs[:, :keep]
            basis[:, :keep] = new_basis
            hbasis[:, :keep] = new_hbasis
            nb = keep

        added = 0
        for i in range(k):
            if last_resid[i] <= tol or nb >= max_subspace:
                continue
            denom = diag - ritz_vals[i]
            denom = np.where(np.abs(denom) < 1e-8, np.copysign(1e-8, denom + 1e-300), denom)
            w = residuals[:, i] / denom
            nrm = _orthonormalize(w, basis, nb)
            if nrm < 1e-10:
                continue
            basis[:, nb] = w / nrm
            hbasis[:, nb] = matvec(basis[:, nb])
            nb += 1
            added += 1
        if added == 0 and np.any(last_resid > tol):
            # Stagnation safeguard: add the steepest residual unpreconditioned.
            i = int(np.argmax(last_resid))
            w = residuals[:, i].copy()
            nrm = _orthonormalize(w, basis, nb)
            if nrm > 1e-12 and nb < max_subspace:
                basis[:, nb] = w / nrm
                hbasis[:, nb] = matvec(basis[:, nb])
                nb += 1
            else:
                raise ConvergenceError(
                    f"Davidson stagnated at residuals {last_resid}", last_resid)

    raise ConvergenceError(
        f"Davidson did not reach tol {tol} in {max_iter} iterations "
        f"(best residuals {last_resid})", last_resid)


def infidelity(v: StateVector, ground: StateVector) -> float:
    """1 - |<ground|v>|^2, both states taken as given (unit norm expected)."""
    ov = np.vdot(ground.amplitudes, v.amplitudes)
    return float(max(0.0, 1.0 - abs(ov) ** 2))


def same_spin_gap(spectrum: SpectrumResult, s2_tol: float = 1e-6) -> float:
    """E_j - E_0 for the lowest excited state sharing the ground state's S^2."""
    s2_0 = spectrum.s2_values[0]
    for j in range(1, len(spectrum.eigenvalues)):
        if abs(spectrum.s2_values[j] - s2_0) <= s2_tol:
            return float(spectrum.eigenvalues[j] - spectrum.eigenvalues[0])
    raise InsufficientStates(
        f"no excited state with <S^2> within {s2_tol} of {s2_0} among "
        f"{len(spectrum.eigenvalues)} computed states; raise k")
