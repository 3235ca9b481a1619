"""Restricted SCF: closed-shell RHF and Roothaan-style ROHF with DIIS."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SCFError(RuntimeError):
    """SCF failed to converge; carries the last energy and error norm."""


@dataclass
class SCFResult:
    energy: float
    mo_coeff: np.ndarray           # columns ordered by orbital energy
    mo_energy: np.ndarray
    n_doubly: int
    n_singly: int
    converged: bool
    iterations: int
    fock_ao: np.ndarray


def _orthogonalizer(s: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(s)
    if np.min(w) < 1e-10:
        raise SCFError(f"near-singular overlap (min eigenvalue {np.min(w):.3e})")
    return u @ np.diag(w ** -0.5) @ u.T


def _coulomb_exchange(eri, dens):
    j = np.einsum("pqrs,rs->pq", eri, dens, optimize=True)
    k = np.einsum("prqs,rs->pq", eri, dens, optimize=True)
    return j, k


class _Diis:
    def __init__(self, depth=8):
        self.depth = depth
        self.focks: list = []
        self.errors: list = []

    def push(self, fock, error):
        self.focks.append(fock.copy())
        self.errors.append(error.copy())
        if len(self.focks) > self.depth:
            self.focks.pop(0)
            self.errors.pop(0)

    def extrapolate(self):
        n = len(self.focks)
        if n < 2:
            return self.focks[-1]
        b = -np.ones((n + 1, n + 1))
        b[n, n] = 0.0
        for i in range(n):
            for j in range(n):
                b[i, j] = np.vdot(self.errors[i], self.errors[j])
        rhs = np.zeros(n + 1)
        rhs[n] = -1.0
        try:
            coef = np.linalg.solve(b, rhs)[:n]
        except np.linalg.LinAlgError:
            return self.focks[-1]
        return sum(c * f for c, f in zip(coef, self.focks))


def _gwh_guess(s, hcore, k=1.75):
    d = np.diag(hcore)
    f = 0.5 * k * s * (d[:, None] + d[None, :])
    np.fill_diagonal(f, d)
    return f


def _rhf_from(fock0, s, hcore, eri, nocc, e_nuc, max_iter, tol):
    x = _orthogonalizer(s)
    fock = fock0
    diis = _Diis()
    energy = 0.0
    err_norm = np.inf
    for it in range(1, max_iter + 1):
        _, c = np.linalg.eigh(x.T @ fock @ x)
        c = x @ c
        dens = 2.0 * c[:, :nocc] @ c[:, :nocc].T
        j, k = _coulomb_exchange(eri, dens)
        fock = hcore + j - 0.5 * k
        new_energy = 0.5 * np.sum(dens * (hcore + fock)) + e_nuc
        error = fock @ dens @ s - s @ dens @ fock
        err_norm = np.max(np.abs(error))
        diis.push(fock, x.T @ error @ x)
        if abs(new_energy - energy) < tol and err_norm < 1e-8:
            mo_e, cc = np.linalg.eigh(x.T @ fock @ x)
            return SCFResult(new_energy, x @ cc, mo_e, nocc, 0, True, it, fock)
        energy = new_energy
        fock = diis.extrapolate()
    raise SCFError(f"RHF not converged in {max_iter} iterations "
                   f"(E = {energy:.10f}, |FDS-SDF| = {err_norm:.2e})")


def rhf(s, hcore, eri, n_elec, e_nuc, max_iter=200, tol=1e-11) -> SCFResult:
    """Closed-shell restricted Hartree-Fock.

    Runs from both the extended-Hueckel and bare-core guesses and keeps the
    lower converged solution; a single guess can land on an excited SCF
    stationary point (N2 does this from the core guess).
    """
    if n_elec % 2:
        raise SCFError("rhf needs an even electron count")
    nocc = n_elec // 2
    best = None
    failure = None
    for guess in (_gwh_guess(s, hcore), hcore):
        try:
            res = _rhf_from(guess, s, hcore, eri, nocc, e_nuc, max_iter, tol)
        except SCFError as exc:
            failure = exc
            continue
        if best is None or res.energy < best.energy:
            best = res
    if best is None:
        raise failure
    return best


def rohf(s, hcore, eri, n_alpha, n_beta, e_nuc, max_iter=300,
         tol=1e-11) -> SCFResult:
    """Restricted open-shell Hartree-Fock (Roothaan effective Fock).

    Coupling: closed-open block from the beta Fock, open-virtual from the
    alpha Fock, all other blocks the average.  Returned orbitals are ordered
    doubly occupied, singly occupied, virtual (by energy within each block).
    """
    if n_alpha < n_beta:
        raise SCFError("rohf expects n_alpha >= n_beta")
    x = _orthogonalizer(s)
    nbf = s.shape[0]
    _, c = np.linalg.eigh(x.T @ hcore @ x)
    c = x @ c
    diis = _Diis()
    energy = 0.0
    err_norm = np.inf
    for it in range(1, max_iter + 1):
        ca = c[:, :n_alpha]
        cb = c[:, :n_beta]
        da = ca @ ca.T
        db = cb @ cb.T
        jt, _ = _coulomb_exchange(eri, da + db)
        _, ka = _coulomb_exchange(eri, da)
        _, kb = _coulomb_exchange(eri, db)
        fa = hcore + jt - ka
        fb = hcore + jt - kb
        new_energy = (0.5 * (np.sum(da * (hcore + fa)) + np.sum(db * (hcore + fb)))
                      + e_nuc)

        # Effective Fock: average everywhere except the closed-open block
        # (beta Fock) and the open-virtual block (alpha Fock).
        fa_mo = c.T @ fa @ c
        fb_mo = c.T @ fb @ c
        feff = 0.5 * (fa_mo + fb_mo)
        closed = slice(0, n_beta)
        open_ = slice(n_beta, n_alpha)
        virt = slice(n_alpha, nbf)
        feff[closed, open_] = fb_mo[closed, open_]
        feff[open_, closed] = fb_mo[open_, closed]
        feff[open_, virt] = fa_mo[open_, virt]
        feff[virt, open_] = fa_mo[virt, open_]

        grad = np.zeros_like(feff)
        grad[closed, open_] = feff[closed, open_]
        grad[closed, virt] = feff[closed, virt]
        grad[open_, virt] = feff[open_, virt]
        err_norm = np.max(np.abs(grad)) if grad.size else 0.0

        if abs(new_energy - energy) < tol and err_norm < 1e-8:
            mo_e = np.diag(feff).copy()
            feff_ao = (s @ c) @ feff @ (s @ c).T
            return SCFResult(new_energy, c, mo_e, n_beta, n_alpha - n_beta,
                             True, it, feff_ao)
        energy = new_energy

        # DIIS in the AO frame so error vectors share a basis across
        # iterations: F_ao = (S C) F_mo (S C)^T since C^-1 = C^T S.
        feff_ao = (s @ c) @ feff @ (s @ c).T
        dens = da + db
        error = feff_ao @ dens @ s - s @ dens @ feff_ao
        diis.push(feff_ao, x.T @ error @ x)
        feff_ao = diis.extrapolate()
        mo_e, u = np.linalg.eigh(x.T @ feff_ao @ x)
        c = x @ u
    raise SCFError(f"ROHF not converged in {max_iter} iterations "
                   f"(E = {energy:.10f}, grad = {err_norm:.2e})")
