"""Molecular integrals over contracted Gaussians (McMurchie-Davidson).

Supports s and p shells, which covers every basis in basis.py.  Integrals
come back in the atomic-orbital basis: overlap, kinetic, nuclear attraction,
electron repulsion in chemists' notation (pq|rs), and dipole (for orbital
centers).  Distances are in Bohr throughout; geometry builders convert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import hyp1f1

from .basis import ATOMIC_NUMBER, shells_for

ANGSTROM_TO_BOHR = 1.8897261254578281

_CART = {"s": [(0, 0, 0)], "p": [(1, 0, 0), (0, 1, 0), (0, 0, 1)]}


@dataclass
class Molecule:
    atoms: list                      # [(element, xyz array in Bohr)]
    charge: int = 0
    multiplicity: int = 1

    @property
    def n_electrons(self) -> int:
        return sum(ATOMIC_NUMBER[el] for el, _ in self.atoms) - self.charge

    @property
    def n_alpha(self) -> int:
        n, m = self.n_electrons, self.multiplicity
        if (n + m - 1) % 2:
            raise ValueError(f"{n} electrons cannot have multiplicity {m}")
        return (n + m - 1) // 2

    @property
    def n_beta(self) -> int:
        return self.n_electrons - self.n_alpha

    def nuclear_repulsion(self) -> float:
        e = 0.0
        for i, (el1, r1) in enumerate(self.atoms):
            for el2, r2 in self.atoms[i + 1:]:
                e += (ATOMIC_NUMBER[el1] * ATOMIC_NUMBER[el2]
                      / np.linalg.norm(np.asarray(r1) - np.asarray(r2)))
        return e


@dataclass
class Shell:
    center: np.ndarray
    l: int
    exps: np.ndarray
    coeffs: np.ndarray               # includes primitive + contracted norms
    atom_index: int = 0


def _double_factorial(n: int) -> int:
    return 1 if n <= 0 else n * _double_factorial(n - 2)


def _normalize_shell(l, exps, coeffs):
    exps = np.asarray(exps, float)
    coeffs = np.asarray(coeffs, float)
    # Primitive norms for a Cartesian component (l, 0, 0).
    prim = ((2 * exps / math.pi) ** 0.75
            * (4 * exps) ** (l / 2.0) / math.sqrt(_double_factorial(2 * l - 1)))
    c = coeffs * prim
    # Contracted self-overlap of the (l,0,0) component.
    p = exps[:, None] + exps[None, :]
    s = (math.pi / p) ** 1.5 * _double_factorial(2 * l - 1) / (2 * p) ** l
    norm = float(np.einsum("i,j,ij->", c, c, s))
    return exps, c / math.sqrt(norm)


def build_shells(mol: Molecule, basis: str) -> list:
    shells = []
    for idx, (el, xyz) in enumerate(mol.atoms):
        for stype, exps, coeffs in shells_for(el, basis):
            l = 0 if stype == "s" else 1
            e, c = _normalize_shell(l, exps, coeffs)
            shells.append(Shell(np.asarray(xyz, float), l, e, c, idx))
    return shells


def basis_functions(shells):
    """[(shell index, (lx, ly, lz))] in shell order, p as x, y, z."""
    funcs = []
    for si, sh in enumerate(shells):
        for comp in _CART["s" if sh.l == 0 else "p"]:
            funcs.append((si, comp))
    return funcs


def _boys(n_max: int, t: np.ndarray) -> np.ndarray:
    """F_n(t) for n = 0..n_max; shape (n_max + 1,) + t.shape."""
    t = np.asarray(t, float)
    out = np.empty((n_max + 1,) + t.shape)
    for n in range(n_max + 1):
        out[n] = hyp1f1(n + 0.5, n + 1.5, -t) / (2 * n + 1)
    return out


def _hermite_e(i, j, t, qx, a, b):
    """Hermite expansion coefficient E_t^{ij}; a, b vectorized."""
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return np.zeros(np.broadcast(a, b).shape)
    if i == j == t == 0:
        return np.exp(-q * qx * qx) * np.ones(np.broadcast(a, b).shape)
    if j == 0:
        return ((1.0 / (2 * p)) * _hermite_e(i - 1, j, t - 1, qx, a, b)
                - (q * qx / a) * _hermite_e(i - 1, j, t, qx, a, b)
                + (t + 1) * _hermite_e(i - 1, j, t + 1, qx, a, b))
    return ((1.0 / (2 * p)) * _hermite_e(i, j - 1, t - 1, qx, a, b)
            + (q * qx / b) * _hermite_e(i, j - 1, t, qx, a, b)
            + (t + 1) * _hermite_e(i, j - 1, t + 1, qx, a, b))


class _ShellPair:
    """Primitive-pair data for a shell pair, E coefficients cached."""

    def __init__(self, sha: Shell, shb: Shell):
        self.sha, self.shb = sha, shb
        a = sha.exps[:, None]
        b = shb.exps[None, :]
        self.a = np.broadcast_to(a, (len(sha.exps), len(shb.exps))).reshape(-1)
        self.b = np.broadcast_to(b, (len(sha.exps), len(shb.exps))).reshape(-1)
        self.cc = np.outer(sha.coeffs, shb.coeffs).reshape(-1)
        self.p = self.a + self.b
        self.center = ((self.a[:, None] * sha.center[None, :]
                        + self.b[:, None] * shb.center[None, :])
                       / self.p[:, None])
        self.ab = sha.center - shb.center
        self._e: dict = {}

    def e(self, dim, i, j, t):
        key = (dim, i, j, t)
        if key not in self._e:
            self._e[key] = _hermite_e(i, j, t, self.ab[dim], self.a, self.b)
        return self._e[key]


def _hermite_r(n_max, p, pc):
    """Hermite Coulomb tensor R_tuv via downward recursion in the Boys order.

    pc has shape (..., 3); returns dict (t, u, v) -> array of R^0_tuv.
    """
    t_arg = p * np.einsum("...i,...i->...", pc, pc)
    boys = _boys(n_max, t_arg)
    minus2p = -2.0 * p
    rn = {}
    for n in range(n_max, -1, -1):
        rn[(0, 0, 0, n)] = (minus2p ** n) * boys[n]

    def get(t, u, v, n):
        if t < 0 or u < 0 or v < 0:
            return 0.0
        key = (t, u, v, n)
        if key in rn:
            return rn[key]
        if t >= 1:
            val = (t - 1) * get(t - 2, u, v, n + 1) + pc[..., 0] * get(t - 1, u, v, n + 1)
        elif u >= 1:
            val = (u - 1) * get(t, u - 2, v, n + 1) + pc[..., 1] * get(t, u - 1, v, n + 1)
        else:
            val = (v - 1) * get(t, u, v - 2, n + 1) + pc[..., 2] * get(t, u, v - 1, n + 1)
        rn[key] = val
        return val

    out = {}
    for t in range(n_max + 1):
        for u in range(n_max + 1 - t):
            for v in range(n_max + 1 - t - u):
                out[(t, u, v)] = get(t, u, v, 0)
    return out


def _components(shell):
    return _CART["s" if shell.l == 0 else "p"]


def one_electron(mol: Molecule, shells) -> tuple:
    """(S, T, V, dipole[3]) matrices over the contracted basis."""
    funcs = basis_functions(shells)
    nbf = len(funcs)
    smat = np.zeros((nbf, nbf))
    tmat = np.zeros((nbf, nbf))
    vmat = np.zeros((nbf, nbf))
    dip = np.zeros((3, nbf, nbf))
    charges = [(ATOMIC_NUMBER[el], np.asarray(r, float)) for el, r in mol.atoms]

    offsets = np.cumsum([0] + [len(_components(sh)) for sh in shells])
    for ia, sha in enumerate(shells):
        for ib, shb in enumerate(shells):
            if ib > ia:
                continue
            pair = _ShellPair(sha, shb)
            pref = (math.pi / pair.p) ** 1.5
            lmax = sha.l + shb.l
            rdicts = [(z, _hermite_r(lmax, pair.p, pair.center - rc[None, :]))
                      for z, rc in charges]
            for ca, la in enumerate(_components(sha)):
                for cb, lb in enumerate(_components(shb)):
                    mu = offsets[ia] + ca
                    nu = offsets[ib] + cb
                    e0 = [pair.e(d, la[d], lb[d], 0) for d in range(3)]
                    # Overlap.
                    smat[mu, nu] = np.dot(pair.cc, pref * e0[0] * e0[1] * e0[2])
                    # Kinetic: 1D pieces against the right-hand function.
                    kin = np.zeros_like(pair.a)
                    for d in range(3):
                        j = lb[d]
                        term = (-2.0 * pair.b ** 2 * pair.e(d, la[d], j + 2, 0)
                                + pair.b * (2 * j + 1) * pair.e(d, la[d], j, 0))
                        if j >= 2:
                            term -= 0.5 * j * (j - 1) * pair.e(d, la[d], j - 2, 0)
                        others = [e0[dd] for dd in range(3) if dd != d]
                        kin += term * others[0] * others[1]
                    tmat[mu, nu] = np.dot(pair.cc, pref * kin)
                    # Dipole (about the origin).
                    for d in range(3):
                        e1 = pair.e(d, la[d], lb[d], 1)
                        px = pair.center[:, d]
                        others = [e0[dd] for dd in range(3) if dd != d]
                        dip[d, mu, nu] = np.dot(
                            pair.cc, pref * (e1 + px * e0[d]) * others[0] * others[1])
                    # Nuclear attraction.
                    acc = np.zeros_like(pair.a)
                    for z, rdict in rdicts:
                        term = np.zeros_like(pair.a)
                        for t in range(la[0] + lb[0] + 1):
                            ex = pair.e(0, la[0], lb[0], t)
                            for u in range(la[1] + lb[1] + 1):
                                ey = pair.e(1, la[1], lb[1], u)
                                for v in range(la[2] + lb[2] + 1):
                                    ez = pair.e(2, la[2], lb[2], v)
                                    term += ex * ey * ez * rdict[(t, u, v)]
                        acc -= z * term
                    vmat[mu, nu] = np.dot(pair.cc, (2 * math.pi / pair.p) * acc)
                    if mu != nu:
                        smat[nu, mu] = smat[mu, nu]
                        tmat[nu, mu] = tmat[mu, nu]
                        vmat[nu, mu] = vmat[mu, nu]
                        dip[:, nu, mu] = dip[:, mu, nu]
    return smat, tmat, vmat, dip


def electron_repulsion(shells) -> np.ndarray:
    """Full (pq|rs) tensor, chemists' notation, 8-fold symmetric."""
    funcs = basis_functions(shells)
    nbf = len(funcs)
    eri = np.zeros((nbf, nbf, nbf, nbf))
    offsets = np.cumsum([0] + [len(_components(sh)) for sh in shells])
    nsh = len(shells)
    pairs = {}
    for i in range(nsh):
        for j in range(i + 1):
            pairs[(i, j)] = _ShellPair(shells[i], shells[j])

    shell_pair_list = [(i, j) for i in range(nsh) for j in range(i + 1)]
    for ij, (i, j) in enumerate(shell_pair_list):
        bra = pairs[(i, j)]
        for kl in range(ij + 1):
            k, l = shell_pair_list[kl]
            ket = pairs[(k, l)]
            lmax = shells[i].l + shells[j].l + shells[k].l + shells[l].l
            # Primitive cross terms: bra index m, ket index n.
            alpha = bra.p[:, None]
            beta = ket.p[None, :]
            rho = alpha * beta / (alpha + beta)
            pq = bra.center[:, None, :] - ket.center[None, :, :]
            rdict = _hermite_r(lmax, rho, pq)
            pref = (2 * math.pi ** 2.5
                    / (alpha * beta * np.sqrt(alpha + beta)))
            weight = pref * np.outer(bra.cc, ket.cc)

            def eri_component(la, lb, lc, ld):
                total = np.zeros_like(weight)
                for t in range(la[0] + lb[0] + 1):
                    e1x = bra.e(0, la[0], lb[0], t)
                    for u in range(la[1] + lb[1] + 1):
                        e1y = bra.e(1, la[1], lb[1], u)
                        for v in range(la[2] + lb[2] + 1):
                            e1z = bra.e(2, la[2], lb[2], v)
                            e1 = e1x * e1y * e1z
                            for tau in range(lc[0] + ld[0] + 1):
                                e2x = ket.e(0, lc[0], ld[0], tau)
                                for nu_ in range(lc[1] + ld[1] + 1):
                                    e2y = ket.e(1, lc[1], ld[1], nu_)
                                    for phi in range(lc[2] + ld[2] + 1):
                                        e2z = ket.e(2, lc[2], ld[2], phi)
                                        sign = (-1.0) ** (tau + nu_ + phi)
                                        e2 = e2x * e2y * e2z * sign
                                        total += (e1[:, None] * e2[None, :]
                                                  * rdict[(t + tau, u + nu_, v + phi)])
                return float(np.sum(weight * total))

            for ca, la in enumerate(_components(shells[i])):
                for cb, lb in enumerate(_components(shells[j])):
                    for cc_, lc in enumerate(_components(shells[k])):
                        for cd, ld in enumerate(_components(shells[l])):
                            mu = offsets[i] + ca
                            nu = offsets[j] + cb
                            lam = offsets[k] + cc_
                            sig = offsets[l] + cd
                            val = eri_component(la, lb, lc, ld)
                            for (m, n, r, s) in ((mu, nu, lam, sig),
                                                 (nu, mu, lam, sig),
                                                 (mu, nu, sig, lam),
                                                 (nu, mu, sig, lam)):
                                eri[m, n, r, s] = val
                                eri[r, s, m, n] = val
    return eri


def integrals(mol: Molecule, basis: str):
    """(S, T, V, ERI, dipole) in the AO basis."""
    shells = build_shells(mol, basis)
    s, t, v, dip = one_electron(mol, shells)
    eri = electron_repulsion(shells)
    return s, t, v, eri, dip
