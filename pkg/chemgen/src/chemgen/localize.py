"""Edmiston-Ruedenberg orbital localization by Jacobi sweeps.

Maximizes the electronic self-repulsion sum_i (ii|ii) over 2x2 rotations.
For a pair rotation by gamma the objective is exactly a0 + a1 cos(4 gamma)
+ b1 sin(4 gamma), so each pair's optimum is solved from four sampled
angles rather than a closed-form coefficient formula; the stationary angle
is exact either way, the sampling just removes sign-convention risk.
"""

from __future__ import annotations

import math

import numpy as np


class LocalizationError(RuntimeError):
    """Jacobi sweeps did not reach a stationary self-repulsion sum."""


def _pair_objective(g, i, j, gamma):
    c, s = math.cos(gamma), math.sin(gamma)
    # Rotated self-repulsions (ii|ii) + (jj|jj) from the pair-block integrals.
    def self_rep(w):          # w = coefficients of the rotated orbital in (i, j)
        idx = (i, j)
        total = 0.0
        for a, wa in zip(idx, w):
            for b, wb in zip(idx, w):
                for cc, wc in zip(idx, w):
                    for d, wd in zip(idx, w):
                        total += wa * wb * wc * wd * g[a, b, cc, d]
        return total
    return self_rep((c, s)) + self_rep((-s, c))


def _best_angle(g, i, j):
    d0 = _pair_objective(g, i, j, 0.0)
    d4 = _pair_objective(g, i, j, math.pi / 4)
    dp = _pair_objective(g, i, j, math.pi / 8)
    dm = _pair_objective(g, i, j, -math.pi / 8)
    a0 = 0.5 * (d0 + d4)
    a1 = 0.5 * (d0 - d4)
    b1 = 0.5 * (dp - dm)
    if a1 == 0.0 and b1 == 0.0:
        return 0.0, 0.0
    gamma = 0.25 * math.atan2(b1, a1)
    gain = a0 + math.hypot(a1, b1) - d0
    return gamma, gain


def _rotate(g, c_mat, i, j, gamma):
    c, s = math.cos(gamma), math.sin(gamma)
    rot = np.eye(g.shape[0])
    rot[i, i] = rot[j, j] = c
    rot[i, j] = -s
    rot[j, i] = s
    for axis in range(4):
        g = np.tensordot(g, rot, axes=([axis], [0]))
        g = np.moveaxis(g, -1, axis)
    c_new = c_mat.copy()
    c_new[:, i] = c * c_mat[:, i] + s * c_mat[:, j]
    c_new[:, j] = -s * c_mat[:, i] + c * c_mat[:, j]
    return g, c_new


def edmiston_ruedenberg(c_block: np.ndarray, eri_ao: np.ndarray,
                        max_sweeps: int = 600, tol: float = 1e-9):
    """Localize the orbitals in ``c_block`` (AO x n) among themselves.

    Returns (localized coefficients, final self-repulsion sum).  Raises
    LocalizationError if sweeps stop improving before reaching tolerance.
    The stationarity tolerance is relative to the self-repulsion scale;
    near-degenerate diffuse orbitals (stretched geometries) otherwise creep
    along flat ridges for thousands of sweeps without changing anything
    physical.
    """
    n = c_block.shape[1]
    if n <= 1:
        g = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri_ao, c_block, c_block,
                      c_block, c_block, optimize=True)
        return c_block.copy(), float(sum(g[i, i, i, i] for i in range(n)))
    g = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri_ao, c_block, c_block,
                  c_block, c_block, optimize=True)
    c_mat = c_block.copy()
    scale = max(1.0, sum(abs(g[i, i, i, i]) for i in range(n)))
    for _ in range(max_sweeps):
        max_gain = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                gamma, gain = _best_angle(g, i, j)
                if gain > tol * scale:
                    g, c_mat = _rotate(g, c_mat, i, j, gamma)
                    max_gain = max(max_gain, gain)
        if max_gain <= tol * scale:
            return c_mat, float(sum(g[i, i, i, i] for i in range(n)))
    raise LocalizationError(
        f"Jacobi sweeps still improving after {max_sweeps} passes "
        f"(last gain {max_gain:.3e})")


def self_repulsion(c_block: np.ndarray, eri_ao: np.ndarray) -> float:
    """sum_i (ii|ii) of the given orbitals (diagnostic)."""
    total = 0.0
    for i in range(c_block.shape[1]):
        ci = c_block[:, i]
        total += float(np.einsum("p,q,r,s,pqrs->", ci, ci, ci, ci, eri_ao,
                                 optimize=True))
    return total
