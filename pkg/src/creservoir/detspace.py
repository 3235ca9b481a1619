"""Enumeration and indexing of fixed-(n_alpha, n_beta) determinant spaces.

A determinant is a pair of spin strings, one per spin channel, each an
occupation bitmask over the spatial orbitals (bit p set = orbital p occupied
by an electron of that spin).  Strings of a given electron count are ordered
ascending by their integer value, which for fixed popcount coincides with the
colexicographic order of the occupied-orbital sets; ranking therefore uses
the combinatorial number system and is order-preserving.

The composite index of a determinant is ``rank_alpha * dim_beta + rank_beta``
so that amplitudes form a (dim_alpha, dim_beta) matrix with beta contiguous.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

__all__ = [
    "SectorBasis",
    "enumerate_sector",
    "rank_string",
    "unrank_string",
    "hop_sign",
    "occupied_orbitals",
]


def occupied_orbitals(mask: int) -> list[int]:
    """Occupied orbital indices of a bitmask, ascending."""
    orbs = []
    p = 0
    while mask:
        if mask & 1:
            orbs.append(p)
        mask >>= 1
        p += 1
    return orbs


def rank_string(mask: int) -> int:
    """Colexicographic rank of a bitmask among all masks of equal popcount."""
    r = 0
    for i, p in enumerate(occupied_orbitals(mask)):
        r += math.comb(p, i + 1)
    return r


def unrank_string(index: int, n_electrons: int) -> int:
    """Inverse of :func:`rank_string` for a given electron count."""
    mask = 0
    rem = index
    for k in range(n_electrons, 0, -1):
        # Largest p with C(p, k) <= rem; positions below k-1 are impossible.
        p = k - 1
        while math.comb(p + 1, k) <= rem:
            p += 1
        rem -= math.comb(p, k)
        mask |= 1 << p
    return mask


def hop_sign(mask: int, p: int, q: int) -> tuple[int, int] | None:
    """Move an electron from orbital ``p`` to ``q`` within one spin string.

    Returns ``(sign, new_mask)`` with ``sign = (-1)**k`` where ``k`` counts
    occupied orbitals strictly between ``p`` and ``q``.  Returns ``None``
    when the hop does not apply (``p`` empty or ``q`` occupied) — a signal,
    not a failure.
    """
    if not (mask >> p) & 1 or (mask >> q) & 1:
        return None
    lo, hi = (p, q) if p < q else (q, p)
    between = mask & (((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1))
    sign = -1 if bin(between).count("1") & 1 else 1
    return sign, (mask ^ (1 << p)) | (1 << q)


def _enumerate_strings(n_orb: int, n_elec: int) -> np.ndarray:
    """All masks of popcount ``n_elec`` over ``n_orb`` bits, ascending."""
    count = math.comb(n_orb, n_elec)
    out = np.zeros(count, dtype=np.uint32)
    if n_elec == 0:
        return out
    x = (1 << n_elec) - 1
    for i in range(count):
        out[i] = x
        if i + 1 < count:
            # Gosper's hack: next mask of equal popcount.
            u = x & -x
            v = x + u
            x = v | (((x ^ v) // u) >> 2)
    return out


class SectorBasis:
    """Immutable basis of all determinants with fixed (n_alpha, n_beta).

    Attributes
    ----------
    strings_a, strings_b : uint32 arrays of the spin strings, ascending.
    dim_a, dim_b, dim : per-spin counts and total dimension.
    """

    def __init__(self, n_orb: int, n_alpha: int, n_beta: int):
        for n in (n_alpha, n_beta):
            if not 0 <= n <= n_orb:
                raise DomainError(
                    f"electron count {n} outside [0, {n_orb}]"
                )
        self.n_orb = n_orb
        self.n_alpha = n_alpha
        self.n_beta = n_beta
        self.strings_a = _enumerate_strings(n_orb, n_alpha)
        self.strings_b = _enumerate_strings(n_orb, n_beta)
        self.dim_a = len(self.strings_a)
        self.dim_b = len(self.strings_b)
        self.dim = self.dim_a * self.dim_b
        # D x N occupancy matrices; the workhorse for diagonal formulas.
        self._occ_a = self._occupancy(self.strings_a)
        self._occ_b = self._occupancy(self.strings_b)

    def _occupancy(self, strings: np.ndarray) -> np.ndarray:
        occ = np.zeros((len(strings), self.n_orb), dtype=np.float64)
        for p in range(self.n_orb):
            occ[:, p] = (strings >> np.uint32(p)) & np.uint32(1)
        return occ

    def occupancy(self, spin: str) -> np.ndarray:
        """(D_sigma, n_orb) 0/1 matrix of orbital occupations."""
        return self._occ_a if spin == "a" else self._occ_b

    def occupied_ranks(self, spin: str, p: int) -> np.ndarray:
        """Ranks of the strings of one spin that occupy orbital p."""
        occ = self.occupancy(spin)
        return np.nonzero(occ[:, p] > 0.5)[0].astype(np.int64)

    def n_elec(self, spin: str) -> int:
        return self.n_alpha if spin == "a" else self.n_beta

    def strings(self, spin: str) -> np.ndarray:
        return self.strings_a if spin == "a" else self.strings_b

    def rank(self, spin: str, mask: int) -> int:
        """Rank of a string within its spin channel of this sector."""
        if bin(mask).count("1") != self.n_elec(spin):
            raise DomainError(
                f"popcount {bin(mask).count('1')} != n_{spin} = {self.n_elec(spin)}"
            )
        return rank_string(mask)

    def unrank(self, spin: str, index: int) -> int:
        d = self.dim_a if spin == "a" else self.dim_b
        if not 0 <= index < d:
            raise DomainError(f"rank {index} outside [0, {d})")
        return unrank_string(index, self.n_elec(spin))

    def composite_index(self, rank_a: int, rank_b: int) -> int:
        return rank_a * self.dim_b + rank_b

    def determinant_index(self, mask_a: int, mask_b: int) -> int:
        return self.composite_index(self.rank("a", mask_a), self.rank("b", mask_b))

    def __repr__(self):
        return (
            f"SectorBasis(n_orb={self.n_orb}, n_alpha={self.n_alpha}, "
            f"n_beta={self.n_beta}, dim={self.dim})"
        )


def enumerate_sector(n_orb: int, n_alpha: int, n_beta: int) -> SectorBasis:
    """Build the determinant basis of the (n_alpha, n_beta) sector."""
    return SectorBasis(n_orb, n_alpha, n_beta)
