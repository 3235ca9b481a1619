"""Quantum-resource accounting for the layered ansatz on a square lattice.

Counting convention: every hopping rotation and every on-site ZZ costs two
CNOTs and single-qubit gates are free, giving 2(3N - 2) = 6N - 4 CNOTs per
layer.  The two-row layout places alpha spin-orbitals on row 0 and beta on
row 1, column = orbital index, so every two-qubit operation is between
lattice neighbors and no SWAPs are needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ansatz import AnsatzSpec
from .errors import DomainError

__all__ = ["ResourceEstimate", "estimate", "grid_layout", "layer_schedule"]

CNOTS_PER_TWO_QUBIT_OP = 2


@dataclass
class ResourceEstimate:
    n_orb: int
    layers: int
    cnots_per_layer: int
    total_cnots: int
    schedule_depth_per_layer: int
    grid: dict = field(repr=False, default_factory=dict)


def grid_layout(n_orb: int) -> dict:
    """(orbital, spin) -> (row, column) on the 2 x n_orb lattice.

    Orbitals are 1-based here to match how layouts are reported; spin is
    'a' (row 0) or 'b' (row 1).
    """
    if n_orb < 2:
        raise DomainError("grid layout needs at least 2 orbitals")
    grid = {}
    for p in range(1, n_orb + 1):
        grid[(p, "a")] = (0, p - 1)
        grid[(p, "b")] = (1, p - 1)
    return grid


def layer_schedule(n_orb: int) -> list:
    """Two-qubit operations of one layer as three parallel sublayers.

    Each sublayer is a list of ((row, col), (row, col)) qubit pairs: the
    brickwork hops (both spin rows), the interleaved hops, then the on-site
    ZZ columns.  Within a sublayer no qubit repeats.
    """
    spec = AnsatzSpec(n_orb, 1)
    grid = grid_layout(n_orb)
    sublayers = []
    for pairs in (spec.pairs_t, spec.pairs_tprime):
        ops = []
        for (p, q) in pairs:
            for spin in ("a", "b"):
                ops.append((grid[(p + 1, spin)], grid[(q + 1, spin)]))
        sublayers.append(ops)
    sublayers.append([(grid[(p, "a")], grid[(p, "b")])
                      for p in range(1, n_orb + 1)])
    return sublayers


def estimate(n_orb: int, layers: int) -> ResourceEstimate:
    """CNOT counts and schedule for an ``layers``-deep ansatz on N orbitals."""
    if n_orb < 2:
        raise DomainError("resource estimate needs at least 2 orbitals")
    if layers < 1:
        raise DomainError("layers must be >= 1")
    ops_per_layer = 2 * (n_orb - 1) + n_orb          # hops both spins + on-site
    cnots = CNOTS_PER_TWO_QUBIT_OP * ops_per_layer   # == 6 n_orb - 4
    return ResourceEstimate(
        n_orb=n_orb,
        layers=layers,
        cnots_per_layer=cnots,
        total_cnots=layers * cnots,
        schedule_depth_per_layer=len(layer_schedule(n_orb)),
        grid=grid_layout(n_orb),
    )
