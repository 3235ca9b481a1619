"""Layered nearest-neighbor ansatz over determinant space.

Each layer applies three commuting groups to the state: a brickwork group of
hopping rotations on orbital pairs (1,2), (3,4), ..., the interleaved group
on (2,3), (4,5), ..., and finally a phase on every doubly occupied orbital.
A hopping angle is shared between the two spin channels, so a layer carries
(n_orb - 1) hopping parameters plus n_orb on-site parameters.

Hopping rotations act between determinant pairs related by an adjacent hop;
with the alpha-block/beta-block fermionic ordering every such hop carries a
+1 phase, so the kernels are sign-free.  Energy gradients come from an
adjoint reverse sweep with per-layer forward checkpoints (strided when the
full set would exceed the memory cap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .detspace import SectorBasis, rank_string
from .errors import DomainError
from .hamop import HamiltonianAction, StateVector
from .integrals import MolecularHamiltonian

__all__ = [
    "AnsatzSpec",
    "AnsatzEngine",
    "initial_state",
    "initial_masks",
    "parse_occupation_pattern",
    "apply_givens",
    "apply_onsite",
    "propagate",
    "energy",
    "gradient",
    "s_squared_expectation",
]


@dataclass(frozen=True)
class AnsatzSpec:
    """Layer structure: n_orb spatial orbitals, ``layers`` ansatz layers."""

    n_orb: int
    layers: int

    def __post_init__(self):
        if self.n_orb < 1:
            raise DomainError("n_orb must be >= 1")
        if self.layers < 0:
            raise DomainError("layers must be >= 0")

    @property
    def pairs_t(self) -> tuple:
        """Brickwork pairs (0-based): (0,1), (2,3), ..."""
        return tuple((p, p + 1) for p in range(0, self.n_orb - 1, 2))

    @property
    def pairs_tprime(self) -> tuple:
        """Interleaved pairs (0-based): (1,2), (3,4), ..."""
        return tuple((p, p + 1) for p in range(1, self.n_orb - 1, 2))

    @property
    def params_per_layer(self) -> int:
        return 2 * self.n_orb - 1

    @property
    def n_params(self) -> int:
        return self.params_per_layer * self.layers

    def layer_slices(self, layer: int):
        """(T, T', on-site) parameter slices of one 0-based layer."""
        off = layer * self.params_per_layer
        nt = len(self.pairs_t)
        nh = self.n_orb - 1
        return (slice(off, off + nt),
                slice(off + nt, off + nh),
                slice(off + nh, off + self.params_per_layer))

    def check_params(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=np.float64).reshape(-1)
        if params.size != self.n_params:
            raise DomainError(
                f"{params.size} parameters given, spec needs {self.n_params}")
        if not np.all(np.isfinite(params)):
            raise DomainError("parameters must be finite")
        return params


def parse_occupation_pattern(pattern: str) -> tuple[int, int]:
    """Occupation masks from a per-orbital code string.

    One character per orbital, lowest orbital first: '2' doubly occupied,
    'a'/'b' singly occupied by that spin, '0' empty.
    """
    mask_a = mask_b = 0
    for p, ch in enumerate(pattern.strip().lower()):
        if ch == "2":
            mask_a |= 1 << p
            mask_b |= 1 << p
        elif ch == "a":
            mask_a |= 1 << p
        elif ch == "b":
            mask_b |= 1 << p
        elif ch != "0":
            raise DomainError(f"occupation pattern character {ch!r} not in 0/a/b/2")
    return mask_a, mask_b


def initial_masks(sector: SectorBasis) -> tuple[int, int]:
    """Occupation masks of the product start state.

    Doubly occupied orbitals go on the alternating positions 2, 4, 6, ...
    (1-based) first; pairs beyond n_orb // 2 fill the lowest empty orbitals.
    Any excess alpha electrons occupy the lowest remaining empty orbitals.
    """
    n, n_pairs = sector.n_orb, sector.n_beta
    if sector.n_alpha < sector.n_beta:
        raise DomainError("initial state assumes n_alpha >= n_beta")
    doubly = list(range(1, n, 2))[:n_pairs]
    if len(doubly) < n_pairs:
        rest = [p for p in range(n) if p not in doubly]
        doubly += rest[: n_pairs - len(doubly)]
    mask_b = 0
    for p in doubly:
        mask_b |= 1 << p
    mask_a = mask_b
    for _ in range(sector.n_alpha - sector.n_beta):
        p = 0
        while (mask_a >> p) & 1:
            p += 1
        if p >= n:
            raise DomainError("sector infeasible for the product start state")
        mask_a |= 1 << p
    return mask_a, mask_b


def initial_state(sector: SectorBasis, occupation=None) -> StateVector:
    """Unit-amplitude computational determinant starting the ansatz."""
    masks = occupation if occupation is not None else initial_masks(sector)
    if isinstance(masks, str):
        masks = parse_occupation_pattern(masks)
    index = sector.determinant_index(*masks)
    return StateVector.basis_state(sector, index)


class _PairTables:
    """Determinant pairings for one adjacent orbital pair in one sector."""

    def __init__(self, sector: SectorBasis, spin: str, p: int):
        strings = sector.strings(spin)
        rank_of = {int(m): r for r, m in enumerate(strings)}
        side_p, side_q = [], []
        q = p + 1
        for r, mask in enumerate(strings):
            mask = int(mask)
            if (mask >> p) & 1 and not (mask >> q) & 1:
                side_p.append(r)
                side_q.append(rank_of[(mask ^ (1 << p)) | (1 << q)])
        self.rows_p = np.asarray(side_p, dtype=np.int64)
        self.rows_q = np.asarray(side_q, dtype=np.int64)


class AnsatzEngine:
    """Propagation and adjoint differentiation bound to one sector.

    ``checkpoint_bytes`` caps the forward-state cache; above it the engine
    stores strided checkpoints and recomputes the intermediate layers during
    the reverse sweep.
    """

    def __init__(self, spec: AnsatzSpec, sector: SectorBasis,
                 action: HamiltonianAction | None = None,
                 checkpoint_bytes: int = 2 << 30):
        if spec.n_orb != sector.n_orb:
            raise DomainError("spec and sector orbital counts differ")
        self.spec = spec
        self.sector = sector
        self.action = action
        self.checkpoint_bytes = int(checkpoint_bytes)
        self._pairs = {
            (spin, p): _PairTables(sector, spin, p)
            for spin in ("a", "b")
            for p in range(sector.n_orb - 1)
        }
        self._occ = {
            (spin, p): sector.occupied_ranks(spin, p)
            for spin in ("a", "b")
            for p in range(sector.n_orb)
        }

    # -- elementary gates (in place on (dim_a, dim_b) complex arrays) ------

    def givens_inplace(self, psi: np.ndarray, p: int, theta: float, spin: str):
        c, s = math.cos(theta), math.sin(theta)
        t = self._pairs[(spin, p)]
        if spin == "a":
            K.givens_rows(psi, t.rows_p, t.rows_q, c, s)
        else:
            K.givens_cols(psi, t.rows_p, t.rows_q, c, s)

    def hop_inplace(self, psi: np.ndarray, p: int, theta: float):
        """Shared-angle hop on (p, p+1), both spin channels."""
        self.givens_inplace(psi, p, theta, "a")
        self.givens_inplace(psi, p, theta, "b")

    def onsite_inplace(self, psi: np.ndarray, p: int, theta: float):
        ph = complex(math.cos(theta), -math.sin(theta))
        K.phase_block(psi, self._occ[("a", p)], self._occ[("b", p)], ph)

    def apply_layer(self, psi: np.ndarray, params: np.ndarray, layer: int,
                    inverse: bool = False):
        spec = self.spec
        st, sp, su = spec.layer_slices(layer)
        t_par = params[st]
        tp_par = params[sp]
        u_par = params[su]
        sgn = -1.0 if inverse else 1.0
        groups = [
            (spec.pairs_t, t_par),
            (spec.pairs_tprime, tp_par),
        ]
        if inverse:
            for p in range(spec.n_orb):
                self.onsite_inplace(psi, p, sgn * u_par[p])
            for pairs, par in reversed(groups):
                for i in reversed(range(len(pairs))):
                    self.hop_inplace(psi, pairs[i][0], sgn * par[i])
        else:
            for pairs, par in groups:
                for i, (p, _q) in enumerate(pairs):
                    self.hop_inplace(psi, p, sgn * par[i])
            for p in range(spec.n_orb):
                self.onsite_inplace(psi, p, sgn * u_par[p])

    # -- propagation and objective ------------------------------------------

    def propagate2d(self, params: np.ndarray, psi0: np.ndarray) -> np.ndarray:
        params = self.spec.check_params(params)
        psi = np.array(psi0, dtype=np.complex128, copy=True, order="C")
        for layer in range(self.spec.layers):
            self.apply_layer(psi, params, layer)
        return psi

    def _checkpoint_stride(self) -> int:
        per_state = self.sector.dim * 16
        max_states = max(2, self.checkpoint_bytes // max(per_state, 1))
        if self.spec.layers + 1 <= max_states:
            return 1
        return int(math.ceil((self.spec.layers + 1) / max_states))

    def energy_and_gradient(self, params: np.ndarray, psi0: np.ndarray):
        """(E, dE/dtheta) by forward propagation and adjoint reverse sweep."""
        if self.action is None:
            raise DomainError("engine built without a HamiltonianAction")
        spec = self.spec
        params = spec.check_params(params)
        stride = self._checkpoint_stride()

        stored: dict[int, np.ndarray] = {}
        psi = np.array(psi0, dtype=np.complex128, copy=True, order="C")
        stored[0] = psi.copy()
        for layer in range(spec.layers):
            self.apply_layer(psi, params, layer)
            if (layer + 1) % stride == 0 or layer + 1 == spec.layers:
                stored[layer + 1] = psi.copy()

        hpsi = self.action.apply2d(psi)
        e_val = complex(np.vdot(psi, hpsi))
        scale = max(1.0, abs(e_val))
        if abs(e_val.imag) > 1e-10 * scale:
            raise FloatingPointError(f"energy imaginary residual {e_val.imag:.3e}")

        grad = np.zeros(spec.n_params)
        phi = hpsi
        for layer in range(spec.layers - 1, -1, -1):
            st, sp, su = spec.layer_slices(layer)
            u_par = params[su]
            for p in range(spec.n_orb - 1, -1, -1):
                ov = K.occ_block_overlap(phi, psi, self._occ[("a", p)],
                                         self._occ[("b", p)])
                grad[su][p] = 2.0 * ov.imag
                self.onsite_inplace(psi, p, -u_par[p])
                self.onsite_inplace(phi, p, -u_par[p])
            for pairs, sl in ((spec.pairs_tprime, sp), (spec.pairs_t, st)):
                par = params[sl]
                gsl = grad[sl]
                for i in range(len(pairs) - 1, -1, -1):
                    p = pairs[i][0]
                    ta = self._pairs[("a", p)]
                    tb = self._pairs[("b", p)]
                    ov = (K.hop_overlap_rows(phi, psi, ta.rows_p, ta.rows_q)
                          + K.hop_overlap_cols(phi, psi, tb.rows_p, tb.rows_q))
                    gsl[i] = 2.0 * ov.imag
                    self.hop_inplace(psi, p, -par[i])
                    self.hop_inplace(phi, p, -par[i])
            if layer in stored:
                np.copyto(psi, stored[layer])
            elif layer > 0:
                base = (layer // stride) * stride
                np.copyto(psi, stored[base])
                for ll in range(base, layer):
                    self.apply_layer(psi, params, ll)
        return e_val.real, grad

    def energy(self, params: np.ndarray, psi0: np.ndarray) -> float:
        if self.action is None:
            raise DomainError("engine built without a HamiltonianAction")
        psi = self.propagate2d(params, psi0)
        hpsi = self.action.apply2d(psi)
        e_val = complex(np.vdot(psi, hpsi))
        scale = max(1.0, abs(e_val))
        if abs(e_val.imag) > 1e-10 * scale:
            raise FloatingPointError(f"energy imaginary residual {e_val.imag:.3e}")
        return e_val.real


# ---------------------------------------------------------------------------
# Spec-level functional interface.


def _engine(spec: AnsatzSpec, sector: SectorBasis,
            ham: MolecularHamiltonian | HamiltonianAction | None = None) -> AnsatzEngine:
    action = None
    if isinstance(ham, HamiltonianAction):
        action = ham
    elif ham is not None:
        action = HamiltonianAction(ham, sector)
    return AnsatzEngine(spec, sector, action)


def apply_givens(v: StateVector, p: int, q: int, theta: float, spin: str) -> StateVector:
    """Hopping rotation e^{-i theta (c+_p c_q + c+_q c_p)} on one spin channel."""
    if abs(p - q) != 1:
        raise DomainError(f"hopping pair ({p}, {q}) is not adjacent")
    if spin not in ("a", "b"):
        raise DomainError(f"spin must be 'a' or 'b', got {spin!r}")
    lo = min(p, q)
    eng = AnsatzEngine(AnsatzSpec(v.sector.n_orb, 0), v.sector)
    out = np.array(v.as_matrix(), dtype=np.complex128, copy=True, order="C")
    eng.givens_inplace(out, lo, theta, spin)
    return StateVector(v.sector, out.reshape(-1))


def apply_onsite(v: StateVector, p: int, theta: float) -> StateVector:
    """Double-occupancy phase e^{-i theta n_{p,up} n_{p,down}}."""
    eng = AnsatzEngine(AnsatzSpec(v.sector.n_orb, 0), v.sector)
    out = np.array(v.as_matrix(), dtype=np.complex128, copy=True, order="C")
    eng.onsite_inplace(out, p, theta)
    return StateVector(v.sector, out.reshape(-1))


def propagate(spec: AnsatzSpec, params, psi0: StateVector) -> StateVector:
    eng = _engine(spec, psi0.sector)
    out = eng.propagate2d(np.asarray(params, float), psi0.as_matrix())
    return StateVector(psi0.sector, out.reshape(-1))


def energy(spec: AnsatzSpec, params, ham, psi0: StateVector) -> float:
    eng = _engine(spec, psi0.sector, ham)
    return eng.energy(np.asarray(params, float), psi0.as_matrix())


def gradient(spec: AnsatzSpec, params, ham, psi0: StateVector) -> np.ndarray:
    eng = _engine(spec, psi0.sector, ham)
    return eng.energy_and_gradient(np.asarray(params, float), psi0.as_matrix())[1]


# ---------------------------------------------------------------------------
# Total-spin expectation.

_SPLUS_CACHE: dict = {}


def _splus_links(sector: SectorBasis):
    key = (sector.n_orb, sector.n_alpha, sector.n_beta)
    if key in _SPLUS_CACHE:
        return _SPLUS_CACHE[key]
    n = sector.n_orb
    links = []
    for p in range(n):
        a_src, a_dst, a_sgn = [], [], []
        for r, mask in enumerate(sector.strings_a):
            mask = int(mask)
            if (mask >> p) & 1:
                continue
            below = mask & ((1 << p) - 1)
            a_src.append(r)
            a_dst.append(rank_string(mask | (1 << p)))
            a_sgn.append(-1.0 if bin(below).count("1") & 1 else 1.0)
        b_src, b_dst, b_sgn = [], [], []
        for r, mask in enumerate(sector.strings_b):
            mask = int(mask)
            if not (mask >> p) & 1:
                continue
            below = mask & ((1 << p) - 1)
            b_src.append(r)
            b_dst.append(rank_string(mask & ~(1 << p)))
            b_sgn.append(-1.0 if bin(below).count("1") & 1 else 1.0)
        links.append((np.asarray(a_src, dtype=np.int64),
                      np.asarray(a_dst, dtype=np.int64),
                      np.asarray(a_sgn),
                      np.asarray(b_src, dtype=np.int64),
                      np.asarray(b_dst, dtype=np.int64),
                      np.asarray(b_sgn)))
    _SPLUS_CACHE[key] = links
    return links


def s_squared_expectation(v: StateVector) -> float:
    """<v|S^2|v> via S^2 = S_z (S_z + 1) + S_- S_+ in determinant space."""
    sec = v.sector
    sz = 0.5 * (sec.n_alpha - sec.n_beta)
    base = sz * (sz + 1.0)
    if sec.n_beta == 0 or sec.n_alpha == sec.n_orb:
        return float(base)
    dim_a_up = math.comb(sec.n_orb, sec.n_alpha + 1)
    dim_b_dn = math.comb(sec.n_orb, sec.n_beta - 1)
    out = np.zeros((dim_a_up, dim_b_dn), dtype=v.amplitudes.dtype)
    psi = np.ascontiguousarray(v.as_matrix())
    for (a_src, a_dst, a_sgn, b_src, b_dst, b_sgn) in _splus_links(sec):
        if len(a_src) and len(b_src):
            K.accumulate_splus(psi, out, a_src, a_dst, a_sgn, b_src, b_dst, b_sgn)
    return float(base + np.linalg.norm(out) ** 2)
