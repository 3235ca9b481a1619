"""Application of the second-quantized Hamiltonian to sector state vectors.

The production path is a string-driven sigma-vector algorithm over the
spin-summed excitation operators.  With E_pq = sum_sigma c+_{p,sigma}
c_{q,sigma} and chemists' integrals (pq|rs),

    H = E_core + sum_pq h'_pq E_pq + 1/2 sum_pqrs (pq|rs) E_pq E_rs,
    h'_pq = h_pq - 1/2 sum_r (pr|rq),

which evaluates in three passes: gather D_B = Ê_B psi over symmetrized
unordered pairs B, one real GEMM T = g~ D (complex vectors are viewed as
interleaved real pairs so the contraction stays in dgemm), and a scatter
sigma += Ê_A T_A.  A dense Slater-Condon matrix builder provides the
independent brute-force route for small sectors.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .detspace import SectorBasis, hop_sign, occupied_orbitals
from .errors import DomainError
from .integrals import MolecularHamiltonian, pair_index

__all__ = [
    "StateVector",
    "HamiltonianAction",
    "apply_h",
    "diagonal",
    "hf_determinant_energy",
    "dense_matrix",
    "matrix_via_action",
]

# Scratch arrays shared by all HamiltonianAction instances (keyed by shape
# and dtype; single-threaded access only — see the module concurrency notes).
_WORKSPACES: dict = {}


class StateVector:
    """Complex amplitudes over a SectorBasis (flat, beta-contiguous)."""

    def __init__(self, sector: SectorBasis, amplitudes: np.ndarray):
        amplitudes = np.asarray(amplitudes)
        if amplitudes.size != sector.dim:
            raise DomainError(
                f"amplitude length {amplitudes.size} != sector dim {sector.dim}")
        self.sector = sector
        self.amplitudes = amplitudes.reshape(-1)

    @classmethod
    def zero(cls, sector: SectorBasis, dtype=np.complex128) -> "StateVector":
        return cls(sector, np.zeros(sector.dim, dtype=dtype))

    @classmethod
    def basis_state(cls, sector: SectorBasis, index: int) -> "StateVector":
        v = np.zeros(sector.dim, dtype=np.complex128)
        v[index] = 1.0
        return cls(sector, v)

    def as_matrix(self) -> np.ndarray:
        """(dim_alpha, dim_beta) view; no copy."""
        return self.amplitudes.reshape(self.sector.dim_a, self.sector.dim_b)

    def copy(self) -> "StateVector":
        return StateVector(self.sector, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return StateVector(self.sector, self.amplitudes / n)

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _build_spin_links(sector: SectorBasis, spin: str):
    """Symmetrized single-excitation tables for one spin channel.

    Off-diagonal pairs (p > q) list strings with q occupied / p empty and
    their hop images; diagonal entries list occupied strings per orbital.
    """
    n = sector.n_orb
    strings = sector.strings(spin)
    rank_of = {int(m): r for r, m in enumerate(strings)}

    tri_ids, offs, src, dst, sgn = [], [0], [], [], []
    for p in range(n):
        for q in range(p):
            tri_ids.append(pair_index(p, q))
            for r, mask in enumerate(strings):
                res = hop_sign(int(mask), q, p)
                if res is None:
                    continue
                s, new_mask = res
                src.append(r)
                dst.append(rank_of[new_mask])
                sgn.append(float(s))
            offs.append(len(src))

    d_tri, d_offs, d_ranks = [], [0], []
    for p in range(n):
        d_tri.append(pair_index(p, p))
        d_ranks.extend(sector.occupied_ranks(spin, p).tolist())
        d_offs.append(len(d_ranks))

    as_i64 = lambda x: np.asarray(x, dtype=np.int64)
    return {
        "tri": as_i64(tri_ids), "offs": as_i64(offs),
        "src": as_i64(src), "dst": as_i64(dst),
        "sgn": np.asarray(sgn, dtype=np.float64),
        "d_tri": as_i64(d_tri), "d_offs": as_i64(d_offs),
        "d_ranks": as_i64(d_ranks),
    }


class HamiltonianAction:
    """H applied to vectors of one sector, with reusable workspaces.

    Immutable after construction; safe to share across optimization trials.
    """

    def __init__(self, ham: MolecularHamiltonian, sector: SectorBasis | None = None):
        if sector is None:
            sector = SectorBasis(ham.n_orb, ham.n_alpha, ham.n_beta)
        if (sector.n_orb != ham.n_orb or sector.n_alpha != ham.n_alpha
                or sector.n_beta != ham.n_beta):
            raise DomainError(
                f"sector {sector} inconsistent with integrals "
                f"({ham.n_orb}, {ham.n_alpha}, {ham.n_beta})")
        self.ham = ham
        self.sector = sector
        n = ham.n_orb
        self._ntri = n * (n + 1) // 2

        # 1/2 (pq|rs) over unordered pair indices, plus h' coefficients.
        gh = np.empty((self._ntri, self._ntri))
        reps = [(p, q) for p in range(n) for q in range(p + 1)]
        for (p, q) in reps:
            a = pair_index(p, q)
            for (r, s) in reps:
                gh[a, pair_index(r, s)] = 0.5 * ham.get_h2(p, q, r, s)
        hp = np.zeros(self._ntri)
        for (p, q) in reps:
            hp[pair_index(p, q)] = ham.h1[p, q] - 0.5 * sum(
                ham.get_h2(p, r, r, q) for r in range(n))
        self._gh = gh
        self._hprime = hp

        self._links_a = _build_spin_links(sector, "a")
        self._links_b = _build_spin_links(sector, "b")
        self._diag: np.ndarray | None = None

    def _buffers(self, dtype):
        # Pooled across instances: annealing sweeps build one action per
        # geometry in the same sector and must not multiply the workspaces.
        key = (self._ntri, self.sector.dim_a, self.sector.dim_b,
               np.dtype(dtype).name)
        if key not in _WORKSPACES:
            nbytes = (np.dtype(dtype).itemsize * 2
                      * self._ntri * self.sector.dim_a * self.sector.dim_b)
            if nbytes > 100 * 2**20:
                for other in [k for k, v in _WORKSPACES.items()
                              if v[0].nbytes + v[1].nbytes > 100 * 2**20]:
                    del _WORKSPACES[other]
            shape = (self._ntri, self.sector.dim_a, self.sector.dim_b)
            _WORKSPACES[key] = (np.zeros(shape, dtype=dtype),
                                np.empty(shape, dtype=dtype))
        return _WORKSPACES[key]

    def apply2d(self, psi: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """sigma = H psi for a (dim_a, dim_b) array, including E_core psi."""
        sec = self.sector
        if psi.shape != (sec.dim_a, sec.dim_b):
            raise DomainError(f"state shape {psi.shape} != {(sec.dim_a, sec.dim_b)}")
        psi = np.ascontiguousarray(psi)
        dbuf, tbuf = self._buffers(psi.dtype)
        dbuf[...] = 0.0

        la, lb = self._links_a, self._links_b
        K.sym_gather_rows(psi, dbuf, la["tri"], la["offs"], la["src"], la["dst"], la["sgn"])
        K.diag_gather_rows(psi, dbuf, la["d_tri"], la["d_offs"], la["d_ranks"])
        K.sym_gather_cols(psi, dbuf, lb["tri"], lb["offs"], lb["src"], lb["dst"], lb["sgn"])
        K.diag_gather_cols(psi, dbuf, lb["d_tri"], lb["d_offs"], lb["d_ranks"])

        # T = g~ D through a single real GEMM (complex seen as 2 reals).
        dv = dbuf.view(np.float64).reshape(self._ntri, -1)
        tv = tbuf.view(np.float64).reshape(self._ntri, -1)
        np.dot(self._gh, dv, out=tv)
        tview = tbuf.reshape(self._ntri, sec.dim_a, sec.dim_b)
        for a in range(self._ntri):
            if self._hprime[a] != 0.0:
                tview[a] += self._hprime[a] * psi

        if out is None:
            out = np.empty_like(psi)
        np.multiply(psi, self.ham.core_energy, out=out)
        K.sym_scatter_rows(tview, out, la["tri"], la["offs"], la["src"], la["dst"], la["sgn"])
        K.diag_scatter_rows(tview, out, la["d_tri"], la["d_offs"], la["d_ranks"])
        K.sym_scatter_cols(tview, out, lb["tri"], lb["offs"], lb["src"], lb["dst"], lb["sgn"])
        K.diag_scatter_cols(tview, out, lb["d_tri"], lb["d_offs"], lb["d_ranks"])
        return out

    def apply(self, v: StateVector) -> StateVector:
        if v.sector is not self.sector and (
                v.sector.n_orb, v.sector.n_alpha, v.sector.n_beta) != (
                self.sector.n_orb, self.sector.n_alpha, self.sector.n_beta):
            raise DomainError("state vector sector does not match Hamiltonian")
        sigma = self.apply2d(v.as_matrix())
        return StateVector(self.sector, sigma.reshape(-1))

    def expectation(self, v: StateVector) -> float:
        """<v|H|v> as a real number; asserts the imaginary residual is tiny."""
        hv = self.apply(v)
        val = v.inner(hv)
        scale = max(1.0, abs(val))
        if abs(val.imag) > 1e-10 * scale:
            raise FloatingPointError(f"energy has imaginary residual {val.imag:.3e}")
        return val.real

    def diagonal(self) -> np.ndarray:
        """<det|H|det> for every determinant, flat over the sector."""
        if self._diag is None:
            sec = self.sector
            n = self.ham.n_orb
            jmat = np.empty((n, n))
            kmat = np.empty((n, n))
            for p in range(n):
                for q in range(n):
                    jmat[p, q] = self.ham.get_h2(p, p, q, q)
                    kmat[p, q] = self.ham.get_h2(p, q, q, p)
            hd = np.diag(self.ham.h1).copy()
            ea = self._spin_diag(sec.occupancy("a"), hd, jmat, kmat)
            eb = self._spin_diag(sec.occupancy("b"), hd, jmat, kmat)
            cross = sec.occupancy("a") @ jmat @ sec.occupancy("b").T
            diag = (self.ham.core_energy + ea[:, None] + eb[None, :] + cross)
            self._diag = diag.reshape(-1)
        return self._diag

    @staticmethod
    def _spin_diag(occ, hd, jmat, kmat):
        oj = occ @ jmat
        ok = occ @ kmat
        return occ @ hd + 0.5 * ((oj * occ).sum(axis=1) - (ok * occ).sum(axis=1))


def apply_h(ham: MolecularHamiltonian, v: StateVector) -> StateVector:
    """One-shot H|v> (unnormalized).  Builds a transient action; loops
    should construct a :class:`HamiltonianAction` once and reuse it."""
    return HamiltonianAction(ham, v.sector).apply(v)


def diagonal(ham: MolecularHamiltonian, sector: SectorBasis | None = None) -> np.ndarray:
    return HamiltonianAction(ham, sector).diagonal()


def hf_determinant_energy(ham: MolecularHamiltonian, occupation) -> float:
    """Slater-Condon diagonal energy of a single determinant plus core.

    ``occupation`` is an (alpha_mask, beta_mask) pair of occupation bitmasks.
    This is the independent closed-form route used as an oracle for both
    :func:`diagonal` and ``apply_h`` on unit vectors.
    """
    mask_a, mask_b = occupation
    occ_a = occupied_orbitals(mask_a)
    occ_b = occupied_orbitals(mask_b)
    if len(occ_a) != ham.n_alpha or len(occ_b) != ham.n_beta:
        raise DomainError(
            f"pattern has ({len(occ_a)}, {len(occ_b)}) electrons, "
            f"integrals specify ({ham.n_alpha}, {ham.n_beta})")
    e = ham.core_energy
    for p in occ_a:
        e += ham.h1[p, p]
    for p in occ_b:
        e += ham.h1[p, p]
    for occ in (occ_a, occ_b):
        for p in occ:
            for q in occ:
                if p != q:
                    e += 0.5 * (ham.get_h2(p, p, q, q) - ham.get_h2(p, q, q, p))
    for p in occ_a:
        for q in occ_b:
            e += ham.get_h2(p, p, q, q)
    return float(e)


def _single_element(ham, a, b, common_same, occ_other):
    val = ham.h1[a, b]
    for r in common_same:
        val += ham.get_h2(a, b, r, r) - ham.get_h2(a, r, r, b)
    for r in occ_other:
        val += ham.get_h2(a, b, r, r)
    return val


def _spin_singles(strings, rank_of, n_orb):
    """(src, dst, a, b, sign) for all single hops within one spin channel."""
    out = []
    for r, mask in enumerate(strings):
        mask = int(mask)
        occ = occupied_orbitals(mask)
        for a in occ:
            for b in range(n_orb):
                res = hop_sign(mask, a, b)
                if res is None:
                    continue
                s, new_mask = res
                out.append((r, rank_of[new_mask], a, b, s, mask))
    return out


def dense_matrix(ham: MolecularHamiltonian, sector: SectorBasis | None = None,
                 max_dim: int = 600) -> np.ndarray:
    """Brute-force Slater-Condon matrix for small sectors (oracle path)."""
    if sector is None:
        sector = SectorBasis(ham.n_orb, ham.n_alpha, ham.n_beta)
    if sector.dim > max_dim:
        raise DomainError(f"dense oracle capped at dim {max_dim}, got {sector.dim}")
    n = sector.n_orb
    da, db = sector.dim_a, sector.dim_b
    rank_a = {int(m): r for r, m in enumerate(sector.strings_a)}
    rank_b = {int(m): r for r, m in enumerate(sector.strings_b)}
    hmat = np.zeros((sector.dim, sector.dim))

    def flat(ia, ib):
        return ia * db + ib

    # Diagonal.
    for ia, ma in enumerate(sector.strings_a):
        for ib, mb in enumerate(sector.strings_b):
            hmat[flat(ia, ib), flat(ia, ib)] = hf_determinant_energy(
                ham, (int(ma), int(mb)))

    singles_a = _spin_singles(sector.strings_a, rank_a, n)
    singles_b = _spin_singles(sector.strings_b, rank_b, n)

    # Pure single excitations.
    for (r, r2, a, b, s, mask) in singles_a:
        common = [p for p in occupied_orbitals(mask) if p != a]
        for ib, mb in enumerate(sector.strings_b):
            val = s * _single_element(ham, a, b, common, occupied_orbitals(int(mb)))
            hmat[flat(r2, ib), flat(r, ib)] += val
    for (r, r2, a, b, s, mask) in singles_b:
        common = [p for p in occupied_orbitals(mask) if p != a]
        for ia, ma in enumerate(sector.strings_a):
            val = s * _single_element(ham, a, b, common, occupied_orbitals(int(ma)))
            hmat[flat(ia, r2), flat(ia, r)] += val

    # Opposite-spin doubles.
    for (ra, ra2, a, b, sa, _) in singles_a:
        for (rb, rb2, c, d, sb, _) in singles_b:
            hmat[flat(ra2, rb2), flat(ra, rb)] += sa * sb * ham.get_h2(a, b, c, d)

    # Same-spin doubles: phase from two sequential hops (second sign taken on
    # the intermediate mask); both created-pair orderings enumerated, the
    # annihilated pair a < c once, so each element receives gamma * [(ab|cd)
    # with (b,d) and (d,b)], the antisymmetrized Slater-Condon value.
    def add_same_spin_doubles(strings, rank_of, is_alpha):
        for r, mask0 in enumerate(strings):
            mask0 = int(mask0)
            occ = occupied_orbitals(mask0)
            for i1, a in enumerate(occ):
                for c in occ[i1 + 1:]:
                    for b in range(n):
                        res1 = hop_sign(mask0, a, b)
                        if res1 is None:
                            continue
                        s1, m1 = res1
                        for d in range(n):
                            if d == b or d == a:
                                continue
                            res2 = hop_sign(m1, c, d)
                            if res2 is None:
                                continue
                            s2, m2 = res2
                            r2 = rank_of[m2]
                            val = s1 * s2 * ham.get_h2(a, b, c, d)
                            if is_alpha:
                                for ib in range(db):
                                    hmat[flat(r2, ib), flat(r, ib)] += val
                            else:
                                for ia in range(da):
                                    hmat[flat(ia, r2), flat(ia, r)] += val

    add_same_spin_doubles(sector.strings_a, rank_a, True)
    add_same_spin_doubles(sector.strings_b, rank_b, False)
    return hmat


def matrix_via_action(action: HamiltonianAction, max_dim: int = 4000) -> np.ndarray:
    """Dense H assembled column-by-column from the sigma kernels."""
    dim = action.sector.dim
    if dim > max_dim:
        raise DomainError(f"column assembly capped at dim {max_dim}, got {dim}")
    cols = np.empty((dim, dim))
    e = np.zeros(dim)
    for d in range(dim):
        e[d] = 1.0
        cols[:, d] = action.apply2d(
            e.reshape(action.sector.dim_a, action.sector.dim_b)).reshape(-1)
        e[d] = 0.0
    return cols
