"""FCIDUMP ingestion: molecular Hamiltonian integrals and metadata sidecars.

Two-electron integrals are kept in chemists' notation (pq|rs), exactly as
FCIDUMP stores them, compressed to the 8-fold-unique compound-index array.
All integrals are real; complex values are rejected at parse time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, ParseError

__all__ = [
    "MolecularHamiltonian",
    "Metadata",
    "parse_fcidump",
    "load_fcidump",
    "write_fcidump",
    "validate",
    "read_metadata",
    "write_metadata",
]

SYMMETRY_TOL = 1e-12
DUPLICATE_TOL = 1e-10


def pair_index(p: int, q: int) -> int:
    """Triangular index of an unordered orbital pair (0-based)."""
    if p < q:
        p, q = q, p
    return p * (p + 1) // 2 + q


def quartet_index(p: int, q: int, r: int, s: int) -> int:
    """8-fold-unique compound index of (pq|rs)."""
    pq = pair_index(p, q)
    rs = pair_index(r, s)
    if pq < rs:
        pq, rs = rs, pq
    return pq * (pq + 1) // 2 + rs


class MolecularHamiltonian:
    """Second-quantized electronic Hamiltonian in a fixed orbital basis.

    Attributes
    ----------
    n_orb : number of spatial orbitals
    n_alpha, n_beta : electron counts per spin channel
    core_energy : scalar offset in Hartree (nuclear repulsion plus any
        frozen-core fold-in)
    h1 : (n_orb, n_orb) real symmetric one-electron integrals
    h2 : 8-fold-unique compound-index array of (pq|rs), chemists' notation
    """

    def __init__(self, n_orb, n_alpha, n_beta, core_energy=0.0,
                 h1=None, h2=None):
        self.n_orb = int(n_orb)
        self.n_alpha = int(n_alpha)
        self.n_beta = int(n_beta)
        self.core_energy = float(core_energy)
        npair = self.n_orb * (self.n_orb + 1) // 2
        self.h1 = np.zeros((n_orb, n_orb)) if h1 is None else np.asarray(h1, float)
        self.h2 = (np.zeros(npair * (npair + 1) // 2) if h2 is None
                   else np.asarray(h2, float))

    def get_h2(self, p, q, r, s) -> float:
        return self.h2[quartet_index(p, q, r, s)]

    def set_h2(self, p, q, r, s, value):
        self.h2[quartet_index(p, q, r, s)] = value

    def h2_dense(self) -> np.ndarray:
        """Expand (pq|rs) to a dense 4-index array (small n_orb only)."""
        n = self.n_orb
        out = np.empty((n, n, n, n))
        for p in range(n):
            for q in range(p + 1):
                for r in range(n):
                    for s in range(r + 1):
                        v = self.get_h2(p, q, r, s)
                        out[p, q, r, s] = v
                        out[q, p, r, s] = v
                        out[p, q, s, r] = v
                        out[q, p, s, r] = v
                        out[r, s, p, q] = v
                        out[s, r, p, q] = v
                        out[r, s, q, p] = v
                        out[s, r, q, p] = v
        return out

    @property
    def n_elec(self) -> int:
        return self.n_alpha + self.n_beta

    def __repr__(self):
        return (f"MolecularHamiltonian(n_orb={self.n_orb}, "
                f"n_alpha={self.n_alpha}, n_beta={self.n_beta})")


@dataclass
class Metadata:
    """Sidecar describing the provenance of a dump file."""

    molecule: str = ""
    basis: str = ""
    geometry: str = ""
    orbital_basis: str = "canonical"  # canonical | localized-er
    reference_energies: dict[str, float] = field(default_factory=dict)
    extras: dict[str, str] = field(default_factory=dict)

    def geometry_value(self) -> float | None:
        """Numeric geometry tag (e.g. bond length in Angstrom) if present."""
        try:
            v = float(self.geometry)
        except (TypeError, ValueError):
            return None
        if v <= 0:
            raise ParseError(f"geometry tag {self.geometry!r} is not a positive length")
        return v


_NAMELIST_RE = re.compile(r"&\w+(.*?)(?:&END|/)", re.DOTALL | re.IGNORECASE)


def _parse_namelist(header: str) -> dict:
    fields = {}
    body = header.replace("\n", " ")
    for item in re.finditer(r"(\w+)\s*=\s*([^=]*?)(?=(?:,?\s*\w+\s*=)|$)", body):
        key = item.group(1).upper()
        raw = item.group(2).strip().rstrip(",").strip()
        fields[key] = raw
    return fields


def parse_fcidump(text: str) -> MolecularHamiltonian:
    """Parse FCIDUMP content into a :class:`MolecularHamiltonian`.

    Records with all indices zero set the core energy; (i,j,0,0) fill h1;
    full quartets fill h2 with symmetry completion.  ORBSYM/ISYM are parsed
    and ignored.
    """
    m = _NAMELIST_RE.search(text)
    if not m:
        raise ParseError("missing &FCI ... / namelist header")
    fields = _parse_namelist(m.group(1))
    try:
        n_orb = int(fields["NORB"])
        n_elec = int(fields["NELEC"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"namelist lacks valid NORB/NELEC: {exc}") from exc
    try:
        ms2 = int(fields.get("MS2", "0"))
    except ValueError as exc:
        raise ParseError(f"bad MS2 field: {exc}") from exc
    if (n_elec + ms2) % 2 != 0:
        raise ParseError(f"NELEC={n_elec}, MS2={ms2} do not split into spins")
    n_alpha = (n_elec + ms2) // 2
    n_beta = (n_elec - ms2) // 2
    if not (0 < n_alpha + n_beta <= 2 * n_orb) or n_beta < 0 or n_alpha > n_orb:
        raise ParseError(f"electron counts ({n_alpha}, {n_beta}) invalid for NORB={n_orb}")

    ham = MolecularHamiltonian(n_orb, n_alpha, n_beta)
    h1_seen = np.zeros((n_orb, n_orb), dtype=bool)
    h2_seen = np.zeros(ham.h2.shape, dtype=bool)

    for lineno, line in enumerate(text[m.end():].splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 5:
            raise ParseError(f"record line {lineno}: expected 5 fields, got {len(tokens)}")
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
        except ValueError as exc:
            raise ParseError(f"record line {lineno}: bad value {tokens[0]!r}") from exc
        try:
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError as exc:
            raise ParseError(f"record line {lineno}: bad index field") from exc
        for idx in (i, j, k, l):
            if not 0 <= idx <= n_orb:
                raise IndexError(f"record line {lineno}: index {idx} outside [0, {n_orb}]")

        if i == j == k == l == 0:
            ham.core_energy += value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                # (i,0,0,0) records (orbital energies in some dialects): skip.
                continue
            p, q = i - 1, j - 1
            if h1_seen[p, q] and abs(ham.h1[p, q] - value) > DUPLICATE_TOL:
                raise ConsistencyError(
                    f"h1 record ({i},{j}) conflicts: {ham.h1[p, q]} vs {value}")
            ham.h1[p, q] = value
            ham.h1[q, p] = value
            h1_seen[p, q] = h1_seen[q, p] = True
        elif k != 0 and l != 0 and i != 0 and j != 0:
            idx = quartet_index(i - 1, j - 1, k - 1, l - 1)
            if h2_seen[idx] and abs(ham.h2[idx] - value) > DUPLICATE_TOL:
                raise ConsistencyError(
                    f"h2 record ({i},{j},{k},{l}) conflicts: {ham.h2[idx]} vs {value}")
            ham.h2[idx] = value
            h2_seen[idx] = True
        else:
            raise ParseError(f"record line {lineno}: mixed zero/nonzero indices "
                             f"({i},{j},{k},{l})")
    return ham


def load_fcidump(path) -> MolecularHamiltonian:
    return parse_fcidump(Path(path).read_text())


def write_fcidump(ham: MolecularHamiltonian, path=None, threshold=0.0) -> str:
    """Emit FCIDUMP text; values above ``threshold`` in magnitude only.

    Round-trips through :func:`parse_fcidump` exactly (17 significant digits).
    """
    n = ham.n_orb
    ms2 = ham.n_alpha - ham.n_beta
    lines = [f"&FCI NORB={n:4d}, NELEC={ham.n_elec:3d}, MS2={ms2:2d},"]
    lines.append("  ORBSYM=" + ",".join(["1"] * n) + ",")
    lines.append("  ISYM=1,")
    lines.append(" /")

    def fmt(value, i, j, k, l):
        return f" {value: .16E} {i:4d} {j:4d} {k:4d} {l:4d}"

    for p in range(n):
        for q in range(p + 1):
            pq = pair_index(p, q)
            for r in range(p + 1):
                smax = (q if r == p else r) + 1
                for s in range(smax):
                    if pair_index(r, s) > pq:
                        continue
                    v = ham.get_h2(p, q, r, s)
                    if abs(v) > threshold:
                        lines.append(fmt(v, p + 1, q + 1, r + 1, s + 1))
    for p in range(n):
        for q in range(p + 1):
            v = ham.h1[p, q]
            if abs(v) > threshold:
                lines.append(fmt(v, p + 1, q + 1, 0, 0))
    lines.append(fmt(ham.core_energy, 0, 0, 0, 0))
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def validate(ham: MolecularHamiltonian) -> list[str]:
    """Check the structural invariants; returns a list of violation messages.

    The compound-index storage enforces the 8-fold h2 symmetry by
    construction, so only h1 symmetry and electron-count sanity can fail
    for parsed data; dense h1 passed in by hand is checked entrywise.
    """
    violations = []
    n = ham.n_orb
    for p in range(n):
        for q in range(p):
            d = abs(ham.h1[p, q] - ham.h1[q, p])
            if d > SYMMETRY_TOL:
                violations.append(f"h1 asymmetry at ({q},{p}): |delta| = {d:.3e}")
    if not 0 < ham.n_elec <= 2 * n:
        violations.append(f"electron count {ham.n_elec} outside (0, {2 * n}]")
    if ham.n_alpha < ham.n_beta:
        violations.append(f"n_alpha {ham.n_alpha} < n_beta {ham.n_beta}")
    if not np.all(np.isfinite(ham.h1)):
        violations.append("h1 contains non-finite entries")
    if not np.all(np.isfinite(ham.h2)):
        violations.append("h2 contains non-finite entries")
    if not np.isfinite(ham.core_energy):
        violations.append("core_energy is non-finite")
    return violations


def write_metadata(meta: Metadata, path=None) -> str:
    lines = ["format_version = 1"]
    for key in ("molecule", "basis", "geometry", "orbital_basis"):
        value = getattr(meta, key)
        if value:
            lines.append(f"{key} = {value}")
    for name in sorted(meta.reference_energies):
        lines.append(f"ref_{name} = {meta.reference_energies[name]!r}")
    for key in sorted(meta.extras):
        lines.append(f"{key} = {meta.extras[key]}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def read_metadata(source) -> Metadata:
    """Parse a key/value sidecar document (path or text)."""
    text = source
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        text = Path(source).read_text()
    meta = Metadata()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"metadata line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in ("molecule", "basis", "geometry", "orbital_basis"):
            setattr(meta, key, value)
        elif key.startswith("ref_"):
            try:
                meta.reference_energies[key[4:]] = float(value)
            except ValueError as exc:
                raise ParseError(f"metadata line {lineno}: bad energy {value!r}") from exc
        elif key == "format_version":
            if value.strip() != "1":
                raise ParseError(f"unsupported metadata format_version {value!r}")
        else:
            meta.extras[key] = value
    meta.geometry_value()  # raises on non-positive numeric tags
    return meta
