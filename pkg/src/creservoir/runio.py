"""Run-directory persistence: checkpoints, report rows, FCI caches.

Checkpoints are human-readable key/value documents with a format-version
field; parameter arrays are emitted with ``repr`` so float64 values
round-trip exactly and save -> load -> save is byte-identical.  Report rows
use the fixed CSV schema

    geometry,L,cnots,E,E_fci,dE_mEh,infidelity,gap_mEh,wall_s

with energies printed to 12 significant digits.  All outputs are
deterministic for fixed inputs and master seed, except wall-clock fields
(wall_s columns, wall_time checkpoint lines), which are timing data.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError
from .optimize import RunRecord

__all__ = [
    "ReportRow",
    "CSV_HEADER",
    "save_checkpoint",
    "load_checkpoint",
    "write_rows",
    "read_rows",
    "merge_rows",
]

CSV_HEADER = "geometry,L,cnots,E,E_fci,dE_mEh,infidelity,gap_mEh,wall_s"


def _fmt_energy(x: float) -> str:
    return f"{x:.11E}"


@dataclass
class ReportRow:
    geometry: str
    layers: int
    cnots: int
    energy: float
    energy_fci: float
    infidelity: float
    gap_meh: float | None = None
    wall_s: float = 0.0

    @property
    def de_meh(self) -> float:
        return (self.energy - self.energy_fci) * 1000.0

    def to_csv(self) -> str:
        gap = "" if self.gap_meh is None else f"{self.gap_meh:.6f}"
        return ",".join([
            self.geometry,
            str(self.layers),
            str(self.cnots),
            _fmt_energy(self.energy),
            _fmt_energy(self.energy_fci),
            f"{self.de_meh:.6f}",
            f"{self.infidelity:.6E}",
            gap,
            f"{self.wall_s:.3f}",
        ])

    @classmethod
    def from_csv(cls, line: str) -> "ReportRow":
        parts = line.split(",")
        if len(parts) != 9:
            raise ParseError(f"report row has {len(parts)} fields, expected 9")
        return cls(
            geometry=parts[0],
            layers=int(parts[1]),
            cnots=int(parts[2]),
            energy=float(parts[3]),
            energy_fci=float(parts[4]),
            infidelity=float(parts[6]),
            gap_meh=float(parts[7]) if parts[7] else None,
            wall_s=float(parts[8]),
        )


def write_rows(rows: list, path) -> None:
    lines = [CSV_HEADER] + [r.to_csv() for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_rows(path) -> list:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ParseError(f"{path}: missing or wrong CSV header")
    return [ReportRow.from_csv(ln) for ln in lines[1:] if ln.strip()]


def merge_rows(directory) -> list:
    """All rows from *.rows.csv under a directory, keyed by (geometry, L);
    the lowest-energy row wins a key collision.  Sorted by (geometry, L)."""
    directory = Path(directory)
    best: dict = {}
    for path in sorted(directory.glob("*.rows.csv")):
        for row in read_rows(path):
            key = (row.geometry, row.layers)
            if key not in best or row.energy < best[key].energy:
                best[key] = row
    def sort_key(row):
        try:
            g = float(row.geometry)
        except ValueError:
            g = float("inf")
        return (g, row.geometry, row.layers)
    return sorted(best.values(), key=sort_key)


def save_checkpoint(record: RunRecord, path, n_orb: int, n_alpha: int,
                    n_beta: int, layers: int, master_seed: int | None = None,
                    occupation: str = "") -> None:
    lines = [
        "format_version = 1",
        "kind = checkpoint",
        f"n_orb = {n_orb}",
        f"n_alpha = {n_alpha}",
        f"n_beta = {n_beta}",
        f"layers = {layers}",
        f"master_seed = {'' if master_seed is None else master_seed}",
        f"occupation = {occupation}",
        f"strategy = {record.strategy}",
        f"energy = {float(record.energy)!r}",
        f"grad_norm = {float(record.grad_norm)!r}",
        f"iterations = {record.iterations}",
        f"termination = {record.termination}",
        f"seed = {'' if record.seed is None else record.seed}",
        f"wall_s = {float(record.wall_time)!r}",
        "params = " + " ".join(repr(float(p)) for p in record.params),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_checkpoint(path):
    """Returns (RunRecord, info dict with n_orb/n_alpha/n_beta/layers/...)."""
    fields = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    if fields.get("format_version") != "1" or fields.get("kind") != "checkpoint":
        raise ParseError(f"{path}: not a version-1 checkpoint document")
    try:
        params = np.array([float(t) for t in fields["params"].split()])
        record = RunRecord(
            params=params,
            energy=float(fields["energy"]),
            grad_norm=float(fields["grad_norm"]),
            iterations=int(fields["iterations"]),
            termination=fields["termination"],
            strategy=fields.get("strategy", "custom"),
            wall_time=float(fields.get("wall_s", "0") or 0.0),
            seed=int(fields["seed"]) if fields.get("seed") else None,
        )
        info = {
            "n_orb": int(fields["n_orb"]),
            "n_alpha": int(fields["n_alpha"]),
            "n_beta": int(fields["n_beta"]),
            "layers": int(fields["layers"]),
            "master_seed": int(fields["master_seed"]) if fields.get("master_seed") else None,
            "occupation": fields.get("occupation", ""),
        }
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: malformed checkpoint field: {exc}") from exc
    return record, info
