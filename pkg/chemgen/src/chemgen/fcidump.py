"""FCIDUMP and metadata sidecar emission (chemists' notation, 1-based)."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_fcidump(path, h1: np.ndarray, eri: np.ndarray, n_elec: int,
                  ms2: int, core: float, threshold: float = 1e-14) -> None:
    n = h1.shape[0]
    lines = [f"&FCI NORB={n:4d}, NELEC={n_elec:3d}, MS2={ms2:2d},",
             "  ORBSYM=" + ",".join(["1"] * n) + ",",
             "  ISYM=1,",
             " /"]

    def rec(value, i, j, k, l):
        lines.append(f" {value: .16E} {i:4d} {j:4d} {k:4d} {l:4d}")

    for p in range(n):
        for q in range(p + 1):
            pq = p * (p + 1) // 2 + q
            for r in range(p + 1):
                smax = (q if r == p else r) + 1
                for s in range(smax):
                    if r * (r + 1) // 2 + s > pq:
                        continue
                    v = eri[p, q, r, s]
                    if abs(v) > threshold:
                        rec(v, p + 1, q + 1, r + 1, s + 1)
    for p in range(n):
        for q in range(p + 1):
            if abs(h1[p, q]) > threshold:
                rec(h1[p, q], p + 1, q + 1, 0, 0)
    rec(core, 0, 0, 0, 0)
    Path(path).write_text("\n".join(lines) + "\n")


def write_meta(path, fields: dict) -> None:
    """Key/value sidecar; floats via repr so they round-trip exactly."""
    lines = ["format_version = 1"]
    for key, value in fields.items():
        if value is None:
            continue
        if isinstance(value, float):
            lines.append(f"{key} = {value!r}")
        else:
            lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n")
