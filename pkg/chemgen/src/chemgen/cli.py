"""chemgen command line: generate FCIDUMP + metadata inputs.

Examples:
  chemgen --molecule h8 --basis sto-6g --bond 2.0 --localize er --references --out data/
  chemgen --molecule h2o --basis 6-31g --frozen-core --localize er \
          --bond-scan 0.957:2.8:0.25 --references --out data/
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .correlated import CorrelationError
from .driver import MoleculeJob, run_job
from .localize import LocalizationError
from .scf import SCFError


def _parse_scan(text: str) -> list[float]:
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"bond scan must be start:stop:step, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad scan range {text!r}")
    points = []
    x = start
    while x <= stop + 1e-9:
        points.append(round(x, 6))
        x += step
    if abs(points[-1] - stop) > 1e-9:
        points.append(round(stop, 6))
    return points


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="chemgen",
        description="Generate FCIDUMP integrals and reference energies")
    p.add_argument("--molecule", required=True,
                   help="h2/h4/.../h10 chain, n2, o2, co, h2o")
    p.add_argument("--basis", default="sto-6g",
                   help="sto-3g, sto-6g, or 6-31g")
    p.add_argument("--bond", type=float, default=None,
                   help="bond length / chain spacing in Angstrom")
    p.add_argument("--bond-scan", default=None,
                   help="start:stop:step geometry series in Angstrom")
    p.add_argument("--charge", type=int, default=0)
    p.add_argument("--multiplicity", type=int, default=None,
                   help="2S+1 (default 1; o2 defaults to 3)")
    p.add_argument("--frozen-core", action="store_true")
    p.add_argument("--localize", choices=("none", "er", "er-blockwise"),
                   default="none")
    p.add_argument("--references", action="store_true",
                   help="compute HF/CCSD/CCSD(T)/FCI sidecar references")
    p.add_argument("--fci-cap", type=int, default=20000,
                   help="largest sector dimension for the FCI reference")
    p.add_argument("--out", default=".", help="output directory")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    bonds = _parse_scan(args.bond_scan) if args.bond_scan else [args.bond]
    try:
        for bond in bonds:
            job = MoleculeJob(
                molecule=args.molecule,
                basis=args.basis,
                bond=bond,
                charge=args.charge,
                multiplicity=args.multiplicity,
                frozen_core=args.frozen_core,
                localize=args.localize,
                references=args.references,
                fci_max_dim=args.fci_cap,
                out_dir=Path(args.out),
            )
            result = run_job(job)
            refs = " ".join(f"{k}={v:.8f}" for k, v in result["references"].items())
            warn = " ".join(f"{k}" for k in result["warnings"]) or ""
            print(f"{result['dump']}  n_active={result['n_active']} "
                  f"E_scf={result['scf_energy']:.10f} {refs} {warn}".rstrip())
    except (ValueError, KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (SCFError, LocalizationError, CorrelationError) as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
