"""Command-line surface: ingestion, reference spectra, optimization
campaigns, annealing sweeps, resource tables, and report merging.

Exit codes: 0 success, 1 runtime/convergence failure, 2 input error.
Outputs inside --out are deterministic for fixed inputs and master seed,
apart from wall-clock fields; wall-clock timestamps go to timing.log.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import time
from pathlib import Path

import numpy as np

from .ansatz import AnsatzSpec, parse_occupation_pattern
from .detspace import SectorBasis
from .eigensolver import infidelity, lowest_states, same_spin_gap
from .errors import (ConsistencyError, ConvergenceError, DomainError,
                     InsufficientStates, ParseError)
from .hamop import HamiltonianAction, StateVector
from .integrals import load_fcidump, read_metadata, validate
from .optimize import (AnsatzProblem, OptimizerConfig, constant_seed_search,
                       anneal_geometries, extend_depth, multistart_search)
from .resources import estimate
from .runio import (ReportRow, load_checkpoint, merge_rows, read_rows,
                    save_checkpoint, write_rows)

THREADS_ENV = "CRESERVOIR_THREADS"


def _apply_thread_env():
    threads = os.environ.get(THREADS_ENV)
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def _slug(tag: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", tag)


def geometry_tag(dump_path) -> str:
    """Geometry tag from the metadata sidecar, else the file stem."""
    dump_path = Path(dump_path)
    sidecar = dump_path.with_suffix(".meta")
    if sidecar.exists():
        meta = read_metadata(sidecar.read_text())
        if meta.geometry:
            return meta.geometry
    return dump_path.stem


def _load_problem_inputs(args):
    ham = load_fcidump(args.dump)
    problems = validate(ham)
    if problems:
        raise ParseError("; ".join(problems))
    occupation = None
    if getattr(args, "occupation", None):
        occupation = parse_occupation_pattern(args.occupation)
    return ham, occupation


def _timing_log(out_dir: Path, message: str):
    with (out_dir / "timing.log").open("a") as fh:
        fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {message}\n")


def _fci_reference(action: HamiltonianAction, out_dir: Path | None, tag: str,
                   k: int = 1, tol: float = 1e-8):
    """Spectrum with a ground-vector cache inside the run directory."""
    slug = _slug(tag)
    if out_dir is not None:
        vec_path = out_dir / f"fci_{slug}_ground.npy"
        txt_path = out_dir / f"fci_{slug}_spectrum.txt"
        if vec_path.exists() and txt_path.exists():
            fields = dict(
                line.split(" = ", 1)
                for line in txt_path.read_text().splitlines() if " = " in line)
            if int(fields.get("k", "0")) >= k:
                kk = int(fields["k"])
                energies = np.array([float(fields[f"E_{i}"]) for i in range(kk)])
                s2 = np.array([float(fields[f"s2_{i}"]) for i in range(kk)])
                ground = StateVector(action.sector, np.load(vec_path))
                return energies, s2, ground
    res = lowest_states(action, k=k, tol=tol)
    if out_dir is not None:
        np.save(vec_path, res.ground_state.amplitudes)
        lines = [f"k = {k}"]
        for i in range(k):
            lines.append(f"E_{i} = {float(res.eigenvalues[i])!r}")
            lines.append(f"s2_{i} = {float(res.s2_values[i])!r}")
        txt_path.write_text("\n".join(lines) + "\n")
    return res.eigenvalues, res.s2_values, res.ground_state


def _parse_depths(text: str) -> list[int]:
    try:
        depths = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ParseError(f"bad depth list {text!r}") from exc
    if not depths or any(b <= a for a, b in zip(depths, depths[1:])):
        raise ParseError(f"depth ladder must be strictly increasing: {text!r}")
    return depths


# ---------------------------------------------------------------------------
# Commands.


def cmd_ingest(args) -> int:
    ham = load_fcidump(args.dump)
    sector = SectorBasis(ham.n_orb, ham.n_alpha, ham.n_beta)
    print(f"dump: {args.dump}")
    print(f"n_orb = {ham.n_orb}, n_alpha = {ham.n_alpha}, n_beta = {ham.n_beta}")
    print(f"core_energy = {ham.core_energy!r}")
    print(f"sector dimension = {sector.dim}")
    violations = validate(ham)
    if violations:
        print(f"validation: {len(violations)} violation(s)")
        for v in violations:
            print(f"  {v}")
        return 2
    print("validation: clean")
    return 0


def cmd_fci(args) -> int:
    ham, _ = _load_problem_inputs(args)
    action = HamiltonianAction(ham)
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    tag = geometry_tag(args.dump)
    res = lowest_states(action, k=args.k_states, tol=args.tol_e)
    print(f"dump: {args.dump} (geometry {tag}, dim {action.sector.dim})")
    for i in range(args.k_states):
        print(f"E_{i} = {res.eigenvalues[i]:.11E}  <S^2> = {res.s2_values[i]:.6f}  "
              f"resid = {res.residual_norms[i]:.2E}")
    if args.k_states > 1:
        try:
            gap = same_spin_gap(res)
            print(f"same-spin gap = {gap * 1000.0:.6f} mEh")
        except InsufficientStates as exc:
            print(f"same-spin gap: {exc}")
    if out_dir:
        slug = _slug(tag)
        np.save(out_dir / f"fci_{slug}_ground.npy", res.ground_state.amplitudes)
        lines = [f"k = {args.k_states}"]
        for i in range(args.k_states):
            lines.append(f"E_{i} = {float(res.eigenvalues[i])!r}")
            lines.append(f"s2_{i} = {float(res.s2_values[i])!r}")
        (out_dir / f"fci_{slug}_spectrum.txt").write_text("\n".join(lines) + "\n")
        print(f"ground vector persisted under {out_dir}")
    return 0


def cmd_resources(args) -> int:
    depths = [int(t) for t in args.depths.split(",") if t.strip()]
    print("N,L,cnots_per_layer,total_cnots,sublayers")
    for layers in depths:
        est = estimate(args.n_orb, layers)
        print(f"{est.n_orb},{est.layers},{est.cnots_per_layer},"
              f"{est.total_cnots},{est.schedule_depth_per_layer}")
    return 0


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(tol_energy=args.tol_e, tol_grad=args.tol_g,
                           max_iter=args.max_iter)


def cmd_optimize(args) -> int:
    ham, occupation = _load_problem_inputs(args)
    depths = _parse_depths(args.depths)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    tag = geometry_tag(args.dump)
    cfg = _optimizer_config(args)
    action = HamiltonianAction(ham)
    k = max(1, args.k_states)
    energies_fci, _s2, ground = _fci_reference(action, out_dir, tag, k=k,
                                               tol=min(args.tol_e, 1e-8))
    e_fci = float(energies_fci[0])
    gap_meh = None
    if k > 1:
        gaps = [e - energies_fci[0] for e in energies_fci[1:]]
        gap_meh = gaps[0] * 1000.0 if gaps else None

    done: dict[int, tuple] = {}
    if args.resume:
        for layers in depths:
            ck = out_dir / f"ckpt_L{layers}.txt"
            if ck.exists():
                done[layers] = load_checkpoint(ck)
        if not done:
            raise ParseError(f"--resume given but no checkpoints in {out_dir}")

    rows = []
    rows_path = out_dir / "optimize.rows.csv"
    if args.resume and rows_path.exists():
        rows = read_rows(rows_path)

    best = None
    problem = None
    for i, layers in enumerate(depths):
        spec = AnsatzSpec(ham.n_orb, layers)
        if layers in done:
            record, _info = done[layers]
            problem = AnsatzProblem(ham, spec, action=action, occupation=occupation)
            best = record
            _timing_log(out_dir, f"optimize L={layers} restored from checkpoint")
            continue
        t0 = time.perf_counter()
        if args.strategy == "constant":
            problem = AnsatzProblem(ham, spec, action=action, occupation=occupation)
            best = constant_seed_search(problem, screening_iters=args.screening_iters,
                                        cfg=cfg)
            best.seed = args.seed
        else:
            if best is None:
                problem = AnsatzProblem(ham, spec, action=action, occupation=occupation)
                best = multistart_search(problem, cfg,
                                         trials_per_range=args.trials,
                                         master_seed=args.seed)
            else:
                problem, best = extend_depth(problem, best, layers, cfg=cfg,
                                             master_seed=args.seed)
        wall = time.perf_counter() - t0
        save_checkpoint(best, out_dir / f"ckpt_L{layers}.txt", ham.n_orb,
                        ham.n_alpha, ham.n_beta, layers, master_seed=args.seed,
                        occupation=args.occupation or "")
        psi = problem.final_state(best.params)
        infid = infidelity(psi, ground)
        rows.append(ReportRow(tag, layers, estimate(ham.n_orb, layers).total_cnots,
                              best.energy, e_fci, infid, gap_meh, wall))
        _timing_log(out_dir, f"optimize L={layers} done in {wall:.1f}s "
                             f"E={best.energy!r} dE={(best.energy - e_fci) * 1e3:.3f}mEh")
        print(f"L={layers}: E = {best.energy:.11E}  dE = "
              f"{(best.energy - e_fci) * 1e3:.4f} mEh  infidelity = {infid:.3E} "
              f" [{best.termination}, {best.iterations} iters]")
    write_rows(rows, rows_path)
    return 0


def cmd_sweep(args) -> int:
    dumps = [Path(p) for p in args.dump]
    if not dumps:
        raise ParseError("sweep needs at least one --dump")
    tagged = []
    for p in dumps:
        tag = geometry_tag(p)
        try:
            order = float(tag)
        except ValueError:
            order = float("inf")
        tagged.append((order, tag, p))
    tagged.sort(key=lambda t: (t[0], t[1]))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = _optimizer_config(args)
    layers = _parse_depths(args.depths)[-1]

    problems = []
    occupation = None
    sector = None
    for _order, tag, path in tagged:
        ham = load_fcidump(path)
        bad = validate(ham)
        if bad:
            raise ParseError(f"{path}: " + "; ".join(bad))
        if occupation is None and args.occupation:
            occupation = parse_occupation_pattern(args.occupation)
        if sector is None:
            sector = SectorBasis(ham.n_orb, ham.n_alpha, ham.n_beta)
        elif (ham.n_orb, ham.n_alpha, ham.n_beta) != (
                sector.n_orb, sector.n_alpha, sector.n_beta):
            raise DomainError(f"{path}: sector differs from the first dump")
        action = HamiltonianAction(ham, sector)
        spec = AnsatzSpec(ham.n_orb, layers)
        problems.append((tag, AnsatzProblem(ham, spec, action=action,
                                            occupation=occupation)))

    t0 = time.perf_counter()
    if args.seed_checkpoint:
        seed_record, info = load_checkpoint(args.seed_checkpoint)
        if info["layers"] != layers:
            raise ParseError(
                f"seed checkpoint depth {info['layers']} != sweep depth {layers}")
    elif args.strategy == "constant":
        seed_record = constant_seed_search(problems[0][1],
                                           screening_iters=args.screening_iters,
                                           cfg=cfg)
    else:
        seed_record = multistart_search(problems[0][1], cfg,
                                        trials_per_range=args.trials,
                                        master_seed=args.seed)
    seed_record.seed = args.seed
    _timing_log(out_dir, f"sweep seed solution in {time.perf_counter() - t0:.1f}s")

    results = anneal_geometries(problems, seed_record, cfg)

    rows = []
    prov_lines = []
    for (tag, record, provenance), (_o, _t, path) in zip(results, tagged):
        t1 = time.perf_counter()
        prob = dict(problems)[tag]
        energies, _s2v, ground = _fci_reference(prob.action, out_dir, tag,
                                                k=max(1, args.k_states),
                                                tol=min(args.tol_e, 1e-8))
        infid = infidelity(prob.final_state(record.params), ground)
        gap_meh = ((energies[1] - energies[0]) * 1000.0
                   if len(energies) > 1 else None)
        rows.append(ReportRow(tag, layers,
                              estimate(sector.n_orb, layers).total_cnots,
                              record.energy, float(energies[0]), infid,
                              gap_meh, record.wall_time))
        prov_lines.append(f"{tag} = {provenance}")
        _timing_log(out_dir, f"sweep {tag} referenced in {time.perf_counter() - t1:.1f}s")
        print(f"{tag}: E = {record.energy:.11E}  dE = "
              f"{(record.energy - energies[0]) * 1e3:.4f} mEh  "
              f"infidelity = {infid:.3E}  [{provenance}]")
        save_checkpoint(record, out_dir / f"sweep_{_slug(tag)}_L{layers}.txt",
                        sector.n_orb, sector.n_alpha, sector.n_beta, layers,
                        master_seed=args.seed, occupation=args.occupation or "")
    write_rows(rows, out_dir / "sweep.rows.csv")
    (out_dir / "sweep.provenance.txt").write_text("\n".join(prov_lines) + "\n")
    return 0


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    if not out_dir.is_dir():
        raise ParseError(f"{out_dir} is not a directory")
    rows = merge_rows(out_dir)
    if not rows:
        raise ParseError(f"no report rows under {out_dir}")
    write_rows(rows, out_dir / "report.csv")
    best: dict[str, ReportRow] = {}
    for row in rows:
        if row.geometry not in best or row.de_meh < best[row.geometry].de_meh:
            best[row.geometry] = row
    lines = ["best energy error per geometry"]
    for tag in sorted(best, key=lambda t: (float(t) if _is_float(t) else float("inf"), t)):
        row = best[tag]
        lines.append(f"geometry {tag}: dE = {row.de_meh:.4f} mEh at L = {row.layers} "
                     f"({row.cnots} CNOTs, infidelity {row.infidelity:.3E})")
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0


def _is_float(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# Argument parsing.


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="creservoir",
        description="Ground-state preparation engine for molecular Hamiltonians")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_opt(p, dump=True):
        if dump:
            p.add_argument("--dump", required=True, help="FCIDUMP path")
        p.add_argument("--tol-e", type=float, default=1e-8,
                       help="energy tolerance (Hartree)")
        p.add_argument("--tol-g", type=float, default=1e-4,
                       help="gradient-norm tolerance")
        p.add_argument("--max-iter", type=int, default=5000)
        p.add_argument("--k-states", type=int, default=1)
        p.add_argument("--occupation", default="",
                       help="start-state override, one of 0/a/b/2 per orbital")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--trials", type=int, default=20,
                       help="multistart trials per range")
        p.add_argument("--screening-iters", type=int, default=100)

    p = sub.add_parser("ingest", help="parse and validate a dump")
    p.add_argument("--dump", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fci", help="reference spectrum of a dump")
    common_opt(p)
    p.add_argument("--out", default="", help="directory for the ground-vector cache")
    p.set_defaults(func=cmd_fci)

    p = sub.add_parser("optimize", help="optimization campaign along a depth ladder")
    common_opt(p)
    p.add_argument("--depths", required=True, help="comma list, e.g. 5,10,15")
    p.add_argument("--strategy", choices=("multistart", "constant"),
                   default="multistart")
    p.add_argument("--out", required=True)
    p.add_argument("--resume", action="store_true",
                   help="continue from checkpoints in --out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="two-pass annealing across geometries")
    common_opt(p, dump=False)
    p.add_argument("--dump", action="append", default=[],
                   help="FCIDUMP path (repeat per geometry)")
    p.add_argument("--depths", required=True,
                   help="sweep depth (a single value or ladder; last entry used)")
    p.add_argument("--strategy", choices=("multistart", "constant"),
                   default="constant")
    p.add_argument("--seed-checkpoint", default="",
                   help="checkpoint providing the equilibrium seed parameters")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("resources", help="CNOT accounting table")
    p.add_argument("--n-orb", type=int, required=True)
    p.add_argument("--depths", required=True)
    p.set_defaults(func=cmd_resources)

    p = sub.add_parser("report", help="merge rows into report.csv + summary")
    p.add_argument("--out", required=True, help="run directory with *.rows.csv")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    _apply_thread_env()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ConsistencyError, DomainError, IndexError,
            FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, FloatingPointError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
