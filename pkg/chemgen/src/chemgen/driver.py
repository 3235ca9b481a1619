"""Job orchestration: geometry -> SCF -> frozen core -> localization ->
ordered active-space FCIDUMP + metadata sidecar with reference energies.

Localization is applied blockwise (doubly occupied, singly occupied,
virtual separately) so the mean-field determinant stays intact; localized
orbitals are then ordered jointly by their center's projection on the
molecule's principal axis, which is what makes nearest-neighbor hopping in
orbital-index space spatially meaningful.  Canonical dumps keep aufbau
(energy) order.  Reference energies are evaluated on the canonical active
integrals; FCI is orbital-invariant and the coupled-cluster references are
conventional in the canonical basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .correlated import CorrelationError, ccsd_energy, fci_ground
from .fcidump import write_fcidump, write_meta
from .gaussians import ANGSTROM_TO_BOHR, Molecule, integrals
from .localize import edmiston_ruedenberg
from .scf import SCFError, rhf, rohf

CORE_ORBITAL_COUNT = {"H": 0, "He": 0, "Li": 1, "Be": 1, "B": 1, "C": 1,
                      "N": 1, "O": 1, "F": 1}

DEFAULT_BONDS = {"h2": 0.7414, "n2": 1.2, "o2": 1.21, "co": 1.128,
                 "h2o": 0.957}

H2O_ANGLE_DEG = 104.5


@dataclass
class MoleculeJob:
    molecule: str
    basis: str = "sto-6g"
    bond: float | None = None            # Angstrom
    charge: int = 0
    multiplicity: int | None = None
    frozen_core: bool = False
    localize: str = "none"               # none | er
    references: bool = False
    fci_max_dim: int = 20000
    out_dir: Path = field(default_factory=lambda: Path("."))

    def resolved_bond(self) -> float:
        if self.bond is not None:
            return self.bond
        name = self.molecule.lower()
        if name in DEFAULT_BONDS:
            return DEFAULT_BONDS[name]
        if name.startswith("h") and name[1:].isdigit():
            return 1.0
        raise ValueError(f"no default bond length for {self.molecule}")

    def resolved_multiplicity(self) -> int:
        if self.multiplicity is not None:
            return self.multiplicity
        return 3 if self.molecule.lower() == "o2" else 1


def build_geometry(name: str, bond: float):
    """[(element, xyz in Angstrom)] for the supported molecules."""
    name = name.lower()
    if name.startswith("h") and name[1:].isdigit():
        n = int(name[1:])
        return [("H", (0.0, 0.0, i * bond)) for i in range(n)]
    if name in ("n2", "o2", "co"):
        a, b = {"n2": ("N", "N"), "o2": ("O", "O"), "co": ("C", "O")}[name]
        return [(a, (0.0, 0.0, 0.0)), (b, (0.0, 0.0, bond))]
    if name == "h2o":
        half = math.radians(H2O_ANGLE_DEG) / 2.0
        x, z = bond * math.sin(half), bond * math.cos(half)
        return [("O", (0.0, 0.0, 0.0)), ("H", (x, 0.0, z)), ("H", (-x, 0.0, z))]
    raise ValueError(f"unknown molecule {name!r}")


def _principal_axis(atoms_bohr) -> np.ndarray:
    coords = np.array([xyz for _el, xyz in atoms_bohr])
    centered = coords - coords.mean(axis=0)
    cov = centered.T @ centered
    w, u = np.linalg.eigh(cov)
    axis = u[:, -1]
    nz = np.nonzero(np.abs(axis) > 1e-8)[0]
    if len(nz) and axis[nz[0]] < 0:
        axis = -axis
    return axis


def _spatial_order(c_active, dip_ao, fock_ao, axis):
    """Order orbitals by center projection along the axis, Fock tie-break."""
    centers = np.stack([np.einsum("pi,pq,qi->i", c_active, dip_ao[d], c_active)
                        for d in range(3)])
    proj = axis @ centers
    fdiag = np.einsum("pi,pq,qi->i", c_active, fock_ao, c_active)
    order = sorted(range(c_active.shape[1]),
                   key=lambda i: (round(proj[i], 6), round(fdiag[i], 8), i))
    return c_active[:, order]


def _mo_transform(hcore_eff, eri_ao, c):
    h_mo = c.T @ hcore_eff @ c
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri_ao, c, c, c, c,
                       optimize=True)
    return h_mo, eri_mo


def run_job(job: MoleculeJob) -> dict:
    """Execute one generation job; returns paths and computed energies."""
    bond = job.resolved_bond()
    mult = job.resolved_multiplicity()
    atoms_ang = build_geometry(job.molecule, bond)
    atoms = [(el, np.asarray(xyz, float) * ANGSTROM_TO_BOHR)
             for el, xyz in atoms_ang]
    mol = Molecule(atoms, job.charge, mult)
    e_nuc = mol.nuclear_repulsion()

    s, t, v, eri_ao, dip_ao = integrals(mol, job.basis)
    hcore = t + v
    if mult == 1:
        scf_res = rhf(s, hcore, eri_ao, mol.n_electrons, e_nuc)
    else:
        scf_res = rohf(s, hcore, eri_ao, mol.n_alpha, mol.n_beta, e_nuc)

    n_frozen = (sum(CORE_ORBITAL_COUNT[el] for el, _ in mol.atoms)
                if job.frozen_core else 0)
    if n_frozen >= min(mol.n_alpha, mol.n_beta) and n_frozen > 0:
        raise SCFError("frozen core would eliminate all active electrons")

    c_all = scf_res.mo_coeff
    c_core = c_all[:, :n_frozen]
    c_active = c_all[:, n_frozen:]
    n_active = c_active.shape[1]
    n_alpha_act = mol.n_alpha - n_frozen
    n_beta_act = mol.n_beta - n_frozen

    # Frozen-core fold-in: effective one-electron operator and core energy.
    core_energy = e_nuc
    hcore_eff = hcore
    if n_frozen:
        d_core = 2.0 * c_core @ c_core.T
        j = np.einsum("pqrs,rs->pq", eri_ao, d_core, optimize=True)
        k = np.einsum("prqs,rs->pq", eri_ao, d_core, optimize=True)
        v_core = j - 0.5 * k
        core_energy += float(np.sum(d_core * (hcore + 0.5 * v_core)))
        hcore_eff = hcore + v_core

    # References on the canonical active orbitals.
    refs = {}
    warnings = {}
    refs["hf"] = scf_res.energy
    if job.references:
        h_can, eri_can = _mo_transform(hcore_eff, eri_ao, c_active)
        dim = math.comb(n_active, n_alpha_act) * math.comb(n_active, n_beta_act)
        if dim <= job.fci_max_dim:
            vals = fci_ground(h_can, eri_can, n_alpha_act, n_beta_act,
                              core=core_energy, max_dim=job.fci_max_dim)
            if vals is not None:
                refs["fci"] = float(vals[0])
        try:
            e_cc, e_t = ccsd_energy(h_can, eri_can, n_alpha_act, n_beta_act,
                                    core=core_energy, do_triples=True)
            refs["ccsd"] = float(e_cc - e_t)
            refs["ccsd_t"] = float(e_cc)
        except CorrelationError as exc:
            warnings["warning_ccsd"] = "not_converged"
            warnings["warning_ccsd_detail"] = str(exc).replace("\n", " ")

    # Orbital basis of the dump.  Full-space ER (all active orbitals
    # localized together) yields site-local orbitals whose one-electron
    # coupling is dominated by spatial neighbors; the blockwise variant
    # preserves the mean-field occupied space but measurably degrades the
    # nearest-neighbor ansatz on stretched chains, so it is opt-in.
    if job.localize in ("er", "er-blockwise"):
        if job.localize == "er":
            c_loc, _ = edmiston_ruedenberg(c_active, eri_ao)
        else:
            n_docc = scf_res.n_doubly - n_frozen
            n_socc = scf_res.n_singly
            blocks = []
            for lo, hi in ((0, n_docc), (n_docc, n_docc + n_socc),
                           (n_docc + n_socc, n_active)):
                if hi > lo:
                    c_blk, _ = edmiston_ruedenberg(c_active[:, lo:hi], eri_ao)
                    blocks.append(c_blk)
            c_loc = np.hstack(blocks)
        c_dump = _spatial_order(c_loc, dip_ao, scf_res.fock_ao,
                                _principal_axis(mol.atoms))
        orbital_basis = "localized-er"
    elif job.localize in ("none", "canonical"):
        c_dump = c_active
        orbital_basis = "canonical"
    else:
        raise ValueError(f"unknown localization {job.localize!r}")

    h_mo, eri_mo = _mo_transform(hcore_eff, eri_ao, c_dump)

    tag = f"{bond:g}"
    stem = "_".join(
        [job.molecule.lower(), job.basis.lower().replace("-", "")]
        + (["fc"] if job.frozen_core else [])
        + (["er"] if orbital_basis == "localized-er" else [])
        + [tag])
    out_dir = Path(job.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dump_path = out_dir / f"{stem}.fcidump"
    meta_path = out_dir / f"{stem}.meta"

    write_fcidump(dump_path, h_mo, eri_mo,
                  n_elec=n_alpha_act + n_beta_act,
                  ms2=mol.n_alpha - mol.n_beta, core=core_energy)
    meta = {
        "molecule": job.molecule.lower(),
        "basis": job.basis.lower(),
        "geometry": tag,
        "orbital_basis": orbital_basis,
        "units": "angstrom",
        "n_orb_active": n_active,
        "n_frozen": n_frozen,
        "nuclear_repulsion": float(e_nuc),
        "scf_converged": int(scf_res.converged),
        "localization_note": (
            ("full-space: all active orbitals localized together"
             if job.localize == "er" else
             "blockwise: doubly-occupied, singly-occupied and virtual "
             "orbitals localized separately")
            if orbital_basis == "localized-er" else ""),
    }
    for name, value in refs.items():
        meta[f"ref_{name}"] = float(value)
    meta.update(warnings)
    write_meta(meta_path, meta)
    return {
        "dump": dump_path,
        "meta": meta_path,
        "scf_energy": scf_res.energy,
        "core_energy": core_energy,
        "references": refs,
        "warnings": warnings,
        "n_active": n_active,
    }
