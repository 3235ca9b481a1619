"""FCIDUMP + metadata generator: integrals, SCF, Edmiston-Ruedenberg
localization, frozen core, and classical reference energies."""

from .driver import MoleculeJob, build_geometry, run_job
from .gaussians import ANGSTROM_TO_BOHR, Molecule, integrals

__version__ = "0.1.0"
