"""Ground-state preparation engine for molecular electronic structure.

Simulates and optimizes a layered nearest-neighbor ansatz (brickwork hopping
rotations plus on-site double-occupancy phases) over fixed-particle
determinant spaces, with FCI references, quantum-resource accounting, and a
campaign CLI.
"""

from .ansatz import AnsatzSpec, initial_state, propagate, s_squared_expectation
from .detspace import SectorBasis, enumerate_sector
from .eigensolver import infidelity, lowest_states, same_spin_gap
from .hamop import HamiltonianAction, StateVector, apply_h, hf_determinant_energy
from .integrals import MolecularHamiltonian, load_fcidump, parse_fcidump, validate
from .optimize import (AnsatzProblem, OptimizerConfig, RunRecord,
                       constant_seed_search, lbfgs_minimize, multistart_search)
from .resources import estimate as estimate_resources

__version__ = "0.1.0"
