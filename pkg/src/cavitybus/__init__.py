"""Simulation of a distance-independent sqrt(swap) gate between two atoms at
the ends of a coupled-cavity array."""

from .dynamics import (
    LindbladSolver,
    evolve_lindblad,
    evolve_unitary,
    fidelity_peak,
    jump_operators,
    liouvillian,
    state_fidelity,
    transfer_fidelity,
)
from .effective import EffectiveModel, build_effective, evolve_effective, gate_time, ideal_sqrt_swap
from . import errors as _errors
from .errors import *  # noqa: F401,F403
from .lattice import (
    ChainSpec,
    ChainSpectrum,
    coupling_sums,
    direct_diagonalize,
    dispersion_scan,
    dressed_resolvent,
    find_spectrum_by_poles,
    free_resolvent,
    identity_targets,
    lippmann_schwinger_vector,
)
from .model import ModelParams, build_hamiltonian, direct_sum_basis, enumerate_sector
from .tomography import (
    GateChannel,
    average_fidelity,
    chi_overlap,
    chi_tomography,
    reconstruct_channel,
)

__version__ = "0.1.0"

__all__ = [
    "ChainSpec",
    "ChainSpectrum",
    "EffectiveModel",
    "GateChannel",
    "LindbladSolver",
    "ModelParams",
    "average_fidelity",
    "build_effective",
    "build_hamiltonian",
    "chi_overlap",
    "chi_tomography",
    "coupling_sums",
    "direct_diagonalize",
    "direct_sum_basis",
    "dispersion_scan",
    "dressed_resolvent",
    "enumerate_sector",
    "evolve_effective",
    "evolve_lindblad",
    "evolve_unitary",
    "fidelity_peak",
    "find_spectrum_by_poles",
    "free_resolvent",
    "gate_time",
    "identity_targets",
    "ideal_sqrt_swap",
    "jump_operators",
    "lippmann_schwinger_vector",
    "liouvillian",
    "reconstruct_channel",
    "state_fidelity",
    "transfer_fidelity",
    *_errors.__all__,
]
