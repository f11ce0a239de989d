"""Two-site Hubbard Green's function from a simulated photonic VQE.

Energies are in units of the hopping ``t`` throughout.
"""

__version__ = "0.1.0"

from .fock import (  # noqa: E402
    PoleData,
    SpectrumSeries,
    build_hubbard,
    exact_spectral_function,
    fermion_operator,
    sector_indices,
    verify_six_dim,
)
from .greens import (  # noqa: E402
    measure_transition_amplitude,
    spectral_function,
    transition_projector,
    vqe_spectrum,
)
from .linalg import EigenSystem, eigensystem  # noqa: E402
from .photonic import AnsatzParams, ExpectationEstimate, measure_expectation, prepare_ansatz  # noqa: E402
from .sixdim import build_six_dim, hamiltonian_settings  # noqa: E402
from .vqe import VqeConfig, energy_at, nft_update, run_vqe  # noqa: E402

__all__ = [
    "AnsatzParams",
    "EigenSystem",
    "ExpectationEstimate",
    "PoleData",
    "SpectrumSeries",
    "VqeConfig",
    "build_hubbard",
    "build_six_dim",
    "eigensystem",
    "energy_at",
    "exact_spectral_function",
    "fermion_operator",
    "hamiltonian_settings",
    "measure_expectation",
    "measure_transition_amplitude",
    "nft_update",
    "prepare_ansatz",
    "run_vqe",
    "sector_indices",
    "spectral_function",
    "transition_projector",
    "verify_six_dim",
    "vqe_spectrum",
]
