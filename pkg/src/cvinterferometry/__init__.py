"""Continuous-variable teleportation-based astronomical interferometry.

Gaussian states of stellar light and entanglement links, the teleportation
protocol, Fisher information for estimating the coherence function, a
truncated-Fock oracle, link-budget models and a squeezed-input interferometer.
"""

__version__ = "0.1.0"

from .gaussian import (  # noqa: E402
    CoherenceParams,
    GaussianState,
    UnphysicalStateError,
    lossy_tms_state,
    stellar_state,
    symplectic_eigenvalues,
    tms_state,
)
from .teleportation import (  # noqa: E402
    LinkParams,
    effective_squeezing,
    protocol_covariance,
    simulate_teleportation,
    teleported_state,
)
from .estimation import (  # noqa: E402
    FisherKind,
    FisherMatrix,
    heterodyne_fi,
    qfi_closed_form,
    qfi_teleported,
    sld_coefficients,
)
from .fock import classical_fi_pnr, dv_scheme_fi, gaussian_to_fock, verify_sld  # noqa: E402
from .link_budget import NetworkParams, ObservationParams, threshold_squeezing  # noqa: E402
from .appendix import MziConfig, mzi_fock_check, mzi_stats  # noqa: E402

__all__ = [
    "CoherenceParams",
    "GaussianState",
    "UnphysicalStateError",
    "lossy_tms_state",
    "stellar_state",
    "symplectic_eigenvalues",
    "tms_state",
    "LinkParams",
    "effective_squeezing",
    "protocol_covariance",
    "simulate_teleportation",
    "teleported_state",
    "FisherKind",
    "FisherMatrix",
    "heterodyne_fi",
    "qfi_closed_form",
    "qfi_teleported",
    "sld_coefficients",
    "classical_fi_pnr",
    "dv_scheme_fi",
    "gaussian_to_fock",
    "verify_sld",
    "NetworkParams",
    "ObservationParams",
    "threshold_squeezing",
    "MziConfig",
    "mzi_fock_check",
    "mzi_stats",
]
