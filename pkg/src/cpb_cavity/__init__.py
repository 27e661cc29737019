"""Cooper-pair-box charge qubit coupled to a single cavity mode.

Closed-form and exact-diagonalization dynamics, entanglement diagnostics
and teleportation over the generated qubit-field channel.
"""

__version__ = "0.1.0"

from cpb_cavity.errors import (
    ClosedFormInconsistency,
    DomainError,
    InvariantViolation,
    SweepError,
)
from cpb_cavity.model import (
    DensityOperator,
    HilbertSpace,
    ModelParams,
    StateVector,
    build_full_hamiltonian,
    build_rwa_hamiltonian,
    derive_params,
    derive_two_level_fields,
    figure_params,
)
from cpb_cavity.evolution import (
    ClosedFormCoeffs,
    ExcitedFock,
    FigureThree,
    GroundFock,
    SuperposedQubitFock,
    closed_form_coeffs,
    closed_form_rho,
    oracle_propagate,
    sweep,
)
from cpb_cavity.entanglement import (
    EntanglementReport,
    TwoQubitState,
    analyze,
    concurrence,
    negativity,
    partial_transpose_qubit,
    project_two_qubit,
    pt_spectrum,
)
from cpb_cavity.teleport import (
    TeleportResult,
    UnknownQubit,
    bob_state_paper,
    channel_from_rho,
    fidelity_sweep,
    teleport_protocol,
)

__all__ = [
    "ClosedFormCoeffs",
    "ClosedFormInconsistency",
    "DensityOperator",
    "DomainError",
    "EntanglementReport",
    "ExcitedFock",
    "FigureThree",
    "GroundFock",
    "HilbertSpace",
    "InvariantViolation",
    "ModelParams",
    "StateVector",
    "SuperposedQubitFock",
    "SweepError",
    "TeleportResult",
    "TwoQubitState",
    "UnknownQubit",
    "analyze",
    "bob_state_paper",
    "build_full_hamiltonian",
    "build_rwa_hamiltonian",
    "channel_from_rho",
    "closed_form_coeffs",
    "closed_form_rho",
    "concurrence",
    "derive_params",
    "derive_two_level_fields",
    "fidelity_sweep",
    "figure_params",
    "negativity",
    "oracle_propagate",
    "partial_transpose_qubit",
    "project_two_qubit",
    "pt_spectrum",
    "sweep",
    "teleport_protocol",
]
