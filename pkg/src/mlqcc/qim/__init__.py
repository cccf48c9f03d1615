"""Quantum-information core: registers, states and information measures."""

from mlqcc.qim.linalg import (
    embed_operator,
    hermitian_eig,
    is_unitary,
    jacobi_eigh,
    tensor,
)
from mlqcc.qim.measures import (
    binary_entropy,
    binary_entropy_inv,
    classical_conditional_mi,
    conditional_mi,
    embed_classical,
    fidelity,
    mutual_information,
    pure_trace_distance,
    trace_distance,
    uhlmann_unitary,
    von_neumann_entropy,
)
from mlqcc.qim.states import CqEnsemble, DensityOperator, PureState, RegisterLayout, as_density


def partial_trace(rho, keep):
    """Reduced density operator on the registers in ``keep`` (layout order kept)."""
    return as_density(rho).reduced(keep) if not isinstance(rho, PureState) else rho.reduced(keep)


__all__ = [
    "CqEnsemble",
    "DensityOperator",
    "PureState",
    "RegisterLayout",
    "as_density",
    "binary_entropy",
    "binary_entropy_inv",
    "classical_conditional_mi",
    "conditional_mi",
    "embed_classical",
    "embed_operator",
    "fidelity",
    "hermitian_eig",
    "is_unitary",
    "jacobi_eigh",
    "mutual_information",
    "partial_trace",
    "pure_trace_distance",
    "tensor",
    "trace_distance",
    "uhlmann_unitary",
    "von_neumann_entropy",
]
