"""Qubit Born-rule laboratory: Pauli/Bloch algebra, Gudder-form measures,
additivity checks and least-squares classification of candidate measures."""

from bornlab.errors import ContractError, ValidationError
from bornlab.pauli import (
    bloch_from_projector,
    euclidean_inner,
    hilbert_schmidt_inner,
    ket_to_operator,
    overlap_probability,
    pauli_compose,
    pauli_decompose,
    projector_from_bloch,
)
from bornlab.measure import (
    DerivationTrace,
    GudderFunctional,
    born_probability,
    derive_measure,
    gudder_eval,
    measure_linear_form,
    measure_trace_form,
)

__version__ = "0.1.0"

__all__ = [
    "ContractError",
    "ValidationError",
    "bloch_from_projector",
    "euclidean_inner",
    "hilbert_schmidt_inner",
    "ket_to_operator",
    "overlap_probability",
    "pauli_compose",
    "pauli_decompose",
    "projector_from_bloch",
    "DerivationTrace",
    "GudderFunctional",
    "born_probability",
    "derive_measure",
    "gudder_eval",
    "measure_linear_form",
    "measure_trace_form",
    "__version__",
]
