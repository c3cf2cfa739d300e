"""Light-cone variance bounds for parameterized quantum circuits.

Clifford-point Monte Carlo estimation of loss variances and their light-cone
bounds, a dense reference simulator, and a weight analyzer for the diagonal
observables induced by qGAN discriminators.
"""
__version__ = "0.1.0"

from .circuit import (
    Gate,
    ParameterizedCircuit,
    ProductState,
    build_cartan,
    build_efficient_su2,
    mixed_state,
    plus_state,
    validate_circuit_class,
    zero_state,
)
from .errors import CapExceededError, CircuitClassError, DimensionError, DomainError
from .estimator import (
    SampleSpec,
    estimate_gradient_variance,
    estimate_observable,
    estimate_term,
    orthogonality,
)
from .kernels import BACKEND
from .pauli import Observable, PauliString
from .propagation import full_cone, loss_value_at_clifford_point, propagate

__all__ = [
    "BACKEND",
    "CapExceededError",
    "CircuitClassError",
    "DimensionError",
    "DomainError",
    "Gate",
    "Observable",
    "ParameterizedCircuit",
    "PauliString",
    "ProductState",
    "SampleSpec",
    "build_cartan",
    "build_efficient_su2",
    "estimate_gradient_variance",
    "estimate_observable",
    "estimate_term",
    "full_cone",
    "loss_value_at_clifford_point",
    "mixed_state",
    "orthogonality",
    "plus_state",
    "propagate",
    "validate_circuit_class",
    "zero_state",
]
