from .gates import (
    Gate,
    GateValidationError,
    Observable,
    ParameterBindingError,
    resolve_angle,
    validate_gate,
    validate_observable,
)
from .statevector import (
    MAX_QUBITS,
    CapacityError,
    Statevector,
    apply_gate,
    expectation,
    init_zero_state,
    run_circuit,
)
from .gradients import (
    UnsupportedGeneratorError,
    adjoint_gradient,
    adjoint_value_and_gradient,
    circuit_expectation,
    finite_difference_gradient,
    parameter_shift_gradient,
)

__all__ = [
    "MAX_QUBITS",
    "CapacityError",
    "Gate",
    "GateValidationError",
    "Observable",
    "ParameterBindingError",
    "Statevector",
    "UnsupportedGeneratorError",
    "adjoint_gradient",
    "adjoint_value_and_gradient",
    "apply_gate",
    "circuit_expectation",
    "expectation",
    "finite_difference_gradient",
    "init_zero_state",
    "parameter_shift_gradient",
    "resolve_angle",
    "run_circuit",
    "validate_gate",
    "validate_observable",
]
