"""qnnmark: backdoor watermarking for simulated hybrid quantum-classical
classifiers, with black-box ownership verification.

The pieces compose bottom-up: a dense statevector simulator with two
gradient engines (``qnnmark.sim``), a fixed quantum ansatz layer
(``qnnmark.ansatz``), a small dense-network toolkit (``qnnmark.nn``), the
hybrid classifier (``qnnmark.model``), data and trigger handling
(``qnnmark.data``, ``qnnmark.digits``), the grouped-and-paired training
order (``qnnmark.schedule``), the embed/verify protocol
(``qnnmark.watermark``), and the experiment harness
(``qnnmark.experiment``, ``qnnmark.cli``).
"""

from .ansatz import AnsatzSpec, QuantumLayer, QuantumLayerOutput, build_ansatz
from .data import (
    ImageSample,
    TriggerSpec,
    apply_trigger,
    build_trigger_sets,
    load_idx,
    select_binary_subset,
)
from .model import (
    CheckpointMeta,
    HybridModel,
    load_checkpoint,
    save_checkpoint,
    train_step,
)
from .nn import Adam, DenseLayer, bce_loss
from .schedule import (
    ScheduleEntry,
    ScheduleConfig,
    build_schedule,
    derive_config,
    validate_schedule,
)
from .sim import (
    Gate,
    Observable,
    Statevector,
    adjoint_gradient,
    apply_gate,
    expectation,
    init_zero_state,
    parameter_shift_gradient,
    run_circuit,
)
from .watermark import (
    EmbedConfig,
    VerificationConfig,
    VerificationReport,
    embed,
    evaluate_clean,
    utility_delta,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "AnsatzSpec",
    "CheckpointMeta",
    "DenseLayer",
    "EmbedConfig",
    "Gate",
    "HybridModel",
    "ImageSample",
    "Observable",
    "QuantumLayer",
    "QuantumLayerOutput",
    "ScheduleEntry",
    "ScheduleConfig",
    "Statevector",
    "TriggerSpec",
    "VerificationConfig",
    "VerificationReport",
    "adjoint_gradient",
    "apply_gate",
    "apply_trigger",
    "bce_loss",
    "build_ansatz",
    "build_schedule",
    "build_trigger_sets",
    "derive_config",
    "embed",
    "evaluate_clean",
    "expectation",
    "init_zero_state",
    "load_checkpoint",
    "load_idx",
    "parameter_shift_gradient",
    "run_circuit",
    "save_checkpoint",
    "select_binary_subset",
    "train_step",
    "utility_delta",
    "validate_schedule",
    "verify",
]
