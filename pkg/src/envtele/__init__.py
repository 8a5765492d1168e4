"""Bidirectional qubit teleportation with an explicitly tracked dephasing environment."""

from .model import (
    BellOutcome,
    BlockState,
    DephasingInteraction,
    EnvDensity,
    PureQubit,
    from_full,
    initial_state,
    to_full,
)
from .protocol import (
    bell_coherence,
    bell_measure,
    dephase,
    pauli_correct,
    qubit_coherence,
    redephase,
    step1,
    step2_clean,
    step2_noisy,
)
from .entanglement import dephasing_entanglement, separability_check

__version__ = "0.1.0"
