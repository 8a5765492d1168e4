"""
Teleportation stages acting on block-form ABC+E states.

Register order is always A, B, C. The forward step teleports A to C through
the Bell pair BC after BC has dephased. The backward step teleports C to A
through the pair AB left behind by the first measurement, optionally after
AB has dephased as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .linalg import ComplexMatrix
from .model import (
    BellOutcome,
    BlockState,
    DephasingInteraction,
    EnvDensity,
    ModelError,
    PureQubit,
    initial_state,
    trace_qubits,
)

IMPOSSIBLE_PROB = 1e-14
_PRUNE_TOL = 1e-14

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Pauli applied to the receiving qubit after each Bell outcome.
CORRECTIONS: dict[BellOutcome, ComplexMatrix] = {
    BellOutcome.PHI_PLUS: _I,
    BellOutcome.PHI_MINUS: _Z,
    BellOutcome.PSI_PLUS: _X,
    BellOutcome.PSI_MINUS: _Z @ _X,
}


class ImpossibleOutcome(ModelError):
    """The requested measurement outcome has (numerically) zero probability."""


def apply_system_op(state: BlockState, op, qubits: Sequence[str]) -> BlockState:
    """
    Conjugate ``state`` by ``op (x) 1`` acting on the named register qubits.

    ``op`` is a ``2^k x 2^k`` matrix over the sub-labels of ``qubits`` (first
    named qubit most significant). The operation need not be unitary; labels
    left without support are pruned.
    """
    qubits = tuple(qubits)
    for q in qubits:
        if q not in state.register:
            raise ModelError(f"qubit {q!r} not in register {state.register}")
    op = np.asarray(op, dtype=complex)
    k = len(qubits)
    if op.shape != (2**k, 2**k):
        raise ModelError(f"operator shape {op.shape} does not act on {k} qubits")
    pos = [state.register.index(q) for q in qubits]

    def relabel(label: str, sub: int) -> str:
        chars = list(label)
        bits = format(sub, f"0{k}b")
        for p, b in zip(pos, bits):
            chars[p] = b
        return "".join(chars)

    columns: dict[str, dict[int, complex]] = {}
    for i, lab in enumerate(state.labels):
        s = int(state.sub_label(lab, qubits), 2)
        for s_out in range(2**k):
            amp = op[s_out, s]
            if amp != 0:
                out = relabel(lab, s_out)
                columns.setdefault(out, {})[i] = columns.get(out, {}).get(i, 0) + amp
    out_labels = sorted(columns)
    m = np.zeros((len(out_labels), len(state.labels)), dtype=complex)
    for o, lab in enumerate(out_labels):
        for i, amp in columns[lab].items():
            m[o, i] = amp
    blocks = np.einsum("oi,pj,ijab->opab", m, m.conj(), state.blocks)
    keep = [o for o in range(len(out_labels)) if linalg.op_norm(blocks[o, o]) > _PRUNE_TOL]
    return BlockState(
        state.register,
        tuple(out_labels[o] for o in keep),
        blocks[np.ix_(keep, keep)],
    )


def dephase(
    state: BlockState,
    interaction: DephasingInteraction,
    target_qubits: Sequence[str],
    duration: float,
) -> BlockState:
    """Conditional evolution: ``block[L, L'] -> w[L] block[L, L'] w[L']^dagger``."""
    targets = tuple(target_qubits)
    if interaction.env_dim != state.env_dim:
        raise ModelError(
            f"interaction acts on d_E={interaction.env_dim}, state has d_E={state.env_dim}"
        )
    us = interaction.unitaries(duration)
    subs = [state.sub_label(lab, targets) for lab in state.labels]
    missing = sorted(set(subs) - set(us))
    if missing:
        raise ModelError(f"no conditional operator for sub-labels {missing} on {targets}")
    w = np.stack([us[s] for s in subs])
    blocks = np.einsum("iab,ijbc,jdc->ijad", w, state.blocks, w.conj())
    return BlockState(state.register, state.labels, blocks)


def project_bell(state: BlockState, pair: Sequence[str], outcome: BellOutcome) -> BlockState:
    """Unnormalized projection onto a Bell vector of ``pair``."""
    v = outcome.vector
    return apply_system_op(state, np.outer(v, v.conj()), pair)


def bell_measure(
    state: BlockState, pair: Sequence[str], outcome: BellOutcome
) -> tuple[float, BlockState]:
    """Project ``pair`` onto ``outcome``; return the probability and renormalized state."""
    projected = project_bell(state, pair, outcome)
    prob = projected.trace()
    if prob < IMPOSSIBLE_PROB:
        raise ImpossibleOutcome(f"outcome {outcome.value} on {tuple(pair)} has probability {prob:.3e}")
    return prob, projected.scaled(1.0 / prob)


def correction_for(
    outcome: BellOutcome,
    resource: BellOutcome = BellOutcome.PHI_PLUS,
    corrections: Mapping[BellOutcome, ComplexMatrix] = CORRECTIONS,
) -> ComplexMatrix:
    """Receiver Pauli for a measured ``outcome`` given the Bell state of the resource pair."""
    return corrections[outcome] @ corrections[resource]


def pauli_correct(
    state: BlockState,
    outcome: BellOutcome,
    target: str,
    resource: BellOutcome = BellOutcome.PHI_PLUS,
    corrections: Mapping[BellOutcome, ComplexMatrix] = CORRECTIONS,
) -> BlockState:
    return apply_system_op(state, correction_for(outcome, resource, corrections), (target,))


def bell_coherence(state: BlockState) -> complex:
    """
    Coherence ``c = Tr_E R_01`` of a dephased Bell pair BC.

    Accepts the three-qubit state right after the first dephasing (qubit A is
    traced out) or a BC-only state.
    """
    bc = state
    if state.register != ("B", "C"):
        if not {"B", "C"} <= set(state.register):
            raise ModelError("state has no B,C pair")
        bc = trace_qubits(state, [q for q in state.register if q not in ("B", "C")])
    if not set(bc.labels) <= {"00", "11"} or len(bc.labels) != 2:
        raise ModelError(f"BC labels {bc.labels} are not of dephased-Bell form")
    for lab in ("00", "11"):
        if abs(np.trace(bc.block(lab, lab)) - 0.5) > 1e-9:
            raise ModelError("BC populations are not those of a dephased Bell state")
    return complex(2 * np.trace(bc.block("00", "11")))


def qubit_coherence(rho_qe: BlockState, psi: PureQubit) -> complex:
    """
    Dephasing factor of a single qubit entangled with the environment.

    The off-diagonal element of the reduced qubit state is
    ``alpha beta^* c``; this returns ``c``.
    """
    if len(rho_qe.register) != 1:
        raise ModelError("qubit_coherence needs a single-qubit register")
    if set(rho_qe.labels) != {"0", "1"}:
        raise ModelError(f"state lacks one of the qubit labels: {rho_qe.labels}")
    amp = psi.alpha * np.conj(psi.beta)
    if abs(amp) < 1e-12:
        raise ModelError("coherence factor undefined for a basis-state qubit")
    return complex(np.trace(rho_qe.block("0", "1")) / amp)


def _forward(psi, env, interaction, tau, outcome, corrections):
    sigma0 = initial_state(psi, env)
    sigma_tau = dephase(sigma0, interaction, ("B", "C"), tau)
    prob, measured = bell_measure(sigma_tau, ("A", "B"), outcome)
    sigma_pm = pauli_correct(measured, outcome, "C", corrections=corrections)
    return sigma0, sigma_tau, prob, sigma_pm


def step1(
    psi: PureQubit,
    env: EnvDensity,
    interaction: DephasingInteraction,
    tau: float,
    outcome: BellOutcome = BellOutcome.PHI_PLUS,
    corrections: Mapping[BellOutcome, ComplexMatrix] = CORRECTIONS,
) -> tuple[float, BlockState]:
    """Forward teleportation A -> C through the dephased pair BC."""
    _, _, prob, sigma_pm = _forward(psi, env, interaction, tau, outcome, corrections)
    return prob, sigma_pm


def _backward(state, outcome, resource, corrections):
    prob, measured = bell_measure(state, ("B", "C"), outcome)
    return prob, pauli_correct(measured, outcome, "A", resource, corrections)


def step2_clean(
    sigma_pm: BlockState,
    outcome: BellOutcome = BellOutcome.PHI_PLUS,
    resource: BellOutcome = BellOutcome.PHI_PLUS,
    corrections: Mapping[BellOutcome, ComplexMatrix] = CORRECTIONS,
) -> tuple[float, BlockState]:
    """
    Back-teleportation C -> A with no further decoherence.

    ``resource`` is the Bell state the pair AB was left in by the forward
    measurement; it enters the correction applied to A.
    """
    return _backward(sigma_pm, outcome, resource, corrections)


def redephase(sigma_pm: BlockState, interaction2: DephasingInteraction, t: float) -> BlockState:
    """Second dephasing window, acting on the pair AB."""
    return dephase(sigma_pm, interaction2, ("A", "B"), t)


def step2_noisy(
    sigma_prime: BlockState,
    outcome: BellOutcome,
    resource: BellOutcome = BellOutcome.PHI_PLUS,
    corrections: Mapping[BellOutcome, ComplexMatrix] = CORRECTIONS,
) -> tuple[float, BlockState]:
    """Back-teleportation after the second dephasing; returns the AE state."""
    prob, post = _backward(sigma_prime, outcome, resource, corrections)
    return prob, trace_qubits(post, ("B", "C"))


def noisy_branches(
    sigma_prime: BlockState,
    resource: BellOutcome = BellOutcome.PHI_PLUS,
    tol: float = 1e-10,
) -> dict[BellOutcome, tuple[float, BlockState]]:
    """
    All four back-teleportation outcomes after the second dephasing.

    The two Phi outcomes must give the same corrected AE state, and so must
    the two Psi outcomes; a :class:`ModelError` is raised otherwise.
    """
    out = {o: step2_noisy(sigma_prime, o, resource) for o in BellOutcome}
    for a, b in ((BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS),
                 (BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS)):
        diff = linalg.op_norm(out[a][1].matrix() - out[b][1].matrix())
        if diff > tol:
            raise ModelError(f"{a.value} and {b.value} branches differ by {diff:.3e}")
    return out


def ce_state(sigma_pm: BlockState) -> BlockState:
    return trace_qubits(sigma_pm, ("A", "B"))


def ae_state(sigma_pm2: BlockState) -> BlockState:
    return trace_qubits(sigma_pm2, ("B", "C"))


@dataclass(frozen=True)
class Stage:
    name: str
    state: BlockState
    outcome: BellOutcome | None = None
    probability: float = 1.0


@dataclass
class StageTrace:
    """Every intermediate state of one protocol run, in order."""

    stages: list[Stage] = field(default_factory=list)

    def add(self, name, state, outcome=None, probability=1.0):
        if not 0.0 <= probability <= 1.0 + 1e-12:
            raise ModelError(f"stage {name}: probability {probability} outside [0, 1]")
        self.stages.append(Stage(name, state, outcome, probability))

    def __getitem__(self, name: str) -> Stage:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    def names(self) -> list[str]:
        return [s.name for s in self.stages]

    def validate(self, tol: float = 1e-9) -> "StageTrace":
        for s in self.stages:
            s.state.validate(tol)
        return self


def run(
    psi: PureQubit,
    env: EnvDensity,
    interaction1: DephasingInteraction,
    tau: float,
    interaction2: DephasingInteraction | None = None,
    t: float = 0.0,
    outcome1: BellOutcome = BellOutcome.PHI_PLUS,
    outcome2: BellOutcome = BellOutcome.PHI_PLUS,
    corrections: Mapping[BellOutcome, ComplexMatrix] = CORRECTIONS,
) -> StageTrace:
    """
    Full bidirectional run, recording each stage.

    Stage names: ``initial``, ``dephased``, ``forward``, then either
    ``backward`` (no second interaction) or ``redephased`` and ``backward``.
    The ``backward`` stage holds the full ABC+E state; use :func:`ae_state`
    for the AE part.
    """
    trace = StageTrace()
    sigma0, sigma_tau, p1, sigma_pm = _forward(psi, env, interaction1, tau, outcome1, corrections)
    trace.add("initial", sigma0)
    trace.add("dephased", sigma_tau)
    trace.add("forward", sigma_pm, outcome1, p1)
    state = sigma_pm
    if interaction2 is not None:
        state = redephase(sigma_pm, interaction2, t)
        trace.add("redephased", state)
    p2, sigma_pm2 = _backward(state, outcome2, outcome1, corrections)
    trace.add("backward", sigma_pm2, outcome2, p2)
    return trace
