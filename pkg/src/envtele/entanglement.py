"""
Qubit-environment entanglement for pure-dephasing states.

A pure-dephasing qubit-environment state has the block form

    [[p0 * rho0,        a * w0 R w1^dagger],
     [conj(a) * (...),  p1 * rho1         ]]

with ``rho_i = w_i R w_i^dagger``. It is separable exactly when ``rho0 ==
rho1``, and its entanglement is ``4 p0 p1 (1 - F(rho0, rho1))``.
The functions here accept any :class:`BlockState` with two retained labels,
so the effectively two-level Bell pair of the first dephasing qualifies too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .model import BlockState, ModelError, PureQubit, trace_qubits

SEPARABILITY_ATOL = 1e-9
_ZERO_WEIGHT = 1e-14
_FORM_TOL = 1e-8


@dataclass(frozen=True)
class CorrelationReport:
    entanglement: float
    separable: bool
    fidelity_term: float
    coherence: complex
    condition_residual: float


def _two_level(state: BlockState) -> tuple[str, str]:
    labels = state.labels
    if len(state.register) == 1:
        return "0", "1"
    if len(labels) != 2:
        raise ModelError(f"expected a two-level block structure, got labels {labels}")
    return labels[0], labels[1]


def _weights_and_blocks(state: BlockState):
    l0, l1 = _two_level(state)
    b00, b11, b01 = state.block(l0, l0), state.block(l1, l1), state.block(l0, l1)
    p0 = float(np.real(np.trace(b00)))
    p1 = float(np.real(np.trace(b11)))
    return p0, p1, b00, b11, b01


def check_dephasing_form(state: BlockState, tol: float = _FORM_TOL) -> None:
    """
    Raise :class:`ModelError` unless ``state`` has pure-dephasing block form.

    Checks that the normalized diagonal blocks share a spectrum and that the
    singular values of the off-diagonal block, scaled by ``1/sqrt(p0 p1)``,
    reproduce it. Both follow from conjugating one environment state by two
    conditional unitaries.
    """
    p0, p1, b00, b11, b01 = _weights_and_blocks(state)
    for p, b in ((p0, b00), (p1, b11)):
        if not linalg.is_psd(b, tol):
            raise ModelError("diagonal environment block is not positive semidefinite")
    if min(p0, p1) < _ZERO_WEIGHT:
        if linalg.op_norm(b01) > tol:
            raise ModelError("coherence block present although one population vanishes")
        return
    s0 = linalg.herm_eig(b00 / p0)[0]
    s1 = linalg.herm_eig(b11 / p1)[0]
    if np.max(np.abs(s0 - s1)) > tol:
        raise ModelError("conditional environment states are not unitarily related")
    sv = np.sort(np.linalg.svd(b01, compute_uv=False)) / np.sqrt(p0 * p1)
    if np.max(np.abs(sv - s0)) > tol:
        raise ModelError("coherence block is not a conditional-unitary image of the environment state")


def _conditional_states(state: BlockState):
    p0, p1, b00, b11, _ = _weights_and_blocks(state)
    if min(p0, p1) < _ZERO_WEIGHT:
        return p0, p1, None, None
    return p0, p1, b00 / p0, b11 / p1


def dephasing_entanglement(state: BlockState, validate: bool = True) -> float:
    """
    Entanglement ``4 p0 p1 [1 - F(rho0, rho1)]`` of a two-level system with
    its environment.

    Weights are read from the diagonal-block traces. Returns 0 when either
    weight vanishes.
    """
    if validate:
        check_dephasing_form(state)
    p0, p1, r0, r1 = _conditional_states(state)
    if r0 is None:
        return 0.0
    return 4.0 * p0 * p1 * (1.0 - linalg.uhlmann_fidelity(r0, r1))


def bell_pair_entanglement(state: BlockState) -> float:
    """Entanglement of the dephased Bell pair BC with the environment (A traced out)."""
    bc = state
    if state.register != ("B", "C"):
        bc = trace_qubits(state, [q for q in state.register if q not in ("B", "C")])
    return dephasing_entanglement(bc)


def entanglement_ratio_check(e_ce: float, e_bce: float, psi: PureQubit, tol: float = 1e-10) -> bool:
    """True when the teleported-qubit entanglement is ``4|a|^2|b|^2`` times the Bell pair's."""
    weight = 4 * abs(psi.alpha) ** 2 * abs(psi.beta) ** 2
    return abs(e_ce - weight * e_bce) < tol


def separability_check(state: BlockState, atol: float = SEPARABILITY_ATOL) -> tuple[bool, float]:
    """
    Separable iff the normalized conditional environment states coincide.

    Returns ``(separable, residual)`` with the residual measured in operator
    norm. A state with a vanishing population is a product state and reports
    a residual of 0.
    """
    _, _, r0, r1 = _conditional_states(state)
    if r0 is None:
        return True, 0.0
    residual = linalg.op_norm(r0 - r1)
    return residual <= atol, residual


def correlation_report(state: BlockState, psi: PureQubit | None = None,
                       atol: float = SEPARABILITY_ATOL) -> CorrelationReport:
    check_dephasing_form(state)
    p0, p1, r0, r1 = _conditional_states(state)
    fid = 1.0 if r0 is None else linalg.uhlmann_fidelity(r0, r1)
    sep, res = separability_check(state, atol)
    l0, l1 = _two_level(state)
    off = complex(np.trace(state.block(l0, l1)))
    if psi is not None and abs(psi.alpha * np.conj(psi.beta)) > 1e-12:
        coh = off / (psi.alpha * np.conj(psi.beta))
    elif p0 * p1 > 0:
        coh = off / np.sqrt(p0 * p1)
    else:
        coh = 0j
    return CorrelationReport(
        entanglement=4.0 * p0 * p1 * (1.0 - fid),
        separable=sep,
        fidelity_term=fid,
        coherence=complex(coh),
        condition_residual=res,
    )
