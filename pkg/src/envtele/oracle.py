"""
Brute-force dense simulator of the bidirectional protocol.

Everything is built as full ``8 d_E x 8 d_E`` matrices from Kronecker
products: the dephasing unitary ``sum |ij><ij| (x) w_ij``, dense Bell
projectors and dense Pauli corrections. Nothing here touches the block
engine, so agreement between the two is a real check. Random instance
generators used by the test suites also live here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import ComplexMatrix, kron_all

MAX_ENV_DIM = 16

_S = 1 / np.sqrt(2)
_BELL = {
    "PhiPlus": np.array([_S, 0, 0, _S], dtype=complex),
    "PhiMinus": np.array([_S, 0, 0, -_S], dtype=complex),
    "PsiPlus": np.array([0, _S, _S, 0], dtype=complex),
    "PsiMinus": np.array([0, _S, -_S, 0], dtype=complex),
}
_PAULI = {
    "PhiPlus": np.eye(2, dtype=complex),
    "PhiMinus": np.diag([1, -1]).astype(complex),
    "PsiPlus": np.array([[0, 1], [1, 0]], dtype=complex),
    "PsiMinus": np.array([[0, 1], [-1, 0]], dtype=complex),  # Z @ X
}
_I2 = np.eye(2, dtype=complex)


def _name(outcome) -> str:
    return getattr(outcome, "value", outcome)


@dataclass(frozen=True, eq=False)
class FullState:
    matrix: ComplexMatrix
    env_dim: int
    register: tuple[str, ...] = ("A", "B", "C")

    def reduced(self, keep: tuple[str, ...]) -> ComplexMatrix:
        """Reduce onto the named qubits plus the environment (last factor)."""
        dims = [2] * len(self.register) + [self.env_dim]
        idx = [self.register.index(q) for q in keep] + [len(self.register)]
        return linalg.partial_trace(self.matrix, dims, idx)


@dataclass
class OracleRun:
    states: dict[str, FullState] = field(default_factory=dict)
    probabilities: dict[str, float] = field(default_factory=dict)


def _pair_operator(op4: ComplexMatrix, pair: tuple[str, str], d_env: int) -> ComplexMatrix:
    """Embed a two-qubit operator on an adjacent pair of ABC, times 1 on E."""
    if pair == ("A", "B"):
        return kron_all([op4, _I2, np.eye(d_env)])
    if pair == ("B", "C"):
        return kron_all([_I2, op4, np.eye(d_env)])
    raise ValueError(f"unsupported pair {pair}")


def _single_operator(op2: ComplexMatrix, qubit: str, d_env: int) -> ComplexMatrix:
    factors = [op2 if q == qubit else _I2 for q in ("A", "B", "C")]
    return kron_all(factors + [np.eye(d_env)])


def dephasing_unitary(ws: dict[str, ComplexMatrix], pair: tuple[str, str], d_env: int) -> ComplexMatrix:
    """``sum_ij |ij><ij|_pair (x) w_ij`` on the full ABC+E space."""
    spectator = ({"A", "B", "C"} - set(pair)).pop()
    total = np.zeros((8 * d_env, 8 * d_env), dtype=complex)
    for i in "01":
        for j in "01":
            p0 = np.zeros((2, 2), dtype=complex)
            p0[int(i), int(i)] = 1
            p1 = np.zeros((2, 2), dtype=complex)
            p1[int(j), int(j)] = 1
            w = ws.get(i + j, np.eye(d_env))
            parts = {pair[0]: p0, pair[1]: p1, spectator: _I2}
            total += kron_all([parts["A"], parts["B"], parts["C"], w])
    return total


def _measure(m, pair, outcome, d_env):
    v = _BELL[_name(outcome)]
    proj = _pair_operator(np.outer(v, v.conj()), pair, d_env)
    unnorm = proj @ m @ proj
    prob = float(np.real(np.trace(unnorm)))
    return prob, unnorm / prob


def full_run(
    psi,
    env,
    w1: dict[str, ComplexMatrix],
    w2: dict[str, ComplexMatrix] | None,
    outcome1="PhiPlus",
    outcome2="PhiPlus",
    corrections: dict[str, ComplexMatrix] | None = None,
) -> OracleRun:
    """
    Run the protocol on dense matrices.

    Parameters
    ----------
    psi : array_like
        Amplitudes of qubit A (length 2), or a 2x2 density matrix.
    env : array_like
        Environment density matrix, ``d_E <= 16``.
    w1, w2 : dict
        Conditional unitaries keyed by ``"00"..."11"`` for the BC and AB
        dephasing windows (already evaluated at their durations). ``w2=None``
        skips the second window. Missing labels default to the identity.
    outcome1, outcome2 : str or BellOutcome
        Selected Bell outcomes of the forward (AB) and backward (BC)
        measurements.
    corrections : dict, optional
        Override of the outcome -> Pauli table (for negative controls).

    Returns
    -------
    OracleRun
        States ``initial``, ``dephased``, ``forward``, optional
        ``redephased`` and ``backward`` plus the two probabilities.
    """
    paulis = dict(_PAULI)
    if corrections is not None:
        paulis.update({_name(k): np.asarray(v, dtype=complex) for k, v in corrections.items()})
    env = linalg.as_matrix(env)
    d = env.shape[0]
    if d > MAX_ENV_DIM:
        raise ValueError(f"environment dimension {d} exceeds {MAX_ENV_DIM}")
    psi = np.asarray(psi, dtype=complex)
    rho_a = psi if psi.ndim == 2 else np.outer(psi, psi.conj())
    bell = _BELL["PhiPlus"]
    o1, o2 = _name(outcome1), _name(outcome2)

    run = OracleRun()
    sigma = kron_all([rho_a, np.outer(bell, bell.conj()), env])
    run.states["initial"] = FullState(sigma, d)

    u = dephasing_unitary(w1, ("B", "C"), d)
    sigma = u @ sigma @ linalg.dagger(u)
    run.states["dephased"] = FullState(sigma, d)

    p1, sigma = _measure(sigma, ("A", "B"), o1, d)
    c = _single_operator(paulis[o1], "C", d)
    sigma = c @ sigma @ linalg.dagger(c)
    run.probabilities["forward"] = p1
    run.states["forward"] = FullState(sigma, d)

    if w2 is not None:
        u2 = dephasing_unitary(w2, ("A", "B"), d)
        sigma = u2 @ sigma @ linalg.dagger(u2)
        run.states["redephased"] = FullState(sigma, d)

    p2, sigma = _measure(sigma, ("B", "C"), o2, d)
    c2 = _single_operator(paulis[o2] @ paulis[o1], "A", d)
    sigma = c2 @ sigma @ linalg.dagger(c2)
    run.probabilities["backward"] = p2
    run.states["backward"] = FullState(sigma, d)
    return run


def qubit_env_metrics(m: ComplexMatrix, d_env: int) -> dict[str, complex | float]:
    """
    Coherence numerator, entanglement and separability residual of a dense
    ``2 d_E`` qubit-environment matrix, read directly off its quadrants.
    """
    b00, b11 = m[:d_env, :d_env], m[d_env:, d_env:]
    b01 = m[:d_env, d_env:]
    p0, p1 = float(np.real(np.trace(b00))), float(np.real(np.trace(b11)))
    if min(p0, p1) < 1e-14:
        return {"off_trace": complex(np.trace(b01)), "entanglement": 0.0, "residual": 0.0}
    r0, r1 = b00 / p0, b11 / p1
    return {
        "off_trace": complex(np.trace(b01)),
        "entanglement": 4 * p0 * p1 * (1 - linalg.uhlmann_fidelity(r0, r1)),
        "residual": linalg.op_norm(r0 - r1),
    }


# --- random instances -------------------------------------------------------

def random_unitary(rng: np.random.Generator, n: int) -> ComplexMatrix:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_density(rng: np.random.Generator, n: int, rank: int | None = None) -> ComplexMatrix:
    k = n if rank is None else rank
    a = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    rho = a @ linalg.dagger(a)
    return rho / np.trace(rho)


def random_hermitian(rng: np.random.Generator, n: int) -> ComplexMatrix:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + linalg.dagger(a)) / 2


def random_psi(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return v / np.linalg.norm(v)


def random_unitaries(rng: np.random.Generator, d_env: int,
                     labels=("00", "01", "10", "11")) -> dict[str, ComplexMatrix]:
    return {lab: random_unitary(rng, d_env) for lab in labels}
