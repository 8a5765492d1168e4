"""
Domain types for qubit registers coupled to an environment.

A system-environment state is stored as a grid of environment operators
indexed by computational-basis labels of the qubit register. Only labels with
support are kept; the dense matrix is ``sum |L><L'| (x) block[L, L']`` with the
system factor first and the first register qubit most significant.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .linalg import ComplexMatrix

MAX_ENV_DIM = 16
ABC = ("A", "B", "C")


class ModelError(ValueError):
    """Raised when a state or interaction violates its invariants."""


class BellOutcome(enum.Enum):
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"

    @property
    def vector(self) -> np.ndarray:
        """Amplitudes over the two-qubit labels 00, 01, 10, 11."""
        r = 1 / np.sqrt(2)
        return {
            BellOutcome.PHI_PLUS: np.array([r, 0, 0, r], dtype=complex),
            BellOutcome.PHI_MINUS: np.array([r, 0, 0, -r], dtype=complex),
            BellOutcome.PSI_PLUS: np.array([0, r, r, 0], dtype=complex),
            BellOutcome.PSI_MINUS: np.array([0, r, -r, 0], dtype=complex),
        }[self]

    @property
    def is_phi(self) -> bool:
        return self in (BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS)

    @classmethod
    def parse(cls, text: str) -> "BellOutcome":
        key = text.strip().replace("+", "plus").replace("-", "minus").replace("_", "").lower()
        aliases = {
            "phiplus": cls.PHI_PLUS,
            "phiminus": cls.PHI_MINUS,
            "psiplus": cls.PSI_PLUS,
            "psiminus": cls.PSI_MINUS,
        }
        if key not in aliases:
            raise ModelError(f"unknown Bell outcome {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class PureQubit:
    """The state ``alpha|0> + beta|1>``."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ModelError(f"qubit amplitudes not normalized: |a|^2+|b|^2 = {norm!r}")

    @classmethod
    def normalized(cls, alpha: complex, beta: complex) -> "PureQubit":
        n = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        return cls(complex(alpha / n), complex(beta / n))

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    @property
    def density(self) -> ComplexMatrix:
        k = self.ket
        return np.outer(k, k.conj())


@dataclass(frozen=True, eq=False)
class EnvDensity:
    matrix: ComplexMatrix

    def __post_init__(self):
        m = linalg.as_matrix(self.matrix).copy()
        if m.shape[0] > MAX_ENV_DIM:
            raise ModelError(f"environment dimension {m.shape[0]} exceeds {MAX_ENV_DIM}")
        if not linalg.is_density(m, 1e-10):
            raise ModelError("environment matrix is not a density matrix (Hermitian, PSD, trace 1)")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, ket) -> "EnvDensity":
        k = np.asarray(ket, dtype=complex)
        k = k / np.linalg.norm(k)
        return cls(np.outer(k, k.conj()))


@dataclass(frozen=True, eq=False)
class DephasingInteraction:
    """
    Conditional environment operators keyed by pointer-basis sub-labels.

    With ``form="generator"`` the entries are Hermitian ``V`` and the unitary
    for a duration ``t`` is ``exp(-i V t)``. With ``form="unitary"`` the
    entries already are the conditional unitaries and the duration is ignored.
    """

    ops: Mapping[str, ComplexMatrix]
    form: str = "unitary"

    def __post_init__(self):
        if self.form not in ("unitary", "generator"):
            raise ModelError(f"form must be 'unitary' or 'generator', got {self.form!r}")
        if not self.ops:
            raise ModelError("interaction needs at least one conditional operator")
        ops = {}
        dims = set()
        for label, m in self.ops.items():
            a = linalg.as_matrix(m).copy()
            if self.form == "generator" and not linalg.is_hermitian(a, 1e-10):
                raise ModelError(f"generator for label {label!r} is not Hermitian")
            if self.form == "unitary" and not linalg.is_unitary(a, 1e-10):
                raise ModelError(f"operator for label {label!r} is not unitary")
            a.setflags(write=False)
            ops[str(label)] = a
            dims.add(a.shape[0])
        if len(dims) != 1:
            raise ModelError(f"conditional operators have mismatched dimensions {sorted(dims)}")
        object.__setattr__(self, "ops", ops)

    @property
    def env_dim(self) -> int:
        return next(iter(self.ops.values())).shape[0]

    def unitaries(self, duration: float) -> dict[str, ComplexMatrix]:
        if self.form == "unitary":
            return dict(self.ops)
        return {k: linalg.expm_unitary(v, duration) for k, v in self.ops.items()}

    def at(self, duration: float) -> "DephasingInteraction":
        """Unitary-form interaction evaluated at ``duration``."""
        return DephasingInteraction(self.unitaries(duration), form="unitary")

    @classmethod
    def identity(cls, env_dim: int, labels: Sequence[str] = ("00", "01", "10", "11")):
        return cls({lab: np.eye(env_dim) for lab in labels})


def _check_labels(register: Sequence[str], labels: Sequence[str]):
    n = len(register)
    if len(set(register)) != n:
        raise ModelError(f"register names must be unique, got {register}")
    if len(set(labels)) != len(labels):
        raise ModelError(f"duplicate labels {labels}")
    for lab in labels:
        if len(lab) != n or set(lab) - {"0", "1"}:
            raise ModelError(f"label {lab!r} is not a bit string over register {register}")


@dataclass(frozen=True, eq=False)
class BlockState:
    """
    System-environment operator in block form.

    ``blocks[i, j]`` is the environment operator multiplying
    ``|labels[i]><labels[j]|`` on the qubit register. The object is immutable;
    operations return new instances. States that are not normalized (e.g.
    projected but not yet renormalized) are allowed and report
    ``is_normalized == False``.
    """

    register: tuple[str, ...]
    labels: tuple[str, ...]
    blocks: np.ndarray = field(repr=False)

    def __post_init__(self):
        register = tuple(self.register)
        labels = tuple(self.labels)
        _check_labels(register, labels)
        b = np.array(self.blocks, dtype=np.complex128)
        if b.ndim != 4 or b.shape[0] != len(labels) or b.shape[1] != len(labels):
            raise ModelError(f"blocks shape {b.shape} does not match {len(labels)} labels")
        if b.shape[2] != b.shape[3]:
            raise ModelError("environment blocks must be square")
        b.setflags(write=False)
        object.__setattr__(self, "register", register)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "blocks", b)

    @property
    def env_dim(self) -> int:
        return self.blocks.shape[2]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def block(self, row: str, col: str) -> ComplexMatrix:
        """Environment block for a label pair; zero if either label is absent."""
        if row in self.labels and col in self.labels:
            return self.blocks[self.index(row), self.index(col)]
        return np.zeros((self.env_dim, self.env_dim), dtype=np.complex128)

    def trace(self) -> float:
        return float(np.real(sum(np.trace(self.blocks[i, i]) for i in range(len(self.labels)))))

    @property
    def is_normalized(self) -> bool:
        return abs(self.trace() - 1.0) <= 1e-10

    def scaled(self, factor: float) -> "BlockState":
        return BlockState(self.register, self.labels, self.blocks * factor)

    def renormalized(self) -> "BlockState":
        tr = self.trace()
        if tr <= 0:
            raise ModelError("cannot renormalize a state with non-positive trace")
        return self.scaled(1.0 / tr)

    def violations(self, tol: float = 1e-9) -> list[str]:
        """Names of the block invariants this state violates (empty if valid)."""
        found = []
        n = len(self.labels)
        for i in range(n):
            for j in range(n):
                if linalg.op_norm(self.blocks[j, i] - linalg.dagger(self.blocks[i, j])) > tol:
                    found.append(f"block[{self.labels[j]},{self.labels[i]}] != block[{self.labels[i]},{self.labels[j]}]^dagger")
            if not linalg.is_psd(self.blocks[i, i], tol):
                found.append(f"diagonal block {self.labels[i]} not PSD")
        full = to_full(self)
        if not linalg.is_psd(full, tol):
            found.append("assembled matrix not PSD")
        return found

    def validate(self, tol: float = 1e-9, normalized: bool = True) -> "BlockState":
        problems = self.violations(tol)
        if normalized and abs(self.trace() - 1.0) > tol:
            problems.append(f"trace {self.trace():.6g} != 1")
        if problems:
            raise ModelError("invalid BlockState: " + "; ".join(problems))
        return self

    def sub_label(self, label: str, qubits: Sequence[str]) -> str:
        return "".join(label[self.register.index(q)] for q in qubits)

    def matrix(self) -> ComplexMatrix:
        """Qubit-environment states with labels ``0``/``1`` as a ``2 d_E`` matrix.

        Absent labels contribute zero rows and columns, so the result is
        always indexed by qubit value regardless of which labels are kept.
        """
        if len(self.register) != 1:
            raise ModelError("matrix() is only defined for single-qubit registers")
        d = self.env_dim
        out = np.zeros((2 * d, 2 * d), dtype=np.complex128)
        for a in "01":
            for b in "01":
                ia, ib = int(a), int(b)
                out[ia * d:(ia + 1) * d, ib * d:(ib + 1) * d] = self.block(a, b)
        return out


def _label_index(label: str) -> int:
    return int(label, 2)


def initial_state(psi: PureQubit, env: EnvDensity) -> BlockState:
    """``|psi><psi|_A (x) |Phi+><Phi+|_BC (x) R(0)`` over labels 000, 011, 100, 111."""
    labels = ("000", "011", "100", "111")
    amps = {
        "000": psi.alpha / np.sqrt(2),
        "011": psi.alpha / np.sqrt(2),
        "100": psi.beta / np.sqrt(2),
        "111": psi.beta / np.sqrt(2),
    }
    coeff = np.array([[amps[r] * np.conj(amps[c]) for c in labels] for r in labels])
    blocks = coeff[:, :, None, None] * env.matrix[None, None, :, :]
    return BlockState(ABC, labels, blocks)


def to_full(state: BlockState) -> ComplexMatrix:
    n = len(state.register)
    d = state.env_dim
    full = np.zeros((2**n * d, 2**n * d), dtype=np.complex128)
    for i, li in enumerate(state.labels):
        r = _label_index(li) * d
        for j, lj in enumerate(state.labels):
            c = _label_index(lj) * d
            full[r:r + d, c:c + d] = state.blocks[i, j]
    return full


def from_full(
    m,
    register: Sequence[str],
    env_dim: int,
    label_cutoff_tol: float = 1e-12,
    keep_labels: Sequence[str] | None = None,
) -> BlockState:
    """
    Split a dense system-environment operator into a :class:`BlockState`.

    Labels whose entire block row and column fall below ``label_cutoff_tol``
    are dropped. With ``keep_labels`` the retained set is fixed up front and a
    :class:`ModelError` lists any other label carrying non-negligible weight.
    """
    a = linalg.as_matrix(m)
    register = tuple(register)
    n = len(register)
    d = int(env_dim)
    if a.shape[0] != 2**n * d:
        raise ModelError(f"matrix dimension {a.shape[0]} != 2^{n} * {d}")
    all_labels = [format(k, f"0{n}b") for k in range(2**n)]
    grid = a.reshape(2**n, d, 2**n, d).transpose(0, 2, 1, 3)
    weight = np.array(
        [max(np.max(np.abs(grid[k, :])), np.max(np.abs(grid[:, k]))) for k in range(2**n)]
    )
    if keep_labels is None:
        labels = [lab for k, lab in enumerate(all_labels) if weight[k] > label_cutoff_tol]
    else:
        labels = list(keep_labels)
        _check_labels(register, labels)
        offending = [
            lab for k, lab in enumerate(all_labels)
            if lab not in labels and weight[k] > label_cutoff_tol
        ]
        if offending:
            raise ModelError(f"non-negligible weight outside retained labels: {offending}")
    idx = [_label_index(lab) for lab in labels]
    blocks = grid[np.ix_(idx, idx)]
    return BlockState(register, tuple(labels), blocks)


def trace_qubits(state: BlockState, traced: Sequence[str]) -> BlockState:
    """Partial trace over the named register qubits, keeping the environment."""
    traced = list(traced)
    for q in traced:
        if q not in state.register:
            raise ModelError(f"qubit {q!r} not in register {state.register}")
    kept = [q for q in state.register if q not in traced]
    if not kept:
        raise ModelError("cannot trace out every qubit of the register")
    d = state.env_dim
    acc: dict[tuple[str, str], np.ndarray] = {}
    order: list[str] = []
    for i, li in enumerate(state.labels):
        ki, ti = state.sub_label(li, kept), state.sub_label(li, traced)
        if ki not in order:
            order.append(ki)
        for j, lj in enumerate(state.labels):
            if state.sub_label(lj, traced) != ti:
                continue
            kj = state.sub_label(lj, kept)
            key = (ki, kj)
            acc[key] = acc.get(key, np.zeros((d, d), dtype=np.complex128)) + state.blocks[i, j]
    order.sort()
    blocks = np.zeros((len(order), len(order), d, d), dtype=np.complex128)
    for (ki, kj), b in acc.items():
        blocks[order.index(ki), order.index(kj)] = b
    return BlockState(tuple(kept), tuple(order), blocks)


def trace_env(state: BlockState) -> ComplexMatrix:
    """Reduced density operator of the qubit register (environment traced out)."""
    n = len(state.register)
    out = np.zeros((2**n, 2**n), dtype=np.complex128)
    for i, li in enumerate(state.labels):
        for j, lj in enumerate(state.labels):
            out[_label_index(li), _label_index(lj)] = np.trace(state.blocks[i, j])
    return out


def env_marginal(state: BlockState) -> ComplexMatrix:
    return sum(state.blocks[i, i] for i in range(len(state.labels)))
