"""
Single-qubit-environment examples: coherence after the noisy back-teleport
and the outcome-dependent entanglement sweep.

Phases are handled as dimensionless products (rate times duration). The
sweeps fix one rate to 1 and vary the duration over the requested grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import protocol
from .entanglement import dephasing_entanglement
from .model import BellOutcome, DephasingInteraction, EnvDensity, PureQubit

EQUAL_SUPERPOSITION = PureQubit(1 / math.sqrt(2), 1 / math.sqrt(2))

FIG1_X2 = (0.1, 0.3, 0.5)
FIG2_C0 = (0.6, 0.7, 0.8, 0.9, 1.0)
DEFAULT_POINTS = 201


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Parameters of the one-qubit-environment model.

    The environment starts in ``diag(c0, 1 - c0)``. The first window applies
    ``w00(tau) = diag(e^{i phi0 tau}, e^{i phi1 tau})`` when BC is in 00, the
    second applies ``e^{i phia t}|a><a| + e^{i phib t}|b><b|`` when AB is in
    00, with ``|a> = x|0> + y|1>`` and ``|b> = y*|0> - x*|1>``. All other
    conditional operators are the identity. ``shared_interaction=True`` makes
    the first window use the second window's operator as well.
    """

    c0: float = 0.5
    phi0: float = 0.0
    phi1: float = 0.0
    x: complex = 1.0
    y: complex = 0.0
    phia: float = 0.0
    phib: float = 0.0
    tau: float = 0.0
    t_grid: tuple[float, ...] = field(default_factory=tuple)
    shared_interaction: bool = False

    def __post_init__(self):
        if not 0.0 <= self.c0 <= 1.0:
            raise ValueError(f"c0 must lie in [0, 1], got {self.c0}")
        norm = abs(self.x) ** 2 + abs(self.y) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|x|^2 + |y|^2 must be 1, got {norm!r}")
        object.__setattr__(self, "t_grid", tuple(float(v) for v in self.t_grid))

    @property
    def c1(self) -> float:
        return 1.0 - self.c0

    @property
    def env(self) -> EnvDensity:
        return EnvDensity(np.diag([self.c0, self.c1]).astype(complex))

    def eigvecs(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.array([self.x, self.y], dtype=complex)
        b = np.array([np.conj(self.y), -np.conj(self.x)], dtype=complex)
        return a, b


def _second_generator(cfg: ScenarioConfig) -> np.ndarray:
    a, b = cfg.eigvecs()
    return -(cfg.phia * np.outer(a, a.conj()) + cfg.phib * np.outer(b, b.conj()))


def build_interactions(cfg: ScenarioConfig) -> tuple[DephasingInteraction, DephasingInteraction]:
    """Generator-form interactions for the two dephasing windows."""
    zero = np.zeros((2, 2), dtype=complex)
    v_second = _second_generator(cfg)
    v_first = v_second if cfg.shared_interaction else -np.diag([cfg.phi0, cfg.phi1]).astype(complex)
    first = DephasingInteraction({"00": v_first, "01": zero, "10": zero, "11": zero}, form="generator")
    second = DephasingInteraction({"00": v_second, "01": zero, "10": zero, "11": zero}, form="generator")
    return first, second


def _branch_sign(branch) -> int:
    if isinstance(branch, BellOutcome):
        return 1 if branch.is_phi else -1
    key = str(branch).lower()
    if key.startswith("phi"):
        return 1
    if key.startswith("psi"):
        return -1
    raise ValueError(f"branch must be Phi or Psi, got {branch!r}")


def closed_form_coherence(cfg: ScenarioConfig, t: float, branch) -> complex:
    """Closed-form coherence of qubit A after the noisy back-teleport (diagonal first window)."""
    s = _branch_sign(branch)
    x2, y2 = abs(cfg.x) ** 2, abs(cfg.y) ** 2
    p0, p1 = cfg.phi0 * cfg.tau, cfg.phi1 * cfg.tau
    pa, pb = s * cfg.phia * t, s * cfg.phib * t
    return complex(
        x2 * (cfg.c0 * np.exp(1j * (p0 + pa)) + cfg.c1 * np.exp(1j * (p1 + pb)))
        + y2 * (cfg.c0 * np.exp(1j * (p0 + pb)) + cfg.c1 * np.exp(1j * (p1 + pa)))
    )


def closed_form_entanglement(c0: float, phase: float) -> float:
    """
    Entanglement of the Phi branch in the shared-interaction sweep with
    ``x = y = 1/sqrt(2)``, equal-superposition input and ``t = tau``.

    The relevant conditional states are ``U R U^dagger`` and ``R`` with
    ``U = w(2t)``. For qubits ``F = Tr(r s) + 2 sqrt(det r det s)``, which
    reduces to ``cos^2 + 4 c0 c1 sin^2`` of ``phase = (phia - phib) t``.
    """
    return float(np.sin(phase) ** 2 * (2 * c0 - 1) ** 2)


def run_branch(cfg: ScenarioConfig, t: float, branch: BellOutcome,
               psi: PureQubit = EQUAL_SUPERPOSITION):
    """AE state after forward step (Phi+), second dephasing for ``t`` and back-teleport."""
    first, second = build_interactions(cfg)
    _, sigma_pm = protocol.step1(psi, cfg.env, first, cfg.tau)
    sigma_prime = protocol.redephase(sigma_pm, second, t)
    _, rho_ae = protocol.step2_noisy(sigma_prime, branch)
    return rho_ae


def engine_coherence(cfg: ScenarioConfig, t: float, branch,
                     psi: PureQubit = EQUAL_SUPERPOSITION) -> complex:
    outcome = BellOutcome.PHI_PLUS if _branch_sign(branch) > 0 else BellOutcome.PSI_PLUS
    return protocol.qubit_coherence(run_branch(cfg, t, outcome, psi), psi)


@dataclass
class Table:
    header: tuple[str, ...]
    rows: list[tuple[float, ...]]
    max_residual: float
    residual_name: str

    def column(self, name: str) -> np.ndarray:
        k = self.header.index(name)
        return np.array([r[k] for r in self.rows])


def default_grid(stop: float, num: int = DEFAULT_POINTS) -> tuple[float, ...]:
    return tuple(np.linspace(0.0, stop, num))


def fig1_config(x2: float) -> ScenarioConfig:
    """Maximally mixed environment, ``phi0 = phia = 0``, ``phi1 tau = pi/2``, ``phib = 1``."""
    return ScenarioConfig(
        c0=0.5, phi0=0.0, phi1=math.pi / 2, tau=1.0,
        x=math.sqrt(x2), y=math.sqrt(1 - x2), phia=0.0, phib=1.0,
    )


def fig1_table(x2_values: Sequence[float] = FIG1_X2,
               grid: Sequence[float] | None = None) -> Table:
    """
    Coherence magnitudes of both back-teleport branches versus ``phib * t``.

    Engine values are reported; ``max_residual`` is the largest deviation
    of the engine's complex coherence from the closed form.
    """
    grid = default_grid(2 * math.pi) if grid is None else tuple(grid)
    rows, worst = [], 0.0
    for x2 in x2_values:
        cfg = fig1_config(x2)
        for phase in grid:
            c_phi = engine_coherence(cfg, phase, "phi")
            c_psi = engine_coherence(cfg, phase, "psi")
            worst = max(
                worst,
                abs(c_phi - closed_form_coherence(cfg, phase, "phi")),
                abs(c_psi - closed_form_coherence(cfg, phase, "psi")),
            )
            rows.append((float(x2), float(phase), abs(c_phi), abs(c_psi)))
    return Table(("x2", "phib_t", "abs_c_phi", "abs_c_psi"), rows, worst, "coherence vs closed form")


def fig2_config(c0: float) -> ScenarioConfig:
    """Shared interaction with ``x = y = 1/sqrt(2)``, ``phia = 1``, ``phib = 0``."""
    r = 1 / math.sqrt(2)
    return ScenarioConfig(c0=c0, x=r, y=r, phia=1.0, phib=0.0, shared_interaction=True)


def fig2_table(c0_values: Sequence[float] = FIG2_C0,
               grid: Sequence[float] | None = None) -> Table:
    """
    Entanglement of both branches versus ``(phia - phib) t`` with ``t = tau``.

    ``max_residual`` covers the Phi branch against
    :func:`closed_form_entanglement` and the Psi branch against zero.
    """
    grid = default_grid(math.pi) if grid is None else tuple(grid)
    rows, worst = [], 0.0
    for c0 in c0_values:
        base = fig2_config(c0)
        for phase in grid:
            cfg = replace(base, tau=float(phase))
            e_phi = dephasing_entanglement(run_branch(cfg, phase, BellOutcome.PHI_PLUS))
            e_psi = dephasing_entanglement(run_branch(cfg, phase, BellOutcome.PSI_PLUS))
            worst = max(worst, abs(e_phi - closed_form_entanglement(c0, phase)), abs(e_psi))
            rows.append((float(c0), float(phase), e_phi, e_psi, e_phi - e_psi))
    return Table(("c0", "phase_t", "E_phi", "E_psi", "E_diff"), rows, worst, "entanglement vs closed form")
