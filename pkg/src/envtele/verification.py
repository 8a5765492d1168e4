"""
Randomized invariant suites behind ``envtele verify``.

Each suite returns the largest residual it saw and compares it with its
tolerance. Instances are drawn from a seeded generator so a failing run can
be replayed with the reported seed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Mapping

import numpy as np

from . import linalg, oracle, protocol, scenarios
from .entanglement import (
    bell_pair_entanglement,
    dephasing_entanglement,
    separability_check,
)
from .model import BellOutcome, DephasingInteraction, EnvDensity, PureQubit, to_full
from .protocol import CORRECTIONS, ce_state, ae_state

DEFAULT_TOLERANCES = {
    "oracle": 1e-10,
    "probability": 1e-12,
    "round_trip": 1e-12,
    "outcome_independence": 1e-12,
    "coherence_transfer": 1e-12,
    "entanglement_ratio": 1e-10,
    "separability": 1e-9,
    "fig1": 1e-10,
    "fig2": 1e-10,
    "degenerate": 1e-12,
}


@dataclass
class SuiteResult:
    name: str
    max_residual: float
    tolerance: float
    seed: int
    instances: int

    @property
    def passed(self) -> bool:
        return bool(self.max_residual < self.tolerance)

    def as_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


@dataclass
class Instance:
    psi: PureQubit
    env: EnvDensity
    w1: dict
    w2: dict
    separable_first: bool

    @property
    def d(self) -> int:
        return self.env.dim


def random_instance(rng: np.random.Generator, d: int, separable_first: bool = False,
                    psi: PureQubit | None = None) -> Instance:
    """
    Random state, environment and interactions.

    With ``separable_first`` the first-window unitaries are diagonal in the
    environment's eigenbasis, so the forward step leaves a separable (but
    generally correlated) qubit-environment state.
    """
    if psi is None:
        psi = PureQubit(*oracle.random_psi(rng))
    if separable_first:
        basis = oracle.random_unitary(rng, d)
        p = rng.dirichlet(np.ones(d))
        env = basis @ np.diag(p) @ linalg.dagger(basis)
        w1 = {lab: basis @ np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, d))) @ linalg.dagger(basis)
              for lab in ("00", "01", "10", "11")}
    else:
        env = oracle.random_density(rng, d)
        gens = {lab: oracle.random_hermitian(rng, d) for lab in ("00", "01", "10", "11")}
        tau = rng.uniform(0.1, 2.0)
        w1 = DephasingInteraction(gens, form="generator").unitaries(tau)
    env = (env + linalg.dagger(env)) / 2
    env = env / np.trace(env)
    w2 = oracle.random_unitaries(rng, d)
    return Instance(psi, EnvDensity(env), w1, w2, separable_first)


def instances(seed: int, count: int, dims=(2, 3, 4)):
    rng = np.random.default_rng(seed)
    for k in range(count):
        yield random_instance(rng, dims[k % len(dims)], separable_first=(k % 4 == 3))


def _trace(inst: Instance, o1, o2, second=True, corrections=CORRECTIONS):
    return protocol.run(
        inst.psi, inst.env, DephasingInteraction(inst.w1), 0.0,
        DephasingInteraction(inst.w2) if second else None, 0.0, o1, o2, corrections,
    )


def suite_oracle(seed, count, corrections=CORRECTIONS):
    worst = 0.0
    for inst in instances(seed, count):
        for o1 in BellOutcome:
            for o2 in BellOutcome:
                tr = _trace(inst, o1, o2, corrections=corrections)
                ref = oracle.full_run(inst.psi.ket, inst.env.matrix, inst.w1, inst.w2, o1, o2,
                                      corrections=corrections)
                for name, fs in ref.states.items():
                    worst = max(worst, linalg.op_norm(to_full(tr[name].state) - fs.matrix))
    return worst


def suite_probability(seed, count, corrections=CORRECTIONS):
    worst = 0.0
    for inst in instances(seed, count):
        for o1 in BellOutcome:
            for o2 in BellOutcome:
                for second in (False, True):
                    tr = _trace(inst, o1, o2, second, corrections)
                    for stage in ("forward", "backward"):
                        worst = max(worst, abs(tr[stage].probability - 0.25))
    return worst


def suite_round_trip(seed, count, corrections=CORRECTIONS):
    worst = 0.0
    for inst in instances(seed, count):
        for o1 in BellOutcome:
            for o2 in BellOutcome:
                tr = _trace(inst, o1, o2, second=False, corrections=corrections)
                ce = ce_state(tr["forward"].state).matrix()
                ae = ae_state(tr["backward"].state).matrix()
                worst = max(worst, linalg.trace_distance(ce, ae))
    return worst


_SWAPPED = {"00": "11", "11": "00", "01": "10", "10": "01"}


def suite_outcome_independence(seed, count, corrections=CORRECTIONS):
    """
    Back-teleported AE states agree across all four outcomes. Forward CE
    states agree within the Phi pair and within the Psi pair; a Psi outcome
    equals the Phi+ result for the interaction with pointer labels 00 <-> 11
    and 01 <-> 10 exchanged (the environment marginal differs otherwise, so
    no correction on C alone can make them identical).
    """
    worst = 0.0
    for inst in instances(seed, count):
        swapped = Instance(inst.psi, inst.env, {k: inst.w1[_SWAPPED[k]] for k in inst.w1},
                           inst.w2, inst.separable_first)
        phi_ref = ce_state(_trace(inst, BellOutcome.PHI_PLUS, BellOutcome.PHI_PLUS, False,
                                  corrections)["forward"].state).matrix()
        psi_ref = ce_state(_trace(swapped, BellOutcome.PHI_PLUS, BellOutcome.PHI_PLUS, False,
                                  corrections)["forward"].state).matrix()
        for o in BellOutcome:
            ce = ce_state(_trace(inst, o, BellOutcome.PHI_PLUS, False, corrections)["forward"].state).matrix()
            worst = max(worst, linalg.trace_distance(ce, phi_ref if o.is_phi else psi_ref))
        backward = [ae_state(_trace(inst, BellOutcome.PHI_PLUS, o, False, corrections)["backward"].state).matrix()
                    for o in BellOutcome]
        for m in backward[1:]:
            worst = max(worst, linalg.trace_distance(backward[0], m))
    return worst


def suite_coherence_transfer(seed, count, corrections=CORRECTIONS):
    worst = 0.0
    for inst in instances(seed, count):
        tr = _trace(inst, BellOutcome.PHI_PLUS, BellOutcome.PHI_PLUS, False, corrections)
        c_bell = protocol.bell_coherence(tr["dephased"].state)
        c_qubit = protocol.qubit_coherence(ce_state(tr["forward"].state), inst.psi)
        worst = max(worst, abs(c_bell - c_qubit))
    return worst


def suite_entanglement_ratio(seed, count, corrections=CORRECTIONS):
    worst = 0.0
    rng = np.random.default_rng(seed)
    for k in range(count):
        psi = [PureQubit(1, 0), PureQubit(0, 1)][k] if k < 2 else None
        inst = random_instance(rng, (2, 3, 4)[k % 3], psi=psi)
        tr = _trace(inst, BellOutcome.PHI_PLUS, BellOutcome.PHI_PLUS, False, corrections)
        e_bce = bell_pair_entanglement(tr["dephased"].state)
        e_ce = dephasing_entanglement(ce_state(tr["forward"].state))
        weight = 4 * abs(inst.psi.alpha) ** 2 * abs(inst.psi.beta) ** 2
        worst = max(worst, abs(e_ce - weight * e_bce))
    return worst


def _consistency_violation(state, atol):
    sep, _ = separability_check(state, atol)
    ent = dephasing_entanglement(state)
    return sep != (ent < atol)


def suite_separability(seed, count, corrections=CORRECTIONS, atol=1e-9):
    """Residual is the number of inconsistent verdicts (must stay at 0)."""
    bad = 0
    for inst in instances(seed, count):
        tr = _trace(inst, BellOutcome.PHI_PLUS, BellOutcome.PHI_PLUS, True, corrections)
        states = [ce_state(tr["forward"].state)]
        branches = protocol.noisy_branches(tr["redephased"].state)
        states += [branches[o][1] for o in (BellOutcome.PHI_PLUS, BellOutcome.PSI_PLUS)]
        bad += sum(_consistency_violation(s, atol) for s in states)
        if inst.separable_first:
            e_phi = dephasing_entanglement(states[1])
            e_psi = dephasing_entanglement(states[2])
            bad += abs(e_phi - e_psi) > 1e-10
    return float(bad)


def suite_fig1(seed, count, corrections=CORRECTIONS):
    return scenarios.fig1_table().max_residual


def suite_fig2(seed, count, corrections=CORRECTIONS):
    return scenarios.fig2_table().max_residual


def suite_degenerate(seed, count, corrections=CORRECTIONS):
    """Identity interactions give textbook teleportation; ``t = 0`` reproduces the clean return."""
    worst = 0.0
    rng = np.random.default_rng(seed)
    for k in range(count):
        inst = random_instance(rng, (1, 2, 3)[k % 3])
        ident = DephasingInteraction.identity(inst.d)
        gens = DephasingInteraction({lab: oracle.random_hermitian(rng, inst.d)
                                     for lab in ("00", "01", "10", "11")}, form="generator")
        for o1 in BellOutcome:
            for o2 in BellOutcome:
                tr = protocol.run(inst.psi, inst.env, ident, 0.0, ident, 0.0, o1, o2, corrections)
                a_env = ae_state(tr["backward"].state).matrix()
                a = linalg.partial_trace(a_env, [2, inst.d], [0])
                worst = max(worst, 1 - linalg.uhlmann_fidelity(a, inst.psi.density))
                clean = protocol.run(inst.psi, inst.env, DephasingInteraction(inst.w1), 0.0,
                                     None, 0.0, o1, o2, corrections)
                noisy = protocol.run(inst.psi, inst.env, DephasingInteraction(inst.w1), 0.0,
                                     gens, 0.0, o1, o2, corrections)
                worst = max(worst, linalg.op_norm(
                    to_full(clean["backward"].state) - to_full(noisy["backward"].state)))
    return worst


SUITES: dict[str, Callable] = {
    "oracle": suite_oracle,
    "probability": suite_probability,
    "round_trip": suite_round_trip,
    "outcome_independence": suite_outcome_independence,
    "coherence_transfer": suite_coherence_transfer,
    "entanglement_ratio": suite_entanglement_ratio,
    "separability": suite_separability,
    "fig1": suite_fig1,
    "fig2": suite_fig2,
    "degenerate": suite_degenerate,
}


def corrupted_corrections() -> dict:
    """Correction table with the Phi- entry replaced by the identity."""
    table = dict(CORRECTIONS)
    table[BellOutcome.PHI_MINUS] = np.eye(2, dtype=complex)
    return table


def run_suites(seed: int = 0, count: int = 100,
               tolerances: Mapping[str, float] | None = None,
               corrections=CORRECTIONS, names=None) -> list[SuiteResult]:
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    results = []
    for name in names or SUITES:
        fn = SUITES[name]
        n = 1 if name in ("fig1", "fig2") else count
        if name == "separability":
            # residual counts inconsistent verdicts; any one fails the suite
            residual = float(fn(seed, count, corrections=corrections, atol=tol[name]))
            results.append(SuiteResult(name, residual, 0.5, seed, n))
            continue
        residual = float(fn(seed, count, corrections=corrections))
        results.append(SuiteResult(name, residual, tol[name], seed, n))
    return results


def summarize(results) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "suites": [r.as_dict() for r in results],
    }
