"""
Command-line front end.

    envtele fig1|fig2|custom|verify [--config PATH] [--out PATH] [--seed N]
                                    [--tol NAME=VALUE] [--plot PATH]

Exit codes: 0 success, 1 tolerance or invariant failure, 2 configuration or
I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import linalg, protocol, scenarios, verification
from .entanglement import bell_pair_entanglement, correlation_report
from .model import (
    BellOutcome,
    DephasingInteraction,
    EnvDensity,
    ModelError,
    PureQubit,
    initial_state,
    to_full,
)

log = logging.getLogger("envtele")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
DEFAULT_TOL = {"residual": 1e-10, "separability": 1e-9}


class ConfigError(Exception):
    pass


# --- config parsing ---------------------------------------------------------

def parse_complex(value) -> complex:
    """``[re, im]`` pairs or plain real numbers."""
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, (int, float)) for v in value
    ):
        return complex(value[0], value[1])
    raise ConfigError(f"cannot read complex number from {value!r}")


def parse_matrix(value) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError("matrix must be a non-empty list of rows")
    rows = [[parse_complex(v) for v in row] for row in value]
    if any(len(r) != len(rows) for r in rows):
        raise ConfigError("matrix must be square")
    return np.array(rows, dtype=complex)


def parse_interaction(value) -> DephasingInteraction:
    if not isinstance(value, dict) or "ops" not in value:
        raise ConfigError("interaction needs an 'ops' mapping of label -> matrix")
    form = value.get("form", "unitary")
    ops = {str(k): parse_matrix(m) for k, m in value["ops"].items()}
    try:
        return DephasingInteraction(ops, form=form)
    except (ModelError, linalg.LinalgError) as exc:
        raise ConfigError(f"invalid interaction: {exc}") from exc


def parse_grid(value, default_stop: float) -> tuple[float, ...]:
    if value is None:
        return scenarios.default_grid(default_stop)
    if isinstance(value, list):
        return tuple(float(v) for v in value)
    if isinstance(value, dict):
        start = float(value.get("start", 0.0))
        stop = float(value.get("stop", default_stop))
        num = int(value.get("num", scenarios.DEFAULT_POINTS))
        if num < 1:
            raise ConfigError("grid needs at least one point")
        return tuple(np.linspace(start, stop, num))
    raise ConfigError("grid must be a list of values or {start, stop, num}")


def load_config(path) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def parse_tolerances(items) -> dict[str, float]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            v = float(value)
        except ValueError as exc:
            raise ConfigError(f"tolerance {name} is not a number: {value!r}") from exc
        if not v > 0:
            raise ConfigError(f"tolerance {name} must be positive")
        out[name.strip()] = v
    return out


# --- output -----------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, header, rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def _emit_table(table: scenarios.Table, args, tol: float, plotter) -> int:
    out = args.out or f"{args.command}.csv"
    write_csv(out, table.header, table.rows)
    if args.plot:
        try:
            plotter(table, args.plot)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.plot}: {exc}") from exc
    ok = table.max_residual < tol
    print(f"wrote {len(table.rows)} rows to {out}")
    if args.plot:
        print(f"wrote figure to {args.plot}")
    print(f"max {table.residual_name} residual: {table.max_residual:.3e} (tol {tol:.1e}) "
          f"{'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


# --- commands ---------------------------------------------------------------

def cmd_fig1(args, cfg, tol) -> int:
    from .plotting import plot_fig1

    x2 = [float(v) for v in cfg.get("x2_values", scenarios.FIG1_X2)]
    for v in x2:
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"|x|^2 value {v} outside [0, 1]")
    grid = parse_grid(cfg.get("grid"), 2 * np.pi)
    return _emit_table(scenarios.fig1_table(x2, grid), args, tol["residual"], plot_fig1)


def cmd_fig2(args, cfg, tol) -> int:
    from .plotting import plot_fig2

    c0 = [float(v) for v in cfg.get("c0_values", scenarios.FIG2_C0)]
    for v in c0:
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"c0 value {v} outside [0, 1]")
    grid = parse_grid(cfg.get("grid"), np.pi)
    return _emit_table(scenarios.fig2_table(c0, grid), args, tol["residual"], plot_fig2)


def _outcome(value, rng, probs) -> BellOutcome:
    if value is None:
        return BellOutcome.PHI_PLUS
    if value == "sample":
        outcomes = list(probs)
        p = np.array([probs[o] for o in outcomes])
        return outcomes[rng.choice(len(outcomes), p=p / p.sum())]
    try:
        return BellOutcome.parse(str(value))
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc


def _all_probabilities(state, pair):
    return {o: protocol.project_bell(state, pair, o).trace() for o in BellOutcome}


def custom_report(cfg: dict, seed: int = 0, atol: float = 1e-9):
    """Run a user-configured protocol; return ``(lines, stage_matrices)``."""
    for key in ("psi", "env", "interaction1"):
        if key not in cfg:
            raise ConfigError(f"custom config is missing {key!r}")
    try:
        amps = [parse_complex(v) for v in cfg["psi"]]
        if len(amps) != 2:
            raise ConfigError("psi must have two amplitudes")
        psi = PureQubit(*amps)
        env = EnvDensity(parse_matrix(cfg["env"]))
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc
    inter1 = parse_interaction(cfg["interaction1"])
    inter2 = parse_interaction(cfg["interaction2"]) if cfg.get("interaction2") else None
    for name, inter in (("interaction1", inter1), ("interaction2", inter2)):
        if inter is not None and inter.env_dim != env.dim:
            raise ConfigError(f"{name} acts on dimension {inter.env_dim}, environment has {env.dim}")
    tau, t = float(cfg.get("tau", 0.0)), float(cfg.get("t", 0.0))
    rng = np.random.default_rng(seed)

    sigma_tau = protocol.dephase(initial_state(psi, env), inter1, ("B", "C"), tau)
    probs1 = _all_probabilities(sigma_tau, ("A", "B"))
    o1 = _outcome(cfg.get("outcome1"), rng, probs1)
    trace = protocol.run(psi, env, inter1, tau, inter2, t, o1, BellOutcome.PHI_PLUS)
    before = trace["redephased"].state if inter2 is not None else trace["forward"].state
    probs2 = _all_probabilities(before, ("B", "C"))
    o2 = _outcome(cfg.get("outcome2"), rng, probs2)
    trace = protocol.run(psi, env, inter1, tau, inter2, t, o1, o2)

    lines = []
    lines.append("measurement  outcome   probability   all outcomes")
    for stage, o, probs in (("forward", o1, probs1), ("backward", o2, probs2)):
        alls = " ".join(f"{k.value}={v:.12f}" for k, v in probs.items())
        lines.append(f"{stage:<12} {o.value:<9} {trace[stage].probability:.12f}  {alls}")
    lines.append(f"bell coherence c(tau): {protocol.bell_coherence(trace['dephased'].state):.12g}")
    lines.append(f"bell pair entanglement E_BCE: {bell_pair_entanglement(trace['dephased'].state):.12g}")
    for label, state in (("qubit C after forward", protocol.ce_state(trace["forward"].state)),
                         ("qubit A after backward", protocol.ae_state(trace["backward"].state))):
        rep = correlation_report(state, psi, atol)
        lines.append(
            f"{label}: coherence={rep.coherence:.12g} entanglement={rep.entanglement:.12g} "
            f"separable={str(rep.separable).lower()} residual={rep.condition_residual:.3e}"
        )
    a_env = protocol.ae_state(trace["backward"].state).matrix()
    rho_a = linalg.partial_trace(a_env, [2, env.dim], [0])
    lines.append(f"fidelity(psi_out, psi_in): {linalg.uhlmann_fidelity(rho_a, psi.density):.12g}")
    matrices = {s.name: to_full(s.state) for s in trace.stages}
    return lines, matrices


def cmd_custom(args, cfg, tol) -> int:
    if not cfg:
        raise ConfigError("custom mode needs --config")
    try:
        lines, matrices = custom_report(cfg, seed=args.seed, atol=tol["separability"])
    except (ModelError, linalg.LinalgError) as exc:
        raise ConfigError(str(exc)) from exc
    print("\n".join(lines))
    if args.out:
        rows = []
        for k, (name, m) in enumerate(matrices.items()):
            for (i, j), v in np.ndenumerate(m):
                rows.append((k, i, j, v.real, v.imag))
        header = ("stage_index", "row", "col", "re", "im")
        write_csv(args.out, header, rows)
        print(f"wrote stage matrices ({', '.join(matrices)}) to {args.out}")
    return EXIT_OK


def cmd_verify(args, cfg, tol) -> int:
    count = int(cfg.get("count", args.count))
    corrections = verification.corrupted_corrections() if args.corrupt_corrections else protocol.CORRECTIONS
    suite_tol = {k: v for k, v in tol.items() if k in verification.DEFAULT_TOLERANCES}
    results = verification.run_suites(args.seed, count, suite_tol, corrections, args.suite or None)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name:<22} max_residual={r.max_residual:.3e} tol={r.tolerance:.1e} seed={r.seed}")
    summary = verification.summarize(results)
    print(json.dumps(summary, sort_keys=True))
    if args.out:
        try:
            Path(args.out).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from exc
    for r in results:
        if not r.passed:
            print(f"suite {r.name} failed (seed {r.seed})", file=sys.stderr)
    return EXIT_OK if summary["passed"] else EXIT_FAIL


COMMANDS = {"fig1": cmd_fig1, "fig2": cmd_fig2, "custom": cmd_custom, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="envtele",
        description="Bidirectional teleportation with a dephasing environment kept in the state.",
    )
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--out", help="output path (CSV for fig/custom, JSON summary for verify)")
    p.add_argument("--seed", type=int, default=0, help="seed for random instances and sampling")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")
    p.add_argument("--plot", help="also render the fig1/fig2 table to this image file")
    p.add_argument("--count", type=int, default=100, help="random instances per verify suite")
    p.add_argument("--suite", action="append", choices=sorted(verification.SUITES),
                   help="run only the named verify suite (repeatable)")
    p.add_argument("--corrupt-corrections", action="store_true",
                   help="debug: break the Phi- correction (negative control for verify)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        tol = dict(DEFAULT_TOL)
        tol.update(parse_tolerances(args.tol))
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg, tol)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
