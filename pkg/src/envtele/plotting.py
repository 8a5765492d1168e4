"""Render the sweep tables to image files. CSV stays the primary output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .scenarios import Table  # noqa: E402

_STYLES = {0.1: ("tab:blue", "--"), 0.3: ("tab:red", "-."), 0.5: ("black", "-")}


def _figure(width=6.0):
    golden = (np.sqrt(5) - 1.0) / 2.0
    fig, ax = plt.subplots(figsize=(width, width * golden), facecolor="w")
    return fig, ax


def plot_fig1(table: Table, path) -> None:
    x2 = table.column("x2")
    phase = table.column("phib_t")
    phi, psi = table.column("abs_c_phi"), table.column("abs_c_psi")
    fig, ax = _figure()
    for value in dict.fromkeys(x2):
        sel = x2 == value
        color, ls = _STYLES.get(round(float(value), 6), (None, "-"))
        ax.plot(phase[sel], phi[sel], color=color, ls=ls, label=rf"$|x|^2={value:g}$, $\Phi_\pm$")
        ax.plot(phase[sel], psi[sel], color=color, ls=ls, alpha=0.5, lw=2.5,
                label=rf"$|x|^2={value:g}$, $\Psi_\pm$")
    ax.set_xlabel(r"$\phi_b t$")
    ax.set_ylabel(r"$|c^\lambda(\tau, t)|$")
    ax.set_xlim(phase.min(), phase.max())
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=7, ncol=3, loc="upper center", bbox_to_anchor=(0.5, -0.18))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_fig2(table: Table, path) -> None:
    c0 = table.column("c0")
    phase = table.column("phase_t")
    diff = table.column("E_diff")
    fig, ax = _figure()
    for value in dict.fromkeys(c0):
        sel = c0 == value
        ax.plot(phase[sel], diff[sel], label=rf"$c_0={value:g}$")
    ax.set_xlabel(r"$(\phi_a - \phi_b) t$")
    ax.set_ylabel(r"$E^{\Phi} - E^{\Psi}$")
    ax.set_xlim(phase.min(), phase.max())
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
