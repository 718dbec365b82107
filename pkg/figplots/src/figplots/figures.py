"""Figure assembly from validated CSV inputs.

Pure plotting: every number drawn comes straight from an input column.  Line
plots use linear axes; the lifetime map uses log-log axes with a color map of
the final contrast.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.figure import Figure

from .schema import PlotJob, load_inputs

L_COLOR = "tab:blue"
R_COLOR = "tab:red"
ROLE_COLORS = {"p": "tab:blue", "q": "tab:green", "s": "tab:orange"}


def build_figure(job: PlotJob) -> Figure:
    data = load_inputs(job)
    builder = {
        "fig2": _fig2,
        "fig3": _fig3,
        "fig5": _fig5,
        "fig6": _fig6,
        "fig7": _fig7,
        "fig8": _fig8,
    }[job.figure]
    return builder(data, dict(job.style))


def _fig2(data, style) -> Figure:
    transfer = data["transfer"]
    fig = Figure(figsize=(5.2, 3.6))
    ax = fig.add_subplot()
    ax.plot(transfer["ratio"], transfer["P3_square"], "-", color=R_COLOR, label="square")
    ax.plot(transfer["ratio"], transfer["P3_shaped"], "--", color=L_COLOR, label="shaped")
    ax.set_xlabel(style.get("xlabel", "detuning / peak Rabi amplitude"))
    ax.set_ylabel(style.get("ylabel", "final target-level population"))
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    fig.tight_layout()
    return fig


def _trajectory_panel(ax, traj, title=None):
    ax.plot(traj["t_us"], traj["P3L"], "-", color=L_COLOR, label="L")
    ax.plot(traj["t_us"], traj["P3R"], "--", color=R_COLOR, label="R")
    ax.set_xlabel("time (us)")
    ax.set_ylabel("target-level population")
    ax.set_ylim(-0.02, 1.05)
    if title:
        ax.set_title(title)
    ax.legend()


def _fig3(data, style) -> Figure:
    fig = Figure(figsize=(5.2, 8.4))
    for k, name in enumerate(("cos_ramp", "gaussian", "cos_squared")):
        ax = fig.add_subplot(3, 1, k + 1)
        _trajectory_panel(ax, data[name], title=name.replace("_", " "))
    fig.tight_layout()
    return fig


def _waveform_panel(ax, wave):
    for role in ("p", "q", "s"):
        ax.step(
            wave["t_us"],
            wave[f"omega_{role}_rad_per_us"],
            where="post",
            color=ROLE_COLORS[role],
            linewidth=0.8,
            label=role,
        )
    ax.set_xlabel("time (us)")
    ax.set_ylabel("Rabi amplitude (rad/us)")
    ax.legend()


def _contrast_panel(ax, traj):
    ax.plot(traj["t_us"], traj["D"], "-", color="black")
    ax.set_xlabel("time (us)")
    ax.set_ylabel("contrast D")
    ax.set_ylim(-0.02, 1.05)


def _fig5(data, style) -> Figure:
    fig = Figure(figsize=(5.2, 6.0))
    _waveform_panel(fig.add_subplot(2, 1, 1), data["waveforms"])
    _contrast_panel(fig.add_subplot(2, 1, 2), data["trajectory"])
    fig.tight_layout()
    return fig


def _fig6(data, style) -> Figure:
    fig = Figure(figsize=(9.0, 6.0))
    _waveform_panel(fig.add_subplot(2, 2, 1), data["awgn_waveforms"])
    _contrast_panel(fig.add_subplot(2, 2, 2), data["awgn_trajectory"])
    _waveform_panel(fig.add_subplot(2, 2, 3), data["fluctuation_waveforms"])
    _contrast_panel(fig.add_subplot(2, 2, 4), data["fluctuation_trajectory"])
    fig.tight_layout()
    return fig


def _fig7(data, style) -> Figure:
    dev = data["deviation"]
    fig = Figure(figsize=(5.2, 3.6))
    ax = fig.add_subplot()
    for role in ("p", "q", "s"):
        ax.plot(dev["delta_rad_per_us"], dev[f"D_{role}"], color=ROLE_COLORS[role], label=role)
    ax.set_xlabel("pulse frequency deviation (rad/us)")
    ax.set_ylabel("final contrast D")
    ax.legend()
    fig.tight_layout()
    return fig


def _fig8(data, style) -> Figure:
    table = data["lifetimes"]
    tau2 = np.unique(table["tau2_us"])
    tau3 = np.unique(table["tau3_us"])
    grid = np.full((tau3.size, tau2.size), np.nan)
    for t2, t3, d in zip(table["tau2_us"], table["tau3_us"], table["D_final"]):
        grid[np.searchsorted(tau3, t3), np.searchsorted(tau2, t2)] = d
    if np.any(np.isnan(grid)):
        raise ValueError("lifetime table does not cover a full rectangular grid")
    fig = Figure(figsize=(5.6, 4.2))
    ax = fig.add_subplot()
    mesh = ax.pcolormesh(tau2, tau3, grid, shading="nearest", vmin=grid.min(), vmax=grid.max())
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("intermediate-level lifetime tau2 (us)")
    ax.set_ylabel("target-level lifetime tau3 (us)")
    fig.colorbar(mesh, ax=ax, label="final contrast D")
    fig.tight_layout()
    return fig
