"""Figure rendering for the report paths: every figure lands in a file
next to the delimited data it accompanies (headless Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_waveform(times, states, state_names, path, title=None):
    fig, ax = plt.subplots(figsize=(7, 4))
    for k, name in enumerate(state_names):
        ax.plot(times, states[:, k], label=name, lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel("state")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_orbit(states, state_names, path, title=None):
    """Phase-plane (or 3-D phase-space) portrait of an orbit."""
    if states.shape[1] >= 3:
        fig = plt.figure(figsize=(5.5, 5))
        ax = fig.add_subplot(projection="3d")
        ax.plot(states[:, 0], states[:, 1], states[:, 2], lw=0.9)
        ax.set_xlabel(state_names[0])
        ax.set_ylabel(state_names[1])
        ax.set_zlabel(state_names[2])
    else:
        fig, ax = plt.subplots(figsize=(5, 5))
        ax.plot(states[:, 0], states[:, 1], lw=0.9)
        ax.set_xlabel(state_names[0])
        ax.set_ylabel(state_names[1])
        ax.set_aspect("auto")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_decay(cycles, deviations, fitted_ratio, n_used, path, title=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(cycles, deviations, "o", ms=4, label="measured deviation")
    ks = np.asarray(cycles[:n_used], dtype=float)
    if len(ks) >= 2 and deviations[0] > 0:
        fit = deviations[0] * fitted_ratio ** ks
        ax.semilogy(ks, fit, "-", lw=1.2, label=f"fit: r = {fitted_ratio:.4g}/cycle")
    ax.set_xlabel("cycle")
    ax.set_ylabel("section-crossing deviation")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_balance(curve, path, title=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    v2 = curve.vmax ** 2
    ax.plot(v2, curve.p_pos, label="positive-part dissipation", lw=1.2)
    ax.plot(v2, curve.p_neg, label="negative-part generation", lw=1.2)
    ax.axvline(curve.intersection_vmax ** 2, color="gray", ls=":", lw=1.0)
    ax.annotate(
        f"oscillation point V = {curve.intersection_vmax:.4g}",
        xy=(curve.intersection_vmax ** 2, curve.slope_pos * curve.intersection_vmax ** 2),
        fontsize=8,
    )
    ax.set_xlabel("V_max^2")
    ax.set_ylabel("average power per cycle")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
