"""Figure rendering for the report path.

Given the delimited tables the CLI emits, these helpers draw the matching
matplotlib figures to files next to them: potential entries, the
central/tensor/spin-orbit decomposition, and eigenphases with the mixing
angle over the wavenumber sweep.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_potential", "plot_decomposition", "plot_smatrix", "plot_solution"]

_FIGSIZE = (6.0, 4.0)


def _finish(fig, ax, path, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_potential(grid, values, path, *, r_max=None, title=None):
    """Entrywise curves of an n x n potential table."""
    grid = np.asarray(grid)
    values = np.asarray(values)
    n = values.shape[1]
    sel = grid <= (r_max or grid[-1])
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for i in range(n):
        for j in range(i, n):
            ax.plot(grid[sel], values[sel, i, j], label=f"V{i + 1}{j + 1}")
    if title:
        ax.set_title(title)
    return _finish(fig, ax, path, "r [fm]", "V [fm^-2]")


def plot_decomposition(grid, v_c, v_t, v_o, path, *, r_max=4.0):
    """Central / tensor / spin-orbit components over the short range."""
    grid = np.asarray(grid)
    sel = grid <= r_max
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(grid[sel], np.asarray(v_c)[sel], label="V_C (central)")
    ax.plot(grid[sel], np.asarray(v_t)[sel], label="V_T (tensor)")
    ax.plot(grid[sel], np.asarray(v_o)[sel], label="V_O (spin-orbit)")
    ax.set_ylim(-6, 6)
    return _finish(fig, ax, path, "r [fm]", "V [fm^-2]")


def plot_smatrix(k_values, eigenphases, mixings, path):
    """Eigenphases (degrees) and mixing angle over the wavenumber sweep."""
    k_values = np.asarray(k_values)
    ep = np.asarray(eigenphases)
    deg = 180.0 / math.pi
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(k_values, deg * ep[:, 0], label="delta_1")
    ax.plot(k_values, deg * ep[:, 1], label="delta_2")
    ax.plot(k_values, deg * np.asarray(mixings), label="mixing")
    return _finish(fig, ax, path, "k [1/fm]", "angle [deg]")


def plot_solution(grid, components, path):
    """Real and imaginary parts of transformed solution components."""
    grid = np.asarray(grid)
    comps = np.asarray(components)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for j in range(comps.shape[1]):
        ax.plot(grid, comps[:, j].real, label=f"Re phi_{j + 1}")
        if np.max(np.abs(comps[:, j].imag)) > 1e-12:
            ax.plot(grid, comps[:, j].imag, "--", label=f"Im phi_{j + 1}")
    return _finish(fig, ax, path, "r [fm]", "phi")
