"""Figure rendering for the report-producing CLI paths.

Every figure is written next to the delimited output it illustrates; the
CLI never opens interactive windows.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_scan_figure(scan, path: str) -> None:
    """|det(1 - A(1/2 + it))| over the scanned grid with zero markers."""
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.semilogy(scan.t_grid, np.abs(scan.det_values), lw=1.2, color="#27517a")
    for z in scan.zeros:
        ax.axvline(z.t, color="#b2303c", lw=0.8, ls="--")
        ax.annotate(f"{z.t:.6f}", (z.t, ax.get_ylim()[0]),
                    textcoords="offset points", xytext=(4, 10), fontsize=8,
                    color="#b2303c")
    ax.set_xlabel("t  (s = 1/2 + it)")
    ax.set_ylabel("|det(1 - L)|")
    ax.set_title(f"q = {scan.q}, symmetry = {scan.symmetry}, M = {scan.order}")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_spectrum_figure(entries, q: int, path: str) -> None:
    """Geodesic counting function N(l) for the enumerated spectrum."""
    lengths = np.sort(np.array([e.length for e in entries]))
    counts = np.arange(1, len(lengths) + 1)
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.step(lengths, counts, where="post", lw=1.2, color="#27517a")
    if len(lengths) > 8:
        ax.semilogy(lengths, np.exp(lengths) / np.maximum(lengths, 1e-9), "--",
                    lw=0.9, color="#888888", label="e^l / l")
        ax.legend(fontsize=8)
    ax.set_yscale("log")
    ax.set_xlabel("geodesic length l")
    ax.set_ylabel("N(l)")
    ax.set_title(f"primitive length spectrum, q = {q}")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_extension_figure(xs, values, q: int, path: str) -> None:
    """Extended period function along its domain."""
    vals = np.asarray(values)
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(xs, vals.real, lw=1.1, label="Re psi", color="#27517a")
    if np.max(np.abs(vals.imag)) > 1e-14:
        ax.plot(xs, vals.imag, lw=1.1, label="Im psi", color="#b2303c")
    ax.set_xlabel("t")
    ax.set_ylabel("psi(t)")
    ax.set_title(f"extended period function, q = {q}")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
