"""SVG quick-looks. CSV outputs are the contract; these are for eyeballing."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "isolines"
    return plt


def plot_isolines(x1, x2, isolines, path, labels=("x1", "x2"), title=None, window=None):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.scatter(x1, x2, s=3, c="0.6", lw=0)
    for iso in isolines:
        base = iso.provenance == "base_nonparametric"
        ax.plot(iso.x, iso.y, color="red" if base else "black", lw=1.2 if base else 0.9,
                label=f"{iso.level:g}")
    if window is not None:
        ax.set_xlim(*window[0])
        ax.set_ylim(*window[1])
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])
    if title:
        ax.set_title(title)
    ax.legend(title="survival prob.", fontsize=7, loc="upper right")
    fig.tight_layout()
    fig.savefig(Path(path), format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_diagnostic(report, path, title=None):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 4))
    k = np.arange(len(report.counts))
    lo, hi = report.bounds
    ax.plot(k, report.emp_prob, "o", color="black", ms=4)
    ax.axhline(report.level, color="black", lw=1)
    ax.axhline(lo, color="black", lw=1, ls="--")
    ax.axhline(hi, color="black", lw=1, ls="--")
    ax.set_xlabel("probe (along isoline)")
    ax.set_ylabel("empirical survival probability")
    ax.set_title(title or f"isoline level {report.level:g}")
    fig.tight_layout()
    fig.savefig(Path(path), format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_bootstrap(x1, x2, result, path, labels=("x1", "x2")):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.scatter(x1, x2, s=3, c="0.7", lw=0)
    for iso in result.isolines:
        ax.plot(iso.x, iso.y, color="black", lw=0.4, alpha=0.5)
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])
    ax.set_title(f"{len(result.isolines)} bootstrap isolines, p = {result.level:g}, b = {result.block_length}")
    fig.tight_layout()
    fig.savefig(Path(path), format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_curve(x, y, path, xlabel, ylabel, ylim=None):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(x, y, color="black", lw=1)
    if ylim:
        ax.set_ylim(*ylim)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(Path(path), format="svg", metadata={"Date": None})
    plt.close(fig)
