"""Matplotlib rendering of the report outputs, written next to the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

_METRIC_LABEL = {"rate": "downlink rate (Mbit/s)", "se": "SE (bit/s/Hz)",
                 "ee": "EE (bit/J)"}
_METRIC_SCALE = {"rate": 1e-6, "se": 1.0, "ee": 1.0}


def save_cdf_overlay(metric: str, analytic_xy, empirical_xy, path: Path,
                     title: str = "") -> Path:
    scale = _METRIC_SCALE[metric]
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.plot(np.asarray(analytic_xy[0]) * scale, analytic_xy[1],
            label="analytic", lw=1.8)
    ax.plot(np.asarray(empirical_xy[0]) * scale, empirical_xy[1],
            label="simulated", lw=1.2, ls="--")
    ax.set_xlabel(_METRIC_LABEL[metric])
    ax.set_ylabel("CDF")
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_optimize_heatmap(result, path: Path, value_scale: float = 1.0,
                          value_label: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    mesh = ax.pcolormesh(result.rhos, result.etas, result.grid * value_scale,
                         shading="nearest", cmap="viridis")
    ax.plot([result.rho_star], [result.eta_star], "r*", ms=14,
            label=f"optimum ({result.eta_star:.2f}, {result.rho_star:.2f})")
    ax.set_xlabel(r"$\rho$ (macro band share)")
    ax.set_ylabel(r"$\eta$ (range-expanded time share)")
    fig.colorbar(mesh, ax=ax, label=value_label or result.objective)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_curves(parameter: str, sweep: dict, objectives, path: Path,
                      title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6.8, 4.6))
    x = sweep[parameter]
    for obj in objectives:
        y = np.asarray(sweep[obj], dtype=float)
        scale = 1e-6 if obj == "r10" else 1.0
        label = f"{obj} (Mbit/s)" if obj == "r10" else obj
        ymax = np.max(np.abs(y))
        ax.plot(x, y * scale / (ymax * scale if ymax else 1.0), label=label)
    ax.set_xlabel(parameter)
    ax.set_ylabel("KPI (normalized to its own maximum)")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
