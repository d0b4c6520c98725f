"""Run reports: delimited exports, structured summaries and figures.

Every pipeline writes a machine-readable ``report.json`` with stable key
order, plain-text cell/table exports next to it, and matplotlib figures
rendered to PNG files in a ``figures/`` subdirectory.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .boxset import BoxSet

__all__ = ["write_report", "export_boxset", "plot_boxsets", "plot_sweep",
           "write_sweep_table", "write_sweep_blocks"]

_SET_COLORS = {
    "S": "#999999",
    "A": "#1f77b4",
    "R": "#d62728",
    "C": "#2ca02c",
    "N": "#bbbbbb",
    "Inv": "#9467bd",
}


def write_report(out_dir, payload: dict) -> Path:
    path = Path(out_dir) / "report.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def export_boxset(out_dir, name: str, boxset: BoxSet) -> dict:
    """Write the .cells and .table exports; returns artifact paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = out / f"{name}.cells"
    table = out / f"{name}.table"
    boxset.write_cells(cells)
    boxset.write_table(table)
    # artifact paths are recorded relative to the report directory
    return {f"{name}_cells": cells.name, f"{name}_table": table.name}


def _figure_path(out_dir, name: str) -> Path:
    fig_dir = Path(out_dir) / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    return fig_dir / f"{name}.png"


def plot_boxsets(out_dir, name: str, grid, named_sets: dict, title: str = "") -> str | None:
    """Render named cell sets over the domain (1-D bands or 2-D raster)."""
    if grid.dim > 2:
        return None
    path = _figure_path(out_dir, name)
    fig, ax = plt.subplots(figsize=(7, 4 if grid.dim == 1 else 6))
    if grid.dim == 1:
        for row, (label, bs) in enumerate(named_sets.items()):
            color = _SET_COLORS.get(label, f"C{row}")
            if bs:
                lo, hi = bs.cell_bounds()
                ax.broken_barh([(a[0], b[0] - a[0]) for a, b in zip(lo, hi)],
                               (row + 0.1, 0.8), color=color)
        ax.set_yticks([r + 0.5 for r in range(len(named_sets))])
        ax.set_yticklabels(list(named_sets))
        ax.set_xlim(grid.domain.lo[0], grid.domain.hi[0])
        ax.set_xlabel("x")
    else:
        img = np.zeros(grid.subdivisions, dtype=float)
        handles = []
        for k, (label, bs) in enumerate(named_sets.items(), start=1):
            if bs:
                coords = grid.coords_of(bs.ids)
                img[coords[:, 0], coords[:, 1]] = k
            color = _SET_COLORS.get(label, f"C{k}")
            handles.append(plt.Rectangle((0, 0), 1, 1, color=color, label=label))
        cmap = matplotlib.colors.ListedColormap(
            ["white"] + [_SET_COLORS.get(l, f"C{k + 1}") for k, l in enumerate(named_sets)])
        ax.imshow(img.T, origin="lower", cmap=cmap, vmin=0, vmax=len(named_sets),
                  extent=(grid.domain.lo[0], grid.domain.hi[0],
                          grid.domain.lo[1], grid.domain.hi[1]),
                  interpolation="nearest", aspect="equal")
        ax.legend(handles=handles, loc="upper right", fontsize=8)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    ax.set_title(title or name)
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return f"figures/{path.name}"


def _sweep_rows(report):
    rows = []
    for rec in report.records:
        d = rec.decomposition
        rows.append({
            "lambda": rec.lam,
            "S": len(rec.invariant),
            "A": len(d.attractor) if d else 0,
            "R": len(d.repeller) if d else 0,
            "isolating": rec.isolation_passed,
            "status": rec.decomposition_status,
        })
    return rows


def write_sweep_table(out_dir, report) -> str:
    """Columnar TSV: lambda, set sizes and pass flags, one row per sample."""
    path = Path(out_dir) / "sweep.tsv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("lambda\tS_cells\tA_cells\tR_cells\tisolating\tdecomposition\n")
        for row in _sweep_rows(report):
            fh.write(f"{row['lambda']!r}\t{row['S']}\t{row['A']}\t{row['R']}\t"
                     f"{'pass' if row['isolating'] else 'fail'}\t{row['status']}\n")
    return path.name


def write_sweep_blocks(out_dir, report, hausdorff_from_anchor: dict | None = None) -> str:
    """Human-readable sweep report, one block per parameter sample."""
    path = Path(out_dir) / "sweep_report.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    drift = hausdorff_from_anchor or {}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"sweep over lambda samples {list(report.plan.lambdas)}\n")
        fh.write(f"verified run: {list(report.verified_lambdas)}\n")
        for rec in report.records:
            fh.write("\n")
            fh.write(f"lambda = {rec.lam!r}\n")
            fh.write(f"  isolating(N): {'pass' if rec.cert_region.moat_verified else 'fail'}"
                     f"  |Inv(N)| = {len(rec.invariant)}\n")
            for label, cert in (("N_A", rec.cert_attractor), ("N_R", rec.cert_repeller)):
                if cert is not None:
                    fh.write(f"  isolating({label}): {'pass' if cert.moat_verified else 'fail'}"
                             f"  |Inv({label})| = {len(cert.invariant)}\n")
            if rec.decomposition is not None:
                d = rec.decomposition
                fh.write(f"  decomposition: {rec.decomposition_status}  "
                         f"|A| = {len(d.attractor)} |R| = {len(d.repeller)} |C| = {len(d.connecting)}\n")
            elif rec.decomposition_status != "not-run":
                fh.write(f"  decomposition: {rec.decomposition_status}\n")
            if rec.lam in drift:
                fh.write(f"  attractor drift from anchor: {drift[rec.lam]!r}\n")
    return path.name


def plot_sweep(out_dir, report, name: str = "sweep") -> str:
    rows = _sweep_rows(report)
    path = _figure_path(out_dir, name)
    lams = [r["lambda"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True,
                                   gridspec_kw={"height_ratios": [3, 1]})
    for key, color in (("S", _SET_COLORS["S"]), ("A", _SET_COLORS["A"]), ("R", _SET_COLORS["R"])):
        ax1.plot(lams, [r[key] for r in rows], "o-", color=color, label=f"|{key}|")
    ax1.set_ylabel("cells")
    ax1.legend(fontsize=8)
    ax2.plot(lams, [1 if r["isolating"] else 0 for r in rows], "s", color="black")
    ax2.set_yticks([0, 1])
    ax2.set_yticklabels(["fail", "pass"])
    ax2.set_xlabel("lambda")
    ax2.set_ylim(-0.5, 1.5)
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return f"figures/{path.name}"
