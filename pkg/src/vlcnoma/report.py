"""Result serialization: delimited tables and rendered figures.

CSV output is deliberately boring: comma separated, CRLF line endings,
header row first, floats written with repr so equal runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ResultTable

__all__ = ["write_result", "render_figures", "format_cell"]


def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    raise TypeError(f"unsupported cell type {type(value).__name__}")


def _write_table(name: str, columns, rows, out_dir: str) -> str:
    path = os.path.join(out_dir, f"{name}.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path


def write_result(table: ResultTable, out_dir: str) -> list[str]:
    """Write the main table and each auxiliary table as CSV files."""
    os.makedirs(out_dir, exist_ok=True)
    paths = [_write_table(table.name, table.columns, table.rows, out_dir)]
    for key, aux in table.aux.items():
        paths.append(_write_table(f"{table.name}_{key}", aux.columns,
                                  aux.rows, out_dir))
    return paths


# ---------------------------------------------------------------------------
# figures


def _save(fig, out_dir: str, name: str) -> str:
    path = os.path.join(out_dir, f"{name}.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def _render_fig2(table: ResultTable, out_dir: str) -> list[str]:
    hist = table.aux.get("hist")
    if hist is None or not hist.rows:
        return []
    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_tsnr: dict[float, list] = {}
    for tsnr, left, right, count in hist.rows:
        by_tsnr.setdefault(tsnr, []).append((left, right, count))
    for tsnr, bins in sorted(by_tsnr.items()):
        lefts = [b[0] for b in bins]
        counts = [b[2] for b in bins]
        width = bins[0][1] - bins[0][0]
        ax.bar(lefts, counts, width=width, align="edge", alpha=0.55,
               label=f"transmit SNR {tsnr:g} dB")
    ax.set_xlabel("sum rate (bit/s/Hz)")
    ax.set_ylabel("trials")
    ax.set_title("Sum-rate distribution over random user drops")
    ax.legend()
    return [_save(fig, out_dir, table.name)]


def _render_fig3(table: ResultTable, out_dir: str) -> list[str]:
    summary = table.aux.get("summary")
    if summary is None or not summary.rows:
        return []
    tsnrs = sorted({row[2] for row in summary.rows})
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if len(tsnrs) > 1:
        series: dict[tuple, list] = {}
        for k, eps, tsnr, _, _, _, mean, _ in summary.rows:
            series.setdefault((k, eps), []).append((tsnr, mean))
        for (k, eps), pts in sorted(series.items()):
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                    label=f"K={k}, eps={eps:g}")
        ax.set_xlabel("transmit SNR (dB)")
    else:
        series = {}
        for k, eps, _, _, _, _, mean, _ in summary.rows:
            series.setdefault((eps,), []).append((k, mean))
        for (eps,), pts in sorted(series.items()):
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                    label=f"eps={eps:g}")
        ax.set_xlabel("number of users")
    ax.set_ylabel("mean sum rate (bit/s/Hz)")
    ax.set_title("Mean sum rate across user counts and residual levels")
    ax.legend()
    return [_save(fig, out_dir, table.name)]


def _render_fig4(table: ResultTable, out_dir: str) -> list[str]:
    summary = table.aux.get("summary")
    if summary is None or not summary.rows:
        return []
    tsnrs = sorted({row[1] for row in summary.rows})
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if len(tsnrs) > 1:
        series: dict[float, list] = {}
        for eps, tsnr, _, _, _, _, mean, _ in summary.rows:
            series.setdefault(eps, []).append((tsnr, mean))
        for eps, pts in sorted(series.items()):
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="s",
                    label=f"eps={eps:g}")
        ax.set_xlabel("transmit SNR (dB)")
    else:
        pts = sorted((row[0], row[6]) for row in summary.rows)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="s")
        ax.set_xlabel("residual interference level")
    ax.set_ylabel("mean worst-user rate (bit/s/Hz)")
    ax.set_title("Max-min rate across residual levels")
    if len(tsnrs) > 1:
        ax.legend()
    return [_save(fig, out_dir, table.name)]


def _render_maxmin(table: ResultTable, out_dir: str) -> list[str]:
    if not table.rows:
        return []
    profiles: dict[str, list] = {}
    for _, label, j, _, _, rate, feasible in table.rows:
        profiles.setdefault(label, []).append((j, rate, feasible))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    labels = list(profiles)
    nprof = len(labels)
    width = 0.8 / nprof
    for p, label in enumerate(labels):
        pts = sorted(profiles[label])
        xs = [j - 0.4 + (p + 0.5) * width for j, _, _ in pts]
        ys = [0.0 if not f or math.isnan(r) else r for _, r, f in pts]
        ax.bar(xs, ys, width=width, label=f"targets {label}")
    ax.set_xticks(sorted({j for pts in profiles.values() for j, _, _ in pts}))
    ax.set_xlabel("user (ascending channel gain)")
    ax.set_ylabel("rate (bit/s/Hz)")
    ax.set_title("Max-min allocation for the fixed gain example")
    ax.legend()
    return [_save(fig, out_dir, table.name)]


_CLASS_COLORS = {0: "0.6", 1: "tab:blue", 2: "tab:orange",
                 3: "tab:green", 4: "tab:red"}
_CLASS_NAMES = {0: "uncovered", 1: "1 emitter", 2: "2 emitters",
                3: "3 emitters", 4: "4 emitters"}


def _render_network(table: ResultTable, out_dir: str) -> list[str]:
    cells = table.aux.get("cells")
    if cells is None or not table.rows:
        return []
    fig, ax = plt.subplots(figsize=(6.5, 6))
    seen = set()
    for _, x, y, cls, _, dedicated, _, _, _ in table.rows:
        label = _CLASS_NAMES.get(cls) if cls not in seen else None
        seen.add(cls)
        ax.scatter([x], [y], s=28 if dedicated else 16,
                   marker="^" if dedicated else "o",
                   color=_CLASS_COLORS.get(cls, "k"), label=label)
    for vap_id, x, y, color, *_ in cells.rows:
        ax.scatter([x], [y], marker="s", s=70,
                   color="tab:purple" if color else "tab:brown",
                   edgecolor="k", zorder=3)
        ax.annotate(str(vap_id), (x, y), textcoords="offset points",
                    xytext=(4, 4), fontsize=8)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title("User drop, visibility classes, and ceiling emitters")
    ax.legend(loc="upper right", fontsize=8)
    return [_save(fig, out_dir, table.name)]


_RENDERERS = {
    "fig2": _render_fig2,
    "fig3": _render_fig3,
    "fig4": _render_fig4,
    "maxmin_example": _render_maxmin,
    "network_demo": _render_network,
}


def render_figures(table: ResultTable, out_dir: str) -> list[str]:
    """Render the experiment's figures as PNG files next to the CSVs."""
    os.makedirs(out_dir, exist_ok=True)
    renderer = _RENDERERS.get(table.name)
    if renderer is None:
        return []
    return renderer(table, out_dir)
