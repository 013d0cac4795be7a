"""Matplotlib figures for diagrams, reduction traces and scaling runs.

All functions write a file and return its path; the Agg backend is used so
no display is needed.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402

from .core import Diagram, local_graph  # noqa: E402
from .frameworks import Cost, MaxPlus  # noqa: E402


def _layers(d: Diagram) -> dict[str, int]:
    g = local_graph(d).graph
    depth = {d.init: 0}
    for u, v in nx.bfs_edges(g, d.init):
        depth[v] = depth[u] + 1
    last = max(depth.values(), default=0) + 1
    for n in d.nodes:
        depth.setdefault(n, last)
    depth[d.fin] = max(depth.values()) + (0 if depth[d.fin] == max(depth.values()) else 1)
    return depth


def plot_diagram(d: Diagram, path: str | Path, title: str | None = None) -> Path:
    """Nodes as boxes (one column per process), arrows labelled by outcome."""
    path = Path(path)
    depth = _layers(d)
    col = {p: i for i, p in enumerate(d.processes)}
    pos = {}
    by_layer: dict[int, list[str]] = {}
    for n in d.nodes:
        by_layer.setdefault(depth[n], []).append(n)
    for layer, ns in by_layer.items():
        for j, n in enumerate(ns):
            ps = [col[p] for p in d.dom[n]]
            pos[n] = ((min(ps) + max(ps)) / 2 + 0.15 * j * (len(ns) > 1), -layer)
    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * len(d.processes), 1.2 + 1.1 * len(by_layer)))
    for n, (x, y) in pos.items():
        ps = [col[p] for p in d.dom[n]]
        w = max(ps) - min(ps) + 0.6
        face = "#d9e8f5" if n == d.init else "#f2dede" if n == d.fin else "#f7f7f7"
        ax.add_patch(plt.Rectangle((x - w / 2, y - 0.18), w, 0.36, facecolor=face, edgecolor="black"))
        ax.text(x, y, n, ha="center", va="center", fontsize=9)
    for n in d.nodes:
        for a in d.out.get(n, ()):
            for p in d.sorted_procs(d.dom[n]):
                for t in d.targets(n, a, p):
                    x0, y0 = col[p], pos[n][1] - 0.18
                    x1, y1 = col[p], pos[t][1] + 0.18
                    rad = 0.35 if y1 >= y0 else 0.0
                    ax.annotate(
                        "", xy=(x1, y1), xytext=(x0, y0),
                        arrowprops=dict(arrowstyle="->", lw=0.8, connectionstyle=f"arc3,rad={rad}"),
                    )
                    ax.text((x0 + x1) / 2 + 0.05, (y0 + y1) / 2, a, fontsize=7, color="#444444")
    for p, i in col.items():
        ax.text(i, 0.45, p, ha="center", fontsize=9, fontweight="bold")
    ax.set_xlim(-1, len(d.processes))
    ax.set_ylim(-max(depth.values()) - 0.8, 0.8)
    ax.axis("off")
    ax.set_title(title or d.name)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _scalar(t) -> float | None:
    if isinstance(t, Cost):
        return float(t.c)
    if isinstance(t, MaxPlus):
        finite = [x for row in t.a for x in row if x != float("-inf")]
        return float(max(finite)) if finite else None
    return None


def plot_trace(trace, path: str | Path, title: str = "reduction trace") -> Path:
    """Summary value per reduction step, coloured by step kind."""
    path = Path(path)
    xs, ys, colors, labels = [], [], [], []
    for i, s in enumerate(trace.steps):
        v = _scalar(s.transformer)
        if v is None or v == float("inf"):
            continue
        xs.append(i)
        ys.append(v)
        colors.append("#1f77b4" if s.kind == "location" else "#d62728")
        labels.append(str(s.pivot))
    fig, ax = plt.subplots(figsize=(max(4, 0.45 * len(trace.steps) + 2), 3.2))
    ax.bar(xs, ys, color=colors)
    ax.set_xticks(xs, labels, rotation=60, fontsize=7)
    ax.set_xlabel("step (blue: location, red: node)")
    ax.set_ylabel("summary cost / time")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_scaling(rows, path: str | Path) -> Path:
    """Log-log wall-clock of the engine and the brute-force oracle versus size."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(4.8, 3.4))
    ax.loglog([r.size for r in rows], [r.engine_s for r in rows], "o-", label="reduction engine")
    done = [r for r in rows if r.oracle_s is not None]
    if done:
        ax.loglog([r.size for r in done], [r.oracle_s for r in done], "s--", label="brute force")
    ax.set_xlabel("diagram size (nodes + locations)")
    ax.set_ylabel("seconds")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
