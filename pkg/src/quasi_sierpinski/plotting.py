"""Figures: deformed shape, displacement curves per level, and the Takagi /
J / Cantor curves.  Each figure is written as SVG next to a CSV of the
plotted samples.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import closed_form  # noqa: E402
from .fractal import cantor_curve, j_curve, takagi_curve  # noqa: E402
from .report import write_csv  # noqa: E402
from .structure import HORIZONTAL, Topology  # noqa: E402

PLOT_KINDS = ("deformed", "displacements", "takagi", "j", "cantor")

#: dyadic sample count for function curves (2**12 + 1 points)
SAMPLE_LOG2 = 12

params = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.0,
    "lines.markersize": 3,
    "figure.figsize": (6.4, 4.0),
    "svg.hashsalt": "quasi-sierpinski",
    "svg.fonttype": "path",
}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def samples(log2: int = SAMPLE_LOG2) -> np.ndarray:
    return np.arange(2**log2 + 1) / 2**log2


def deformed_coordinates(topology: Topology, analysis, magnify: float = 1.0) -> list:
    """(node, x, y, x_deformed, y_deformed) rows in mm."""
    Y = analysis.config.height
    rows = []
    for node in topology.nodes:
        ux = analysis.mu[node.id] * Y * magnify
        uy = analysis.epsilon[node.id] * Y * magnify
        rows.append((node.id, node.x, node.y, node.x + ux, node.y + uy))
    return rows


def plot_deformed(topology: Topology, analysis, out_dir, magnify: float = 1.0) -> list:
    """Undeformed truss in gray, deformed in red."""
    rows = deformed_coordinates(topology, analysis, magnify)
    moved = {r[0]: (r[3], r[4]) for r in rows}
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        for m in topology.members:
            a, b = topology.node(m.start), topology.node(m.end)
            ax.plot([a.x, b.x], [a.y, b.y], color="0.6", lw=0.8)
            (xa, ya), (xb, yb) = moved[m.start], moved[m.end]
            ax.plot([xa, xb], [ya, yb], color="red", lw=0.9)
        ax.axhline(0.0, color="k", lw=0.5, ls=":")
        ax.set_aspect("equal")
        ax.set_xlabel("x [mm]")
        ax.set_ylabel("y [mm]")
        ax.set_title(f"deformed shape (magnification {magnify:g})")
        svg = _save(fig, Path(out_dir) / "deformed.svg")
    csv = write_csv(
        Path(out_dir) / "deformed.csv",
        ("level", "ordinal", "x_mm", "y_mm", "x_deformed_mm", "y_deformed_mm"),
        [(nid.level, nid.ordinal, x, y, xd, yd) for nid, x, y, xd, yd in rows],
    )
    return [svg, csv]


def plot_displacements(analysis, out_dir, extension=None, depth=None) -> list:
    """f_epsilon and f_mu for every level with the nodal values on top."""
    cfg = analysis.config
    N = cfg.levels
    x = samples()
    header = ["x"]
    columns = [x]
    with plt.rc_context(params):
        fig, (ax_e, ax_m) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 6.4))
        for n in range(1, N + 2):
            fe = closed_form.f_epsilon_curve(n, x, cfg, extension, depth)
            ax_e.plot(x, fe, lw=0.8, label=f"n={n}")
            header.append(f"f_epsilon_{n}")
            columns.append(fe)
            if n <= N and (n < N or extension is not None):
                fm = closed_form.f_mu_curve(n, x, cfg, extension, depth)
                ax_m.plot(x, fm, lw=0.8, label=f"n={n}")
                header.append(f"f_mu_{n}")
                columns.append(fm)
        nodes_x, nodes_e, nodes_m = [], [], []
        for nid, eps in analysis.epsilon.items():
            n, t = nid
            nodes_x.append((2 * t - 1) / 2**n if n <= N else (t - 1) / 2 ** (N - 1))
            nodes_e.append(eps)
            nodes_m.append(analysis.mu[nid])
        ax_e.plot(nodes_x, nodes_e, "o", color="k", ms=2)
        ax_m.plot(nodes_x, nodes_m, "o", color="k", ms=2)
        ax_e.set_ylabel("vertical displacement / Y")
        ax_m.set_ylabel("horizontal displacement / Y")
        ax_m.set_xlabel("normalised abscissa x")
        ax_e.legend(ncol=3)
        svg = _save(fig, Path(out_dir) / "displacements.svg")
    csv = write_csv(Path(out_dir) / "displacements.csv", header, zip(*columns))
    return [svg, csv]


def _function_plot(out_dir, name, x, y, ylabel, title) -> list:
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.plot(x, y, color="C0")
        ax.set_xlabel("x")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.grid(True, lw=0.3)
        svg = _save(fig, Path(out_dir) / f"{name}.svg")
    csv = write_csv(Path(out_dir) / f"{name}.csv", ("x", name), zip(x, y))
    return [svg, csv]


def plot_takagi(ratios, out_dir, depth=None) -> list:
    if ratios.kind != HORIZONTAL:
        raise ValueError("Takagi curves use horizontal ratios")
    x = samples()
    return _function_plot(out_dir, "takagi", x, takagi_curve(x, ratios, depth), "G(x)",
                          "Takagi-class function")


def plot_j(ratios, out_dir, depth=None) -> list:
    x = samples()
    return _function_plot(out_dir, "j", x, j_curve(x, ratios, depth), "J(x)", "J function")


def plot_cantor(r: float, out_dir, depth: int = 40) -> list:
    x = samples()
    return _function_plot(out_dir, "cantor", x, cantor_curve(x, r, depth), "C(x)",
                          f"Cantor pseudo-inverse, bases ({2 * r:g}, 2)")
