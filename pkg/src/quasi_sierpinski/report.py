"""Deterministic JSON and CSV writers.

JSON output has sorted keys and every float printed with 17 significant
digits, so repeated runs are byte-identical and values round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .structure import node_ids


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _encode(obj, indent: str, level: int) -> str:
    pad = indent * (level + 1)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + indent * level + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + indent * level + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj, "  ", 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_csv_text(header, rows), encoding="utf-8")
    return path


def support_rows(analysis):
    cfg = analysis.config
    N, Y = cfg.levels, cfg.height
    for i in range(1, cfg.n_supports + 1):
        k = analysis.stiffness[i - 1]
        yield (i, (i - 1) / 2 ** (N - 1), analysis.delta[i - 1], analysis.delta[i - 1] * Y,
               k if math.isfinite(k) else "", analysis.reaction_vertical[i - 1],
               analysis.reaction_horizontal[i - 1])


SUPPORT_HEADER = ("index", "x", "delta", "settlement_mm", "stiffness_kN_per_mm",
                  "reaction_vertical_kN", "reaction_horizontal_kN")
NODE_HEADER = ("level", "ordinal", "x", "epsilon", "mu", "vertical_mm", "horizontal_mm")


def node_rows(analysis):
    cfg = analysis.config
    N, Y = cfg.levels, cfg.height
    for nid in node_ids(N):
        n, t = nid
        xhat = (2 * t - 1) / 2**n if n <= N else (t - 1) / 2 ** (N - 1)
        eps, mu = analysis.epsilon[nid], analysis.mu[nid]
        yield (n, t, xhat, eps, mu, eps * Y, mu * Y)


def write_analysis(out_dir, analysis) -> list:
    """analysis.json, supports.csv and nodes.csv in ``out_dir``."""
    out_dir = Path(out_dir)
    return [
        write_json(out_dir / "analysis.json", analysis.to_dict()),
        write_csv(out_dir / "supports.csv", SUPPORT_HEADER, support_rows(analysis)),
        write_csv(out_dir / "nodes.csv", NODE_HEADER, node_rows(analysis)),
    ]
