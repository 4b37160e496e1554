"""Direct-stiffness solver for pin-jointed plane trusses on vertical springs.

Used as an independent check on the closed-form results: it sees only node
coordinates, member EA and the support spring constants.  Horizontal DOFs of
support nodes are removed from the system; vertical support DOFs stay free
and carry a grounded spring on the diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import AssemblyError, SolverError, ValidationError
from .structure import NodeId, Topology


@dataclass
class FemSystem:
    topology: Topology
    dof_map: dict  # NodeId -> (x dof or None, y dof or None); None means fixed
    stiffness_matrix: np.ndarray  # free DOFs only
    spring_constants: np.ndarray
    full_matrix: np.ndarray = field(repr=False)
    free: np.ndarray = field(repr=False)

    @property
    def n_free(self) -> int:
        return len(self.free)

    def load_vector(self, load: float) -> np.ndarray:
        """Free-DOF load vector for a downward point load at the apex."""
        f = np.zeros(self.n_free)
        _, ydof = self.dof_map[self.topology.apex]
        f[ydof] = -load
        return f


def _member_geometry(topology: Topology, member):
    a = topology.node(member.start)
    b = topology.node(member.end)
    dx, dy = b.x - a.x, b.y - a.y
    length = math.hypot(dx, dy)
    return length, dx / length if length else 0.0, dy / length if length else 0.0


def assemble(topology: Topology, stiffnesses) -> FemSystem:
    k = np.asarray(stiffnesses, dtype=float)
    if k.shape != (len(topology.supports),):
        raise AssemblyError(
            f"expected {len(topology.supports)} spring constants, got {k.shape}"
        )
    bad = [s.index for s, kv in zip(topology.supports, k) if not (math.isfinite(kv) and kv > 0)]
    if bad:
        raise AssemblyError(f"spring constants must be > 0 (supports {bad})")

    n_nodes = len(topology.nodes)
    K = np.zeros((2 * n_nodes, 2 * n_nodes))
    for m in topology.members:
        if not (m.ea > 0 and m.length > 0):
            raise AssemblyError(f"member {m.label}: EA and length must be > 0")
        length, c, s = _member_geometry(topology, m)
        if length == 0.0:
            raise AssemblyError(f"member {m.label} has zero length")
        block = m.ea / length * np.array([[c * c, c * s], [c * s, s * s]])
        i, j = topology.node_index(m.start), topology.node_index(m.end)
        di = slice(2 * i, 2 * i + 2)
        dj = slice(2 * j, 2 * j + 2)
        K[di, di] += block
        K[dj, dj] += block
        K[di, dj] -= block
        K[dj, di] -= block
    for sup, kv in zip(topology.supports, k):
        K[2 * topology.node_index(sup.node) + 1, 2 * topology.node_index(sup.node) + 1] += kv

    fixed = {2 * topology.node_index(s.node) for s in topology.supports}
    free = np.array([d for d in range(2 * n_nodes) if d not in fixed], dtype=int)
    position = {int(d): p for p, d in enumerate(free)}
    dof_map = {
        node.id: (position.get(2 * idx), position.get(2 * idx + 1))
        for idx, node in enumerate(topology.nodes)
    }
    return FemSystem(
        topology=topology,
        dof_map=dof_map,
        stiffness_matrix=K[np.ix_(free, free)],
        spring_constants=k,
        full_matrix=K,
        free=free,
    )


@dataclass
class FemSolution:
    displacements: dict  # NodeId -> (ux, uy) in mm
    axial_forces: dict  # (kind, level, ordinal) -> kN, tension positive
    reaction_horizontal: np.ndarray
    reaction_vertical: np.ndarray
    equilibrium_residual: float

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "fem_solution",
            "nodes": [
                {"level": nid.level, "ordinal": nid.ordinal, "ux": u[0], "uy": u[1]}
                for nid, u in self.displacements.items()
            ],
            "members": [
                {"kind": kind, "level": lvl, "ordinal": p, "force": f}
                for (kind, lvl, p), f in self.axial_forces.items()
            ],
            "supports": [
                {"index": i + 1, "reaction_horizontal": rh, "reaction_vertical": rv}
                for i, (rh, rv) in enumerate(zip(self.reaction_horizontal, self.reaction_vertical))
            ],
            "equilibrium_residual": self.equilibrium_residual,
        }


def solve(system: FemSystem, load: float) -> FemSolution:
    """Solve K u = f for a downward apex load ``load`` (kN)."""
    f = system.load_vector(load)
    try:
        factor = cho_factor(system.stiffness_matrix, lower=True, check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise SolverError(f"mechanism or invalid restraint: {exc}") from exc
    u_free = cho_solve(factor, f)
    residual = float(np.max(np.abs(system.stiffness_matrix @ u_free - f), initial=0.0))

    topo = system.topology
    u = np.zeros(system.full_matrix.shape[0])
    u[system.free] = u_free
    displacements = {
        node.id: (float(u[2 * k]), float(u[2 * k + 1])) for k, node in enumerate(topo.nodes)
    }

    forces = {}
    for m in topo.members:
        length, c, s = _member_geometry(topo, m)
        i, j = topo.node_index(m.start), topo.node_index(m.end)
        elong = (u[2 * j] - u[2 * i]) * c + (u[2 * j + 1] - u[2 * i + 1]) * s
        forces[(m.kind, m.level, m.ordinal)] = m.ea / length * elong

    internal = system.full_matrix @ u
    rh = np.array([internal[2 * topo.node_index(s.node)] for s in topo.supports])
    uy = np.array([u[2 * topo.node_index(s.node) + 1] for s in topo.supports])
    rv = -system.spring_constants * uy
    return FemSolution(displacements, forces, rh, rv, residual)


# comparison -----------------------------------------------------------------


@dataclass
class CategoryResult:
    name: str
    max_abs: float
    max_rel: float
    scale: float
    worst: str
    tolerance: float
    passed: bool


@dataclass
class ComparisonReport:
    categories: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.categories)

    def category(self, name: str) -> CategoryResult:
        for c in self.categories:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "comparison",
            "passed": self.passed,
            "categories": [
                {"name": c.name, "max_abs": c.max_abs, "max_rel": c.max_rel, "scale": c.scale,
                 "worst": c.worst, "tolerance": c.tolerance, "passed": c.passed}
                for c in self.categories
            ],
        }

    def to_text(self) -> str:
        lines = [f"{'category':<22}{'max abs':>14}{'max rel':>14}  worst"]
        for c in self.categories:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{c.name:<22}{c.max_abs:>14.3e}{c.max_rel:>14.3e}  {c.worst}  {status}")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _category(name, labels, got, expected, tol) -> CategoryResult:
    got = np.asarray(got, dtype=float)
    expected = np.asarray(expected, dtype=float)
    if got.shape != expected.shape:
        raise ValidationError(f"{name}: shape mismatch {got.shape} vs {expected.shape}")
    dev = np.abs(got - expected)
    scale = float(np.max(np.abs(expected), initial=0.0))
    max_abs = float(np.max(dev, initial=0.0))
    worst = labels[int(np.argmax(dev))] if len(dev) else ""
    max_rel = max_abs / scale if scale > 0 else (0.0 if max_abs == 0 else math.inf)
    return CategoryResult(name, max_abs, max_rel, scale, worst, tol, max_rel <= tol)


def compare(solution: FemSolution, analysis, tolerance: float = 1e-8) -> ComparisonReport:
    """Deviation of the FEM solution from the closed form, per category.

    Relative deviation is the largest absolute deviation divided by the
    largest magnitude of the closed-form values in that category.
    """
    Y = analysis.config.height
    n_sup = len(analysis.delta)
    if len(solution.reaction_vertical) != n_sup:
        raise ValidationError("solution and analysis describe different structures")
    sup_labels = [f"support {i}" for i in range(1, n_sup + 1)]
    cats = [
        _category("vertical_reactions", sup_labels, solution.reaction_vertical,
                  analysis.reaction_vertical, tolerance),
        _category("horizontal_reactions", sup_labels, solution.reaction_horizontal,
                  analysis.reaction_horizontal, tolerance),
    ]
    for kind, table in (("inclined", analysis.inclined_forces), ("horizontal", analysis.horizontal_forces)):
        keys = [k for k in solution.axial_forces if k[0] == kind]
        cats.append(_category(
            f"{kind}_forces",
            [f"({lvl},{p}){kind[0].upper()}" for _, lvl, p in keys],
            [solution.axial_forces[k] for k in keys],
            [table[k[1]] for k in keys],
            tolerance,
        ))
    nids = list(analysis.epsilon)
    labels = [str(n) for n in nids]
    cats.append(_category("epsilon", labels, [solution.displacements[n][1] / Y for n in nids],
                          [analysis.epsilon[n] for n in nids], tolerance))
    cats.append(_category("mu", labels, [solution.displacements[n][0] / Y for n in nids],
                          [analysis.mu[n] for n in nids], tolerance))
    return ComparisonReport(cats)


def verify(topology: Topology, analysis, tolerance: float = 1e-8,
           stiffness: Optional[np.ndarray] = None) -> tuple:
    """Assemble with the closed-form springs (or ``stiffness``), solve, compare."""
    k = analysis.stiffness if stiffness is None else stiffness
    solution = solve(assemble(topology, k), analysis.config.load)
    return solution, compare(solution, analysis, tolerance)
