"""Closed-form forces, reactions, support settlements, spring stiffnesses and
nodal displacements for the uniform-load state.

Displacements are dimensionless (divided by the height Y); ``delta`` is the
support settlement, ``epsilon`` the vertical and ``mu`` the horizontal nodal
displacement.  Positive is up / right.  Negative member forces are
compression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import DomainError, NonCompressiveSupportError, ValidationError
from .fractal import (
    DEFAULT_DEPTH,
    DyadicPoint,
    ExplicitList,
    Extension,
    as_fraction,
    j_curve,
    j_function,
    takagi_class,
    takagi_curve,
    takagi_periodic,
)
from .structure import NodeId, StructureConfig, node_ids


@dataclass(frozen=True)
class DimensionlessGroups:
    omega_h: float
    omega_i: float
    lambda1: float
    lambda2: float
    chi: float


@lru_cache(maxsize=256)
def support_takagi_values(config: StructureConfig) -> tuple:
    """G((i - 1) / 2**(N-1)) for every support i, from the finite ratios."""
    N = config.levels
    return tuple(
        takagi_class(DyadicPoint(i, N - 1), config.ratios_horizontal)
        for i in range(2 ** (N - 1) + 1)
    )


@lru_cache(maxsize=256)
def dimensionless_groups(config: StructureConfig) -> DimensionlessGroups:
    s = config.sin
    omega_h = config.load * config.cot**3 / (2.0 * config.area_horizontal * config.modulus_horizontal)
    omega_i = config.load / (config.area_inclined * config.modulus_inclined * s**3)
    g = support_takagi_values(config)
    b = config.boundary
    lambda1 = b.d1 - omega_h * g[b.z1 - 1]
    lambda2 = b.d2 - omega_h * g[b.z2 - 1]
    chi = (lambda2 - lambda1) / (b.z2 - b.z1)
    return DimensionlessGroups(omega_h, omega_i, lambda1, lambda2, chi)


def member_forces(config: StructureConfig) -> tuple:
    """Axial force per level: ({n: inclined}, {n: horizontal}) in kN."""
    F, s, c = config.load, config.sin, config.cos
    N = config.levels
    inclined = {n: -F / (2**n * s) for n in range(1, N + 1)}
    horizontal = {n: F * c / (2 ** (n - 1) * s) for n in range(2, N + 1)}
    return inclined, horizontal


def support_reactions(config: StructureConfig) -> tuple:
    """(vertical, horizontal) reaction per support, kN, up / right positive."""
    F, N = config.load, config.levels
    n_sup = config.n_supports
    vertical = np.full(n_sup, F / 2 ** (N - 1))
    vertical[0] = vertical[-1] = F / 2**N
    horizontal = np.zeros(n_sup)
    end = F * config.cot / 2**N
    horizontal[0] = end
    horizontal[-1] = -end
    return vertical, horizontal


def _check_compressive(delta):
    bad = [i + 1 for i, d in enumerate(delta) if not d < 0]
    if bad:
        raise NonCompressiveSupportError(bad, list(delta))


def support_displacements(config: StructureConfig, allow_nonnegative: bool = False) -> np.ndarray:
    """delta_i for supports i = 1..2**(N-1)+1 (array index i - 1)."""
    grp = dimensionless_groups(config)
    g = np.asarray(support_takagi_values(config))
    b = config.boundary
    i = np.arange(1, config.n_supports + 1)
    delta = grp.omega_h * g + grp.chi * (i - b.z1) + grp.lambda1
    delta[b.z1 - 1] = b.d1
    delta[b.z2 - 1] = b.d2
    if not allow_nonnegative:
        _check_compressive(delta)
    return delta


def pvw_residuals(config: StructureConfig, delta) -> dict:
    """Compatibility residual for each sub-structure (m, u).

    delta_a - 2 delta_b + delta_c + 2 Omega_H / (4**m rho_{m+2}); zero for a
    compatible settlement pattern.
    """
    N = config.levels
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (config.n_supports,):
        raise ValidationError(
            f"delta must have {config.n_supports} entries, got {delta.shape}"
        )
    omega_h = dimensionless_groups(config).omega_h
    out = {}
    for m in range(N - 1):
        span = 2 ** (N - m - 1)
        rhs = 2.0 * omega_h / (4.0**m * config.ratios_horizontal[m + 2])
        for u in range(2**m):
            a = u * span
            out[(m, u)] = delta[a] - 2.0 * delta[a + span // 2] + delta[a + span] + rhs
    return out


def support_stiffnesses(config: StructureConfig, delta) -> np.ndarray:
    """Spring constant (kN/mm) that settles each support by delta_i * Y."""
    delta = np.asarray(delta, dtype=float)
    _check_compressive(delta)
    share, _ = support_reactions(config)
    return share / (-config.height * delta)


def inclined_term(config: StructureConfig, n: int) -> float:
    """2 / (4**N rho_N) + sum_{k=n}^{N-1} 1 / (4**k rho_k), inclined ratios."""
    N, rho = config.levels, config.ratios_inclined
    total = 2.0 / (4.0**N * rho[N])
    for k in range(n, N):
        total += 1.0 / (4.0**k * rho[k])
    return total


def vertical_displacements(config: StructureConfig, delta) -> dict:
    """epsilon per node; support rows are delta."""
    N = config.levels
    grp = dimensionless_groups(config)
    g = support_takagi_values(config)
    z1 = config.boundary.z1
    eps = {}
    for nid in node_ids(N):
        n, t = nid
        if n == N + 1:
            eps[nid] = float(delta[t - 1])
            continue
        step = 2 ** (N - n)
        pair = g[(t - 1) * step] + g[t * step]
        eps[nid] = (
            grp.omega_h / 2.0 * pair
            + grp.chi * ((2 * t - 1) * 2.0 ** (N - n - 1) + 1 - z1)
            + grp.lambda1
            - grp.omega_i * inclined_term(config, n)
        )
    return eps


def horizontal_displacements(config: StructureConfig) -> dict:
    """mu per node from the difference of Takagi values at the flanking supports."""
    N = config.levels
    grp = dimensionless_groups(config)
    g = support_takagi_values(config)
    cot = config.cot
    mu = {}
    for nid in node_ids(N):
        n, t = nid
        if n == N + 1:
            mu[nid] = 0.0
            continue
        step = 2 ** (N - n)
        mu[nid] = (
            grp.omega_h / (2.0 * cot) * (g[(t - 1) * step] - g[t * step])
            - grp.chi * 2.0 ** (N - n - 1) / cot
        )
    return mu


def _extended(config: StructureConfig, extension: Optional[Extension]):
    return config.ratios_horizontal.with_extension(extension)


def _j_form_constant(ratios, n: int) -> float:
    total = 1.0 / (2.0 ** (n - 1) * ratios[n + 1])
    for k in range(n - 1):
        total += 1.0 / (2.0 ** (k + 1) * ratios[k + 2])
    return total


def _mu_j_form(config, ratios, n, jval) -> float:
    grp = dimensionless_groups(config)
    cot = config.cot
    bracket = 2.0 * jval - _j_form_constant(ratios, n)
    return grp.omega_h / (2.0 ** (n - 2) * cot) * bracket - grp.chi * 2.0 ** (config.levels - n - 1) / cot


def horizontal_displacements_j(config: StructureConfig, extension: Optional[Extension] = None) -> dict:
    """mu per node through J at the node abscissa (2t - 1) / 2**n.

    Level-N nodes touch rho_{N+1}, which cancels; without an extension a unit
    placeholder is used for it.
    """
    N = config.levels
    if extension is None:
        extension = ExplicitList((1.0,))
    ratios = _extended(config, extension)
    mu = {}
    for nid in node_ids(N):
        n, t = nid
        if n == N + 1:
            mu[nid] = 0.0
            continue
        jval = j_function(DyadicPoint(2 * t - 1, n), ratios)
        mu[nid] = _mu_j_form(config, ratios, n, jval)
    return mu


def _terms_for(extension) -> Optional[int]:
    return None if extension is None else DEFAULT_DEPTH


def f_delta(x, config: StructureConfig, extension: Optional[Extension] = None) -> float:
    """Settlement curve through every support value, abscissa normalised to [0, 1]."""
    grp = dimensionless_groups(config)
    g = takagi_class(x, _extended(config, extension), _terms_for(extension))
    return (grp.omega_h * g
            + grp.chi * (2 ** (config.levels - 1) * float(x) + 1 - config.boundary.z1)
            + grp.lambda1)


def f_epsilon(n: int, x, config: StructureConfig, extension: Optional[Extension] = None) -> float:
    """Vertical-displacement curve of level n; equals epsilon_{n,t} at x = (2t-1)/2**n.

    Level N + 1 is the settlement curve ``f_delta``.
    """
    N = config.levels
    if not 1 <= n <= N + 1:
        raise DomainError(f"level {n} outside 1..{N + 1}")
    if n == N + 1:
        return f_delta(x, config, extension)
    grp = dimensionless_groups(config)
    ratios = _extended(config, extension)
    terms = _terms_for(extension)
    xf = as_fraction(x)
    if not 0 <= xf <= 1:
        raise DomainError(f"argument {float(xf)!r} outside [0, 1]")
    h = Fraction(1, 2**n)
    pair = takagi_periodic(xf - h, ratios, terms) + takagi_periodic(xf + h, ratios, terms)
    return (grp.omega_h / 2.0 * pair
            + grp.chi * (2 ** (N - 1) * float(xf) + 1 - config.boundary.z1)
            + grp.lambda1
            - grp.omega_i * inclined_term(config, n))


def f_mu(n: int, x, config: StructureConfig, extension: Optional[Extension] = None) -> float:
    """Horizontal-displacement curve of level n; equals mu_{n,t} at x = (2t-1)/2**n."""
    N = config.levels
    if not 1 <= n <= N + 1:
        raise DomainError(f"level {n} outside 1..{N + 1}")
    if n == N + 1:
        return 0.0
    ratios = _extended(config, extension)
    jval = j_function(x, ratios, _terms_for(extension))
    return _mu_j_form(config, ratios, n, jval)


# float curves for plotting --------------------------------------------------


def f_delta_curve(x, config, extension=None, depth=None):
    grp = dimensionless_groups(config)
    x = np.asarray(x, dtype=float)
    g = takagi_curve(x, _extended(config, extension), depth)
    return grp.omega_h * g + grp.chi * (2 ** (config.levels - 1) * x + 1 - config.boundary.z1) + grp.lambda1


def f_epsilon_curve(n, x, config, extension=None, depth=None):
    N = config.levels
    if n == N + 1:
        return f_delta_curve(x, config, extension, depth)
    grp = dimensionless_groups(config)
    x = np.asarray(x, dtype=float)
    ratios = _extended(config, extension)
    h = 1.0 / 2**n
    pair = takagi_curve(x - h, ratios, depth) + takagi_curve(x + h, ratios, depth)
    return (grp.omega_h / 2.0 * pair
            + grp.chi * (2 ** (N - 1) * x + 1 - config.boundary.z1)
            + grp.lambda1 - grp.omega_i * inclined_term(config, n))


def f_mu_curve(n, x, config, extension=None, depth=None):
    x = np.asarray(x, dtype=float)
    if n == config.levels + 1:
        return np.zeros_like(x)
    ratios = _extended(config, extension)
    return _mu_j_form(config, ratios, n, j_curve(x, ratios, depth))


# aggregate result -----------------------------------------------------------


@dataclass(frozen=True)
class AnalysisResult:
    config: StructureConfig
    groups: DimensionlessGroups
    inclined_forces: dict
    horizontal_forces: dict
    reaction_vertical: np.ndarray
    reaction_horizontal: np.ndarray
    delta: np.ndarray
    stiffness: np.ndarray
    epsilon: dict
    mu: dict
    max_residual: float

    def to_dict(self) -> dict:
        cfg = self.config
        Y, N = cfg.height, cfg.levels
        supports = []
        for i in range(1, cfg.n_supports + 1):
            supports.append({
                "index": i,
                "x": (i - 1) / 2 ** (N - 1),
                "delta": self.delta[i - 1],
                "settlement_mm": self.delta[i - 1] * Y,
                "stiffness": _finite_or_none(self.stiffness[i - 1]),
                "reaction_vertical": self.reaction_vertical[i - 1],
                "reaction_horizontal": self.reaction_horizontal[i - 1],
            })
        nodes = []
        for nid in node_ids(N):
            n, t = nid
            xhat = (2 * t - 1) / 2**n if n <= N else (t - 1) / 2 ** (N - 1)
            nodes.append({
                "level": n, "ordinal": t, "x": xhat,
                "epsilon": self.epsilon[nid], "mu": self.mu[nid],
                "vertical_mm": self.epsilon[nid] * Y, "horizontal_mm": self.mu[nid] * Y,
            })
        return {
            "schema_version": 1,
            "kind": "analysis",
            "config": cfg.to_dict(),
            "groups": {
                "omega_h": self.groups.omega_h, "omega_i": self.groups.omega_i,
                "lambda1": self.groups.lambda1, "lambda2": self.groups.lambda2,
                "chi": self.groups.chi,
            },
            "member_forces": {
                "inclined": [{"level": n, "force": f} for n, f in sorted(self.inclined_forces.items())],
                "horizontal": [{"level": n, "force": f} for n, f in sorted(self.horizontal_forces.items())],
            },
            "supports": supports,
            "nodes": nodes,
            "max_pvw_residual": self.max_residual,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisResult":
        if data.get("kind") != "analysis":
            raise ValidationError("not an analysis document (kind != 'analysis')")
        cfg = StructureConfig.from_dict(data["config"])
        sup = data["supports"]
        eps = {NodeId(d["level"], d["ordinal"]): d["epsilon"] for d in data["nodes"]}
        mu = {NodeId(d["level"], d["ordinal"]): d["mu"] for d in data["nodes"]}
        return cls(
            config=cfg,
            groups=DimensionlessGroups(**data["groups"]),
            inclined_forces={d["level"]: d["force"] for d in data["member_forces"]["inclined"]},
            horizontal_forces={d["level"]: d["force"] for d in data["member_forces"]["horizontal"]},
            reaction_vertical=np.array([d["reaction_vertical"] for d in sup]),
            reaction_horizontal=np.array([d["reaction_horizontal"] for d in sup]),
            delta=np.array([d["delta"] for d in sup]),
            stiffness=np.array([math.nan if d["stiffness"] is None else d["stiffness"] for d in sup]),
            epsilon=eps,
            mu=mu,
            max_residual=data["max_pvw_residual"],
        )


def _finite_or_none(v):
    return float(v) if math.isfinite(v) else None


def analyze(config: StructureConfig, allow_nonnegative_delta: bool = False) -> AnalysisResult:
    delta = support_displacements(config, allow_nonnegative=allow_nonnegative_delta)
    if np.all(delta < 0):
        stiffness = support_stiffnesses(config, delta)
    else:
        share, _ = support_reactions(config)
        stiffness = np.where(delta < 0, share / (-config.height * np.minimum(delta, -1e-300)), math.nan)
    inclined, horizontal = member_forces(config)
    rv, rh = support_reactions(config)
    residuals = pvw_residuals(config, delta)
    return AnalysisResult(
        config=config,
        groups=dimensionless_groups(config),
        inclined_forces=inclined,
        horizontal_forces=horizontal,
        reaction_vertical=rv,
        reaction_horizontal=rh,
        delta=delta,
        stiffness=stiffness,
        epsilon=vertical_displacements(config, delta),
        mu=horizontal_displacements(config),
        max_residual=max((abs(r) for r in residuals.values()), default=0.0),
    )
