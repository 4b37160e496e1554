"""Geometry, connectivity and member properties of the truss.

Nodes are identified by (level, ordinal) with level 1 the apex and level
N + 1 the supports.  Coordinates put support 1 at the origin, x to the right,
y upward; units are mm, kN and kN/mm^2 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

from .errors import ValidationError
from .fractal import HORIZONTAL, INCLINED, RatioSequence

SCHEMA_VERSION = 1


class NodeId(NamedTuple):
    level: int
    ordinal: int

    def __str__(self):
        return f"({self.level},{self.ordinal})"


@dataclass(frozen=True)
class Boundary:
    """Two supports with prescribed dimensionless vertical displacements."""

    z1: int
    z2: int
    d1: float
    d2: float


@dataclass(frozen=True)
class StructureConfig:
    levels: int
    beta: float
    height: float
    load: float
    area_inclined: float
    modulus_inclined: float
    area_horizontal: float
    modulus_horizontal: float
    ratios_inclined: RatioSequence
    ratios_horizontal: RatioSequence
    boundary: Boundary
    beta_tan: Optional[float] = None

    def __post_init__(self):
        errors = _config_errors(self)
        if errors:
            raise ValidationError(errors)

    @property
    def sin(self) -> float:
        if self.beta_tan is not None:
            return self.beta_tan / math.hypot(1.0, self.beta_tan)
        return math.sin(self.beta)

    @property
    def cos(self) -> float:
        if self.beta_tan is not None:
            return 1.0 / math.hypot(1.0, self.beta_tan)
        return math.cos(self.beta)

    @property
    def cot(self) -> float:
        """c / s, exact when tan(beta) was given."""
        if self.beta_tan is not None:
            return 1.0 / self.beta_tan
        return self.cos / self.sin

    @property
    def n_supports(self) -> int:
        return 2 ** (self.levels - 1) + 1

    @property
    def width(self) -> float:
        return 2.0 * self.height * self.cot

    @classmethod
    def from_dict(cls, data: dict) -> "StructureConfig":
        """Parse the JSON config document, reporting every bad field at once."""
        return _parse_config(data)

    def to_dict(self) -> dict:
        out = {
            "levels": self.levels,
            "height": self.height,
            "load": self.load,
            "area_inclined": self.area_inclined,
            "modulus_inclined": self.modulus_inclined,
            "area_horizontal": self.area_horizontal,
            "modulus_horizontal": self.modulus_horizontal,
            "ratios_inclined": list(self.ratios_inclined.finite),
            "ratios_horizontal": list(self.ratios_horizontal.finite),
            "boundary": {
                "z1": self.boundary.z1,
                "z2": self.boundary.z2,
                "d1": self.boundary.d1,
                "d2": self.boundary.d2,
            },
        }
        if self.beta_tan is not None:
            out["beta_tan"] = self.beta_tan
        else:
            out["beta_rad"] = self.beta
        return out


def _config_errors(cfg: StructureConfig) -> list:
    errors = []
    if not isinstance(cfg.levels, int) or cfg.levels < 2:
        errors.append("levels must be >= 2")
        return errors
    if not 0.0 < cfg.beta < math.pi / 2:
        errors.append("beta must lie strictly between 0 and pi/2")
    for name in ("height", "load", "area_inclined", "modulus_inclined",
                 "area_horizontal", "modulus_horizontal"):
        value = getattr(cfg, name)
        if not (math.isfinite(value) and value > 0):
            errors.append(f"{name} must be > 0, got {value!r}")
    if cfg.ratios_inclined.kind != INCLINED or len(cfg.ratios_inclined.finite) != cfg.levels:
        errors.append(f"ratios_inclined must hold {cfg.levels} inclined ratios (levels 1..{cfg.levels})")
    if (cfg.ratios_horizontal.kind != HORIZONTAL
            or len(cfg.ratios_horizontal.finite) != cfg.levels - 1):
        errors.append(
            f"ratios_horizontal must hold {cfg.levels - 1} horizontal ratios (levels 2..{cfg.levels})"
        )
    b = cfg.boundary
    n_sup = 2 ** (cfg.levels - 1) + 1
    for name in ("z1", "z2"):
        z = getattr(b, name)
        if not isinstance(z, int) or not 1 <= z <= n_sup:
            errors.append(f"boundary.{name} must be a support index in 1..{n_sup}, got {z!r}")
    if isinstance(b.z1, int) and isinstance(b.z2, int) and b.z1 >= b.z2:
        errors.append("boundary.z1 must be smaller than boundary.z2")
    for name in ("d1", "d2"):
        if not math.isfinite(getattr(b, name)):
            errors.append(f"boundary.{name} must be finite")
    return errors


_REQUIRED = ("levels", "height", "load", "area_inclined", "modulus_inclined",
             "area_horizontal", "modulus_horizontal", "ratios_inclined",
             "ratios_horizontal", "boundary")


def _number(data, key, errors, integer=False):
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{key}: expected a number, got {value!r}")
        return None
    if integer:
        if isinstance(value, float) and not value.is_integer():
            errors.append(f"{key}: expected an integer, got {value!r}")
            return None
        return int(value)
    return float(value)


def _ratio_list(data, key, first_level, last_level, errors):
    raw = data.get(key)
    if not isinstance(raw, list):
        errors.append(f"{key}: expected a list of ratios")
        return None
    expected = last_level - first_level + 1
    values = []
    for j in range(max(expected, len(raw))):
        level = first_level + j
        if j >= len(raw):
            errors.append(f"{key}[{j}]: missing ratio for level {level}")
            continue
        if j >= expected:
            errors.append(f"{key}[{j}]: unexpected extra ratio (structure has levels "
                          f"{first_level}..{last_level})")
            continue
        v = raw[j]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            errors.append(f"{key}[{j}]: ratio for level {level} must be a number > 0, got {v!r}")
            continue
        values.append(float(v))
    if raw and isinstance(raw[0], (int, float)) and raw[0] != 1:
        errors.append(f"{key}[0]: leading ratio (level {first_level}) must be 1, got {raw[0]!r}")
    return values


def _parse_config(data: dict) -> StructureConfig:
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    errors = [f"{key}: missing" for key in _REQUIRED if key not in data]
    if "beta_tan" not in data and "beta_rad" not in data:
        errors.append("beta_tan or beta_rad: missing")
    if errors:
        raise ValidationError(errors)

    levels = _number(data, "levels", errors, integer=True)
    if levels is not None and levels < 2:
        errors.append("levels must be >= 2")
        raise ValidationError(errors)
    beta_tan = None
    if "beta_tan" in data:  # takes precedence over beta_rad
        beta_tan = _number(data, "beta_tan", errors)
        if beta_tan is not None and not (math.isfinite(beta_tan) and beta_tan > 0):
            errors.append(f"beta_tan must be > 0, got {beta_tan!r}")
            beta_tan = None
        beta = math.atan(beta_tan) if beta_tan is not None else None
    else:
        beta = _number(data, "beta_rad", errors)
    scalars = {
        name: _number(data, name, errors)
        for name in ("height", "load", "area_inclined", "modulus_inclined",
                     "area_horizontal", "modulus_horizontal")
    }
    for name, value in scalars.items():
        if value is not None and not (math.isfinite(value) and value > 0):
            errors.append(f"{name} must be > 0, got {value!r}")
    rho_i = rho_h = None
    if levels is not None:
        rho_i = _ratio_list(data, "ratios_inclined", 1, levels, errors)
        rho_h = _ratio_list(data, "ratios_horizontal", 2, levels, errors)

    raw_b = data.get("boundary")
    boundary = None
    if not isinstance(raw_b, dict):
        errors.append("boundary: expected an object with z1, z2, d1, d2")
    else:
        missing = [k for k in ("z1", "z2", "d1", "d2") if k not in raw_b]
        errors.extend(f"boundary.{k}: missing" for k in missing)
        if not missing:
            sub = []
            z1 = _number(raw_b, "z1", sub, integer=True)
            z2 = _number(raw_b, "z2", sub, integer=True)
            d1 = _number(raw_b, "d1", sub)
            d2 = _number(raw_b, "d2", sub)
            errors.extend(f"boundary.{m}" for m in sub)
            if not sub:
                boundary = Boundary(z1, z2, d1, d2)

    if errors:
        raise ValidationError(errors)
    return StructureConfig(
        levels=levels,
        beta=beta,
        beta_tan=beta_tan,
        ratios_inclined=RatioSequence(INCLINED, tuple(rho_i)),
        ratios_horizontal=RatioSequence(HORIZONTAL, tuple(rho_h)),
        boundary=boundary,
        **scalars,
    )


# ---------------------------------------------------------------- topology


@dataclass(frozen=True)
class Node:
    id: NodeId
    x: float
    y: float


@dataclass(frozen=True)
class Member:
    kind: str  # "inclined" or "horizontal"
    level: int
    ordinal: int
    start: NodeId
    end: NodeId
    length: float
    ea: float

    @property
    def label(self) -> str:
        tag = "I" if self.kind == INCLINED else "H"
        return f"({self.level},{self.ordinal}){tag}"


@dataclass(frozen=True)
class Support:
    index: int
    node: NodeId


@dataclass(frozen=True)
class Topology:
    levels: int
    height: float
    width: float
    nodes: tuple
    members: tuple
    supports: tuple
    _lookup: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_lookup", {node.id: k for k, node in enumerate(self.nodes)})

    @property
    def apex(self) -> NodeId:
        return NodeId(1, 1)

    def node_index(self, node_id) -> int:
        return self._lookup[NodeId(*node_id)]

    def node(self, node_id) -> Node:
        return self.nodes[self.node_index(node_id)]

    @property
    def inclined(self) -> tuple:
        return tuple(m for m in self.members if m.kind == INCLINED)

    @property
    def horizontal(self) -> tuple:
        return tuple(m for m in self.members if m.kind == HORIZONTAL)

    def summary(self) -> str:
        return (f"{len(self.nodes)} nodes, {len(self.members)} members, "
                f"{len(self.supports)} supports")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "topology",
            "levels": self.levels,
            "height": self.height,
            "width": self.width,
            "nodes": [{"id": list(n.id), "x": n.x, "y": n.y} for n in self.nodes],
            "members": [
                {"kind": m.kind, "level": m.level, "ordinal": m.ordinal,
                 "start": list(m.start), "end": list(m.end),
                 "length": m.length, "ea": m.ea}
                for m in self.members
            ],
            "supports": [{"index": s.index, "node": list(s.node)} for s in self.supports],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        if data.get("kind") != "topology":
            raise ValidationError("not a topology document (kind != 'topology')")
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValidationError(f"unsupported topology schema_version {data.get('schema_version')!r}")
        return cls(
            levels=int(data["levels"]),
            height=float(data["height"]),
            width=float(data["width"]),
            nodes=tuple(Node(NodeId(*n["id"]), float(n["x"]), float(n["y"])) for n in data["nodes"]),
            members=tuple(
                Member(m["kind"], int(m["level"]), int(m["ordinal"]), NodeId(*m["start"]),
                       NodeId(*m["end"]), float(m["length"]), float(m["ea"]))
                for m in data["members"]
            ),
            supports=tuple(Support(int(s["index"]), NodeId(*s["node"])) for s in data["supports"]),
        )


def node_count(levels: int) -> int:
    return 3 * 2 ** (levels - 1)


def member_count(levels: int) -> int:
    return 5 * 2 ** (levels - 1) - 3


def hyperstaticity(levels: int) -> int:
    """Members + reactions - 2 * nodes, with two reactions per support."""
    return member_count(levels) + 2 * (2 ** (levels - 1) + 1) - 2 * node_count(levels)


def node_ids(levels: int) -> list:
    ids = [NodeId(n, t) for n in range(1, levels + 1) for t in range(1, 2 ** (n - 1) + 1)]
    ids += [NodeId(levels + 1, i) for i in range(1, 2 ** (levels - 1) + 2)]
    return ids


def _check_node(levels: int, n: int, t: int):
    if 1 <= n <= levels:
        ok = 1 <= t <= 2 ** (n - 1)
    elif n == levels + 1:
        ok = 1 <= t <= 2 ** (levels - 1) + 1
    else:
        ok = False
    if not ok:
        raise ValidationError(f"node ({n},{t}) does not exist in a {levels}-level structure")


def normalized_abscissa(levels: int, n: int, t: int) -> Fraction:
    """Horizontal position as a fraction of the base width."""
    _check_node(levels, n, t)
    if n <= levels:
        return Fraction(2 * t - 1, 2**n)
    return Fraction(t - 1, 2 ** (levels - 1))


def node_position(config: StructureConfig, n: int, t: int) -> tuple:
    """(x, y) in mm."""
    N, Y = config.levels, config.height
    xhat = normalized_abscissa(N, n, t)
    y = Y / 2 ** (n - 1) if n <= N else 0.0
    return float(xhat) * config.width, y


def build_topology(config: StructureConfig) -> Topology:
    N, Y, s, c = config.levels, config.height, config.sin, config.cos
    ea_i = config.area_inclined * config.modulus_inclined
    ea_h = config.area_horizontal * config.modulus_horizontal

    nodes = tuple(Node(nid, *node_position(config, *nid)) for nid in node_ids(N))

    members = []
    for n in range(1, N + 1):
        length = Y / (s * 2**n) if n < N else Y / (s * 2 ** (N - 1))
        ea = config.ratios_inclined[n] * ea_i
        for p in range(1, 2**n + 1):
            start = NodeId(n, (p + 1) // 2)
            end = NodeId(n + 1, p) if n < N else NodeId(N + 1, p // 2 + 1)
            members.append(Member(INCLINED, n, p, start, end, length, ea))
    for n in range(2, N + 1):
        length = c * Y / (s * 2 ** (n - 2))
        ea = config.ratios_horizontal[n] * ea_h
        for q in range(1, 2 ** (n - 2) + 1):
            members.append(Member(HORIZONTAL, n, q, NodeId(n, 2 * q - 1), NodeId(n, 2 * q), length, ea))

    supports = tuple(Support(i, NodeId(N + 1, i)) for i in range(1, 2 ** (N - 1) + 2))
    return Topology(N, Y, config.width, nodes, tuple(members), supports)
