"""Run configuration file: structure parameters plus output, tolerance, plot
and extension settings, all in one JSON document."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import DomainError, ValidationError
from .fractal import Extension, extension_from_dict
from .report import read_json
from .structure import StructureConfig

TOL_CLOSED_FORM = 1e-12
TOL_FEM = 1e-8

_PLOT_KEYS = {"what", "magnify", "depth", "ratio"}


@dataclass(frozen=True)
class RunConfig:
    structure: StructureConfig
    extension: Optional[Extension] = None
    output_dir: Optional[str] = None
    tol_closed_form: float = TOL_CLOSED_FORM
    tol_fem: float = TOL_FEM
    plot_what: str = "deformed"
    magnify: float = 1.0
    depth: Optional[int] = None
    ratio: Optional[float] = None
    stiffness_factors: dict = field(default_factory=dict)
    allow_nonnegative_delta: bool = False


def parse_run_config(data: dict) -> RunConfig:
    errors = []
    structure = None
    try:
        structure = StructureConfig.from_dict(data)
    except ValidationError as exc:
        errors.extend(exc.messages)

    extension = None
    if data.get("extension") is not None:
        try:
            extension = extension_from_dict(data["extension"])
        except (DomainError, KeyError, TypeError) as exc:
            errors.append(f"extension: {exc}")

    tol = data.get("tolerances", {}) or {}
    if not isinstance(tol, dict):
        errors.append("tolerances: expected an object")
        tol = {}
    plot = data.get("plot", {}) or {}
    if not isinstance(plot, dict):
        errors.append("plot: expected an object")
        plot = {}
    for key in sorted(set(plot) - _PLOT_KEYS):
        errors.append(f"plot.{key}: unknown option")

    factors = {}
    for key, value in (data.get("stiffness_factors") or {}).items():
        try:
            factors[int(key)] = float(value)
        except (TypeError, ValueError):
            errors.append(f"stiffness_factors.{key}: expected support index -> number")
    if structure is not None:
        for idx in factors:
            if not 1 <= idx <= structure.n_supports:
                errors.append(f"stiffness_factors.{idx}: no such support")

    if errors:
        raise ValidationError(errors)
    return RunConfig(
        structure=structure,
        extension=extension,
        output_dir=data.get("output_dir"),
        tol_closed_form=float(tol.get("closed_form", TOL_CLOSED_FORM)),
        tol_fem=float(tol.get("fem", TOL_FEM)),
        plot_what=plot.get("what", "deformed"),
        magnify=float(plot.get("magnify", 1.0)),
        depth=plot.get("depth"),
        ratio=plot.get("ratio"),
        stiffness_factors=factors,
        allow_nonnegative_delta=bool(data.get("allow_nonnegative_delta", False)),
    )


def load_run_config(path) -> RunConfig:
    try:
        data = read_json(path)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_run_config(data)
