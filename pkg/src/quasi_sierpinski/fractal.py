"""Takagi-class kernel: triangle wave, Takagi-class sums, dyadic digits, J and
the Cantor pseudo-inverse.

Point evaluations take exact inputs (``DyadicPoint``, ``Fraction``, ``int``,
or a float, which is converted exactly) so that the vanishing of
``psi(2**m * x)`` is decided in rational arithmetic.  The ``*_curve``
functions are vectorised float versions with an explicit truncation depth,
intended for plotting only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DomainError

HORIZONTAL = "horizontal"
INCLINED = "inclined"

#: truncation depth used for non-dyadic (plotting) evaluation
DEFAULT_DEPTH = 40


@dataclass(frozen=True)
class ExplicitList:
    """A finite list of extra ratios appended after the finite part."""

    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        bad = [j for j, v in enumerate(values) if not (math.isfinite(v) and v > 0)]
        if bad:
            raise DomainError(f"extension ratios must be finite and > 0 (entries {bad})")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    def get(self, j: int) -> Optional[float]:
        return self.values[j] if j < len(self.values) else None


@dataclass(frozen=True)
class GeometricTail:
    """Infinite tail ``first * ratio**j`` (``first`` defaults to ``ratio``).

    Summability of the Takagi coefficients requires ``4 * ratio > 1``.
    """

    ratio: float
    first: Optional[float] = None

    def __post_init__(self):
        r = float(self.ratio)
        first = r if self.first is None else float(self.first)
        if not (math.isfinite(r) and r > 0):
            raise DomainError(f"geometric tail ratio must be > 0, got {r!r}")
        if not (math.isfinite(first) and first > 0):
            raise DomainError(f"geometric tail first term must be > 0, got {first!r}")
        if not 4.0 * r > 1.0:
            raise DomainError(
                f"geometric tail ratio {r!r} violates summability (needs 4*ratio > 1)"
            )
        object.__setattr__(self, "ratio", r)
        object.__setattr__(self, "first", first)

    def __len__(self):
        raise TypeError("geometric tail is infinite")

    def get(self, j: int) -> float:
        return self.first * self.ratio**j


Extension = Union[ExplicitList, GeometricTail]


@dataclass(frozen=True)
class RatioSequence:
    """Ratios of EA between members of a level and the reference level.

    ``finite`` holds rho_2..rho_N for horizontal members and rho_1..rho_N for
    inclined members.  Index with the level: ``seq[n]`` is rho_n.
    """

    kind: str
    finite: tuple
    extension: Optional[Extension] = None

    def __post_init__(self):
        if self.kind not in (HORIZONTAL, INCLINED):
            raise DomainError(f"unknown ratio kind {self.kind!r}")
        finite = tuple(float(v) for v in self.finite)
        if not finite:
            raise DomainError(f"{self.kind} ratio sequence is empty")
        bad = [j for j, v in enumerate(finite) if not (math.isfinite(v) and v > 0)]
        if bad:
            raise DomainError(f"{self.kind} ratios must be finite and > 0 (entries {bad})")
        if finite[0] != 1.0:
            raise DomainError(
                f"leading {self.kind} ratio (rho_{self.first_level}) must be 1, got {finite[0]!r}"
            )
        object.__setattr__(self, "finite", finite)

    @property
    def first_level(self) -> int:
        return 2 if self.kind == HORIZONTAL else 1

    @property
    def last_level(self) -> float:
        """Highest level with a defined ratio (``inf`` for geometric tails)."""
        base = self.first_level + len(self.finite) - 1
        if self.extension is None:
            return base
        if isinstance(self.extension, GeometricTail):
            return math.inf
        return base + len(self.extension)

    def __getitem__(self, level: int) -> float:
        j = level - self.first_level
        if j < 0:
            raise DomainError(f"no {self.kind} ratio for level {level}")
        if j < len(self.finite):
            return self.finite[j]
        value = None if self.extension is None else self.extension.get(j - len(self.finite))
        if value is None:
            raise DomainError(
                f"{self.kind} ratio for level {level} is undefined "
                f"(defined through level {self.last_level}; supply an extension)"
            )
        return value

    def with_extension(self, extension: Optional[Extension]) -> "RatioSequence":
        return RatioSequence(self.kind, self.finite, extension)

    @classmethod
    def geometric(cls, r: float, kind: str = HORIZONTAL) -> "RatioSequence":
        """The infinite sequence ``r**k``, k = 0, 1, ..."""
        return cls(kind, (1.0,), GeometricTail(r))


def extension_from_dict(data: Optional[dict]) -> Optional[Extension]:
    """``{"kind": "geometric", "ratio": r, "first": a}`` or ``{"kind": "explicit", "values": [...]}``."""
    if data is None:
        return None
    kind = data.get("kind")
    if kind == "geometric":
        return GeometricTail(data["ratio"], data.get("first"))
    if kind == "explicit":
        return ExplicitList(tuple(data["values"]))
    raise DomainError(f"unknown extension kind {kind!r} (expected 'geometric' or 'explicit')")


def extension_to_dict(extension: Optional[Extension]) -> Optional[dict]:
    if extension is None:
        return None
    if isinstance(extension, GeometricTail):
        return {"kind": "geometric", "ratio": extension.ratio, "first": extension.first}
    return {"kind": "explicit", "values": list(extension.values)}


@dataclass(frozen=True, order=True)
class DyadicPoint:
    """The number ``numerator / 2**log2_denominator`` in [0, 1], kept reduced."""

    numerator: int
    log2_denominator: int

    def __post_init__(self):
        num, k = int(self.numerator), int(self.log2_denominator)
        if num < 0 or k < 0:
            raise DomainError("dyadic point needs non-negative numerator and exponent")
        if num > 2**k:
            raise DomainError(f"dyadic point {num}/2**{k} lies above 1")
        if num == 0:
            k = 0
        while k > 0 and num % 2 == 0:
            num //= 2
            k -= 1
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "log2_denominator", k)

    @classmethod
    def from_fraction(cls, q) -> "DyadicPoint":
        q = Fraction(q)
        den = q.denominator
        if den & (den - 1):
            raise DomainError(f"{q} is not a dyadic rational")
        return cls(q.numerator, den.bit_length() - 1)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, 2**self.log2_denominator)

    @property
    def value(self) -> float:
        return self.numerator / 2**self.log2_denominator

    def __float__(self):
        return self.value


def dyadic_grid(log2_denominator: int) -> list:
    """All points j / 2**k, j = 0..2**k."""
    return [DyadicPoint(j, log2_denominator) for j in range(2**log2_denominator + 1)]


def as_fraction(x) -> Fraction:
    """Exact rational value of a point argument (floats convert exactly)."""
    if isinstance(x, DyadicPoint):
        return x.fraction
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, Real):
        xf = float(x)
        if not math.isfinite(xf):
            raise DomainError(f"argument must be finite, got {x!r}")
        return Fraction(xf)
    raise DomainError(f"unsupported argument type {type(x).__name__}")


def _unit_interval(x) -> Fraction:
    q = as_fraction(x)
    if not 0 <= q <= 1:
        raise DomainError(f"argument {float(q)!r} outside [0, 1]")
    return q


def _is_dyadic(q: Fraction) -> bool:
    den = q.denominator
    return den & (den - 1) == 0


def _psi_exact(q: Fraction) -> Fraction:
    return abs(2 * q - 2 * math.floor(q + Fraction(1, 2)))


def psi(x) -> float:
    """Twice the distance from ``x`` to the nearest integer."""
    q = as_fraction(x)
    if q < 0:
        raise DomainError(f"psi is evaluated on [0, inf), got {float(q)!r}")
    return float(_psi_exact(q))


def psi_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.abs(2.0 * x - 2.0 * np.floor(x + 0.5))


def _check_horizontal(ratios: RatioSequence):
    if ratios.kind != HORIZONTAL:
        raise DomainError("Takagi-class sums are indexed by horizontal ratios")


def _takagi_exact(q: Fraction, ratios: RatioSequence, terms: Optional[int]) -> float:
    if terms is None:
        terms = len(ratios.finite)
    total = 0.0
    scaled = q
    for m in range(terms):
        if scaled.denominator == 1:
            # 2**m x is an integer, so this and every later term vanish
            break
        total += float(_psi_exact(scaled)) / (4.0**m * ratios[m + 2])
        scaled *= 2
    return total


def takagi_class(x, ratios: RatioSequence, terms: Optional[int] = None) -> float:
    """G(x) = sum_m psi(2**m x) / (4**m rho_{m+2}).

    ``terms=None`` sums over the finite ratios only (m = 0..len-1); an integer
    sums m = 0..terms-1 and needs the extension for ratios past the finite
    part.  Terms that vanish exactly are never looked up, so at dyadic points
    ``j / 2**(N-1)`` the value does not depend on the extension.
    """
    _check_horizontal(ratios)
    if terms is not None and terms < 0:
        raise DomainError("terms must be non-negative")
    return _takagi_exact(_unit_interval(x), ratios, terms)


def takagi_periodic(x, ratios: RatioSequence, terms: Optional[int] = None) -> float:
    """``takagi_class`` extended to the real line (G is even and 1-periodic)."""
    _check_horizontal(ratios)
    q = as_fraction(x)
    q = abs(q - math.floor(q))
    return _takagi_exact(q, ratios, terms)


def _curve_depth(ratios: RatioSequence, depth: Optional[int]) -> int:
    if depth is not None:
        return depth
    available = ratios.last_level - 1  # rho_{m+2} defined for m < last_level - 1
    return int(min(DEFAULT_DEPTH, available))


def takagi_curve(x, ratios: RatioSequence, depth: Optional[int] = None) -> np.ndarray:
    """Float evaluation of G on an array of reals, truncated after ``depth`` terms."""
    _check_horizontal(ratios)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for m in range(_curve_depth(ratios, depth)):
        out += psi_array(2.0**m * x) / (4.0**m * ratios[m + 2])
    return out


def truncation_bound(ratios: RatioSequence, depth: int) -> float:
    """Upper bound on |G(x) - G_depth(x)|: sum_{m >= depth} 1 / (4**m rho_{m+2})."""
    _check_horizontal(ratios)
    return _coefficient_tail(ratios, depth, 4.0)


def _coefficient_tail(ratios: RatioSequence, start: int, base: float) -> float:
    """sum_{k >= start} 1 / (base**k rho_{k+2}), closed form on geometric tails."""
    total = 0.0
    k = start
    n_listed = len(ratios.finite)
    if isinstance(ratios.extension, ExplicitList):
        n_listed += len(ratios.extension)
    while k < n_listed:
        total += 1.0 / (base**k * ratios[k + 2])
        k += 1
    tail = ratios.extension
    if isinstance(tail, GeometricTail):
        # rho_{k+2} = first * r**(k - n_listed) for k >= n_listed
        q = 1.0 / (base * tail.ratio)
        if q >= 1.0:
            raise DomainError(
                f"series with base {base} diverges for geometric ratio {tail.ratio}"
            )
        j0 = k - n_listed
        total += q**j0 / (base**n_listed * tail.first) / (1.0 - q)
    return total


def dyadic_coefficients(x, count: int) -> list:
    """Binary digits gamma_0..gamma_{count-1} with x = sum gamma_k / 2**(k+1).

    Dyadic points use the terminating expansion; x = 1 is 0.111...
    """
    if count < 1:
        raise DomainError("count must be a positive integer")
    q = _unit_interval(x)
    digits = []
    for _ in range(count):
        if q == 1:
            digits.append(1)
            continue
        q *= 2
        d = 1 if q >= 1 else 0
        q -= d
        digits.append(d)
    return digits


def j_function(x, ratios: RatioSequence, terms: Optional[int] = None) -> float:
    """J(x) = sum_k gamma_k(x) / (2**(k+1) rho_{k+2}).

    Finite at dyadic x < 1.  At x = 1 every digit is 1 and the series is summed
    in closed form over a geometric tail.  Other reals need ``terms``.
    """
    _check_horizontal(ratios)
    q = _unit_interval(x)
    if terms is None:
        if q == 1:
            if not isinstance(ratios.extension, GeometricTail):
                raise DomainError("J(1) needs an infinite (geometric) ratio tail")
            return _coefficient_tail(ratios, 0, 2.0) / 2.0
        if not _is_dyadic(q):
            raise DomainError(f"{q} is not dyadic; pass an explicit truncation depth")
    total = 0.0
    k = 0
    while q and (terms is None or k < terms):
        q *= 2
        if q >= 1:
            q -= 1
            try:
                rho = ratios[k + 2]
            except DomainError as exc:
                raise DomainError(
                    f"insufficient ratios for nonzero dyadic coefficient index {k}"
                ) from exc
            total += 1.0 / (2.0 ** (k + 1) * rho)
        k += 1
    return total


def j_curve(x, ratios: RatioSequence, depth: Optional[int] = None) -> np.ndarray:
    """Float evaluation of J on an array of reals (digits taken from the float)."""
    _check_horizontal(ratios)
    depth = _curve_depth(ratios, depth)
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise DomainError("J is defined on [0, 1]")
    frac = np.where(x == 1.0, 1.0, x)
    at_one = x == 1.0
    out = np.zeros_like(x)
    for k in range(depth):
        frac = frac * 2.0
        digit = np.where(at_one, 1.0, np.floor(frac))
        frac = np.where(at_one, 1.0, frac - digit)
        out += digit / (2.0 ** (k + 1) * ratios[k + 2])
    return out


def _cantor_factor(r: float) -> float:
    r = float(r)
    if not r > 0.25:
        raise DomainError(f"Cantor pseudo-inverse needs r > 1/4, got {r!r}")
    if 2.0 * r - 1.0 == 0.0:
        raise DomainError("Cantor pseudo-inverse undefined for r = 1/2 (2r - 1 = 0)")
    return (2.0 * r - 1.0) / r


def cantor_pseudo_inverse(x, r: float, terms: Optional[int] = None) -> float:
    """Cantor pseudo-inverse over bases (2r, 2): binary digits re-read in base 2r.

    Equals ``(2r - 1) / r * J(x; {r**k})``, so that ``J = r / (2r - 1)`` times
    the staircase (3/4 of it for r = 3/2) and the staircase reaches 1 at x = 1.
    For r = 1 this is the identity.
    """
    factor = _cantor_factor(r)
    return factor * j_function(x, RatioSequence.geometric(r), terms)


def cantor_curve(x, r: float, depth: int = DEFAULT_DEPTH) -> np.ndarray:
    factor = _cantor_factor(r)
    return factor * j_curve(x, RatioSequence.geometric(r), depth)


def horizontal_ratios(values: Sequence[float], extension: Optional[Extension] = None) -> RatioSequence:
    return RatioSequence(HORIZONTAL, tuple(values), extension)


def inclined_ratios(values: Sequence[float]) -> RatioSequence:
    return RatioSequence(INCLINED, tuple(values))
