"""Points on and inside the unit disk, plus the named constructions used by
the search algorithms: unit points, the diameter points ``K(theta, rho)``
and their distance ``AK`` from ``(-1, 0)``.

Angles are plain floats in radians; :func:`canonical_angle` maps them to
the half-open range ``[0, 2*pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """An argument lies outside the domain of a geometric construction."""


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"non-finite point ({self.x}, {self.y})")

    def __add__(self, other: Point2) -> Point2:
        return Point2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Point2) -> Point2:
        return Point2(self.x - other.x, self.y - other.y)

    def __mul__(self, k: float) -> Point2:
        return Point2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self) -> Point2:
        return Point2(-self.x, -self.y)

    def dot(self, other: Point2) -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: Point2) -> float:
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other: Point2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def angle(self) -> float:
        """Polar angle, canonicalized."""
        return canonical_angle(math.atan2(self.y, self.x))

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


ORIGIN = Point2(0.0, 0.0)


def canonical_angle(theta: float) -> float:
    """Representative of ``theta`` modulo 2*pi in ``[0, 2*pi)``."""
    r = math.fmod(theta, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:  # -tiny + 2*pi rounds up
        r = 0.0
    return r


@dataclass(frozen=True)
class ArcInterval:
    """Arc of the unit circle swept counter-clockwise from ``start``."""

    start: float
    length: float

    def __post_init__(self):
        if not (0.0 <= self.length <= TWO_PI + 1e-12):
            raise DomainError(f"arc length {self.length} outside [0, 2pi]")
        object.__setattr__(self, "start", canonical_angle(self.start))

    @property
    def end(self) -> float:
        return canonical_angle(self.start + self.length)

    def contains(self, theta: float, tol: float = 0.0) -> bool:
        off = canonical_angle(theta - self.start)
        return off <= self.length + tol or off >= TWO_PI - tol


def unit_point(theta: float) -> Point2:
    return Point2(math.cos(theta), math.sin(theta))


def _check_rho(rho: float) -> None:
    if not (0.0 <= rho <= 1.0):
        raise DomainError(f"rho={rho} outside [0, 1]")


def k_point(theta: float, rho: float) -> Point2:
    """Point at fraction ``rho`` along the diameter from ``ki(pi - theta)`` to ``ki(-theta)``."""
    _check_rho(rho)
    return (1.0 - rho) * unit_point(math.pi - theta) + rho * unit_point(-theta)


def ak_distance(theta: float, rho: float) -> float:
    """Distance from ``(-1, 0)`` to :func:`k_point`."""
    return Point2(-1.0, 0.0).dist(k_point(theta, rho))


def chord_length(delta: float) -> float:
    """Chord subtending an arc of ``delta`` radians on the unit circle."""
    if not (0.0 <= delta <= TWO_PI):
        raise DomainError(f"arc {delta} outside [0, 2pi]")
    return 2.0 * math.sin(delta / 2.0)
