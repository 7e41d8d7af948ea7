"""Piecewise unit-speed trajectories and circle-coverage bookkeeping.

A :class:`Trajectory` is a chain of phases starting at the origin.  Each
phase is evaluated in *local* time ``s`` measured from its own start; the
trajectory maps absolute time onto the right phase (right-continuous at
phase boundaries) and keeps the robot parked at its last point afterwards.

Only perimeter-following motion (:class:`ArcMotion`) searches the circle.
A line phase that merely ends on the circle does not discover anything.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .geometry import ORIGIN, TWO_PI, ArcInterval, DomainError, Point2, canonical_angle, unit_point

CHAIN_TOL = 1e-9
GAP_TOL = 1e-9
TIE_TOL = 1e-12


class DegenerateSegmentError(DomainError):
    """A line phase was given identical endpoints."""


class CoverageError(RuntimeError):
    """The trajectories leave part of the circle unsearched."""

    condition = "full_coverage"

    def __init__(self, unsearched: list[ArcInterval]):
        arcs = ", ".join(f"[{a.start:.6f}, +{a.length:.3g}]" for a in unsearched)
        super().__init__(f"circle not fully searched; unsearched arcs: {arcs}")
        self.unsearched = unsearched


def circle_position(b: float, sigma: int, t: float) -> Point2:
    return unit_point(sigma * t + b)


def line_position(a: Point2, b: Point2, t: float) -> Point2:
    length = a.dist(b)
    if length == 0.0:
        raise DegenerateSegmentError("line endpoints coincide")
    return a + (b - a) * (t / length)


@dataclass(frozen=True)
class ArcMotion:
    """Unit-speed motion on the circle from angle ``b``; ``sigma=+1`` is ccw."""

    b: float
    sigma: int
    duration: float

    def __post_init__(self):
        if self.sigma not in (-1, 1):
            raise ValueError("sigma must be +1 or -1")
        if self.duration < 0:
            raise DomainError(f"negative arc duration {self.duration}")

    searches = True

    @property
    def start_point(self) -> Point2:
        return unit_point(self.b)

    @property
    def end_point(self) -> Point2:
        return self.position(self.duration)

    def position(self, s: float) -> Point2:
        return circle_position(self.b, self.sigma, s)

    def velocity(self, s: float) -> Point2:
        a = self.sigma * s + self.b
        return Point2(-self.sigma * math.sin(a), self.sigma * math.cos(a))

    def positions(self, s: np.ndarray) -> np.ndarray:
        a = self.sigma * s + self.b
        return np.column_stack((np.cos(a), np.sin(a)))


@dataclass(frozen=True)
class LineMotion:
    a: Point2
    b: Point2

    def __post_init__(self):
        if self.a.dist(self.b) == 0.0:
            raise DegenerateSegmentError("line endpoints coincide")

    searches = False

    @property
    def duration(self) -> float:
        return self.a.dist(self.b)

    @property
    def start_point(self) -> Point2:
        return self.a

    @property
    def end_point(self) -> Point2:
        return self.b

    @property
    def direction(self) -> Point2:
        return (self.b - self.a) * (1.0 / self.duration)

    def position(self, s: float) -> Point2:
        return line_position(self.a, self.b, s)

    def velocity(self, s: float) -> Point2:
        return self.direction

    def positions(self, s: np.ndarray) -> np.ndarray:
        u = self.direction
        return np.column_stack((self.a.x + u.x * s, self.a.y + u.y * s))


@dataclass(frozen=True)
class Wait:
    p: Point2
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise DomainError(f"negative wait {self.duration}")

    searches = False

    @property
    def start_point(self) -> Point2:
        return self.p

    end_point = start_point

    def position(self, s: float) -> Point2:
        return self.p

    def velocity(self, s: float) -> Point2:
        return ORIGIN

    def positions(self, s: np.ndarray) -> np.ndarray:
        return np.tile(np.array([self.p.x, self.p.y], dtype=float), (len(s), 1))


@dataclass(frozen=True, eq=False)
class SampledMotion:
    """Dense samples ``(t, p, v)`` of an integrated path, local times from 0.

    Positions between samples use cubic Hermite interpolation on the stored
    unit velocities.
    """

    t: np.ndarray
    p: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or len(t) < 1 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("sample times must start at 0 and strictly increase")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).reshape(-1, 2))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(-1, 2))

    searches = False

    @property
    def duration(self) -> float:
        return float(self.t[-1])

    @property
    def start_point(self) -> Point2:
        return Point2(*self.p[0])

    @property
    def end_point(self) -> Point2:
        return Point2(*self.p[-1])

    def _locate(self, s):
        i = np.clip(np.searchsorted(self.t, s, side="right") - 1, 0, max(len(self.t) - 2, 0))
        return i

    def positions(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if len(self.t) == 1:
            return np.tile(self.p[0], (len(s), 1))
        i = self._locate(s)
        dt = self.t[i + 1] - self.t[i]
        u = ((s - self.t[i]) / dt)[:, None]
        u2, u3 = u * u, u * u * u
        h00 = 2 * u3 - 3 * u2 + 1
        h10 = u3 - 2 * u2 + u
        h01 = -2 * u3 + 3 * u2
        h11 = u3 - u2
        d = dt[:, None]
        return h00 * self.p[i] + h10 * d * self.v[i] + h01 * self.p[i + 1] + h11 * d * self.v[i + 1]

    def position(self, s: float) -> Point2:
        return Point2(*self.positions(np.array([s]))[0])

    def velocity(self, s: float) -> Point2:
        if len(self.t) == 1:
            return Point2(*self.v[0])
        i = int(self._locate(np.array([s]))[0])
        w = (s - self.t[i]) / (self.t[i + 1] - self.t[i])
        v = (1 - w) * self.v[i] + w * self.v[i + 1]
        n = math.hypot(v[0], v[1])
        return Point2(v[0] / n, v[1] / n)


Phase = Union[ArcMotion, LineMotion, Wait, SampledMotion]


@dataclass(frozen=True, eq=False)
class Trajectory:
    phases: tuple
    start: Point2 = ORIGIN
    starts: tuple = field(init=False, repr=False)

    def __post_init__(self):
        phases = tuple(self.phases)
        object.__setattr__(self, "phases", phases)
        starts, t, here = [], 0.0, self.start
        for k, ph in enumerate(phases):
            gap = here.dist(ph.start_point)
            if gap > CHAIN_TOL:
                raise ValueError(f"phase {k} starts {gap:.3g} away from the previous end point")
            starts.append(t)
            t += ph.duration
            here = ph.end_point
        object.__setattr__(self, "starts", tuple(starts))
        object.__setattr__(self, "_end", t)
        object.__setattr__(self, "_final", here)

    @property
    def duration(self) -> float:
        return self._end

    @property
    def final_point(self) -> Point2:
        return self._final

    def phase_index(self, t: float) -> int:
        """Index of the phase active at ``t``; -1 after the last phase."""
        if t >= self._end or not self.phases:
            return -1
        return max(bisect.bisect_right(self.starts, t) - 1, 0)

    def position_at(self, t: float) -> Point2:
        k = self.phase_index(t)
        if k < 0:
            return self._final
        return self.phases[k].position(t - self.starts[k])

    def velocity_at(self, t: float) -> Point2:
        k = self.phase_index(t)
        if k < 0:
            return ORIGIN
        return self.phases[k].velocity(t - self.starts[k])

    def positions(self, ts) -> np.ndarray:
        """Vectorized :meth:`position_at` over an array of times; shape ``(n, 2)``."""
        ts = np.asarray(ts, dtype=float)
        out = np.tile(np.array([self._final.x, self._final.y], dtype=float), (len(ts), 1))
        if not self.phases:
            return out
        idx = np.searchsorted(np.asarray(self.starts), ts, side="right") - 1
        idx = np.maximum(idx, 0)
        idx[ts >= self._end] = -1
        for k in np.unique(idx):
            if k < 0:
                continue
            sel = idx == k
            out[sel] = self.phases[k].positions(ts[sel] - self.starts[k])
        return out

    def boundaries(self) -> list[float]:
        return list(self.starts) + [self._end]


def position_at(traj: Trajectory, t: float) -> Point2:
    return traj.position_at(t)


def velocity_at(traj: Trajectory, t: float) -> Point2:
    return traj.velocity_at(t)


def verify_unit_speed(traj: Trajectory, n_samples: int = 1000) -> float:
    """Largest deviation of the speed from 1 over all motion phases.

    Arc and line phases are checked through their analytic velocity; sampled
    phases through finite differences of consecutive stored positions and
    through the stored velocity norms.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    worst = 0.0
    for ph in traj.phases:
        if isinstance(ph, Wait) or ph.duration == 0.0:
            continue
        if isinstance(ph, SampledMotion):
            dp = np.diff(ph.p, axis=0)
            speeds = np.hypot(dp[:, 0], dp[:, 1]) / np.diff(ph.t)
            vn = np.hypot(ph.v[:, 0], ph.v[:, 1])
            if len(speeds):
                worst = max(worst, float(np.max(np.abs(speeds - 1.0))))
            worst = max(worst, float(np.max(np.abs(vn - 1.0))))
            continue
        for s in np.linspace(0.0, ph.duration, n_samples):
            worst = max(worst, abs(ph.velocity(float(s)).norm() - 1.0))
    return worst


# ---------------------------------------------------------------- coverage


@dataclass(frozen=True)
class CoveredArc:
    """Arc first searched by ``robot`` during its phase ``phase``.

    The first-visit time is affine in the angle: ``time(phi) = c + slope*phi``
    on the canonical range ``[lo, hi]`` (``hi`` may reach 2*pi).
    """

    robot: int
    phase: int
    lo: float
    hi: float
    c: float
    slope: int

    @property
    def arc(self) -> ArcInterval:
        return ArcInterval(self.lo, self.hi - self.lo)

    def time_at(self, phi: float) -> float:
        return self.c + self.slope * phi

    @property
    def t_first(self) -> float:
        return min(self.time_at(self.lo), self.time_at(self.hi))

    @property
    def t_last(self) -> float:
        return max(self.time_at(self.lo), self.time_at(self.hi))


@dataclass(frozen=True)
class ArcCoverage:
    arcs: tuple  # CoveredArc, sorted by lo
    search_time: float
    intervals: dict  # robot -> list of (t_a, t_b) exploration intervals
    uncovered: tuple  # ArcInterval gaps (empty when feasible)

    @property
    def uncovered_measure(self) -> float:
        return sum(a.length for a in self.uncovered)

    def arcs_of(self, robot: int) -> list[CoveredArc]:
        return [a for a in self.arcs if a.robot == robot]

    def first_visit(self, phi: float) -> tuple[float, int]:
        """Earliest discovery ``(time, robot)`` of the circle point at angle ``phi``."""
        phi = canonical_angle(phi)
        best = None
        for a in self.arcs:
            for p in (phi, phi + TWO_PI) if phi == 0.0 else (phi,):
                if a.lo - 1e-12 <= p <= a.hi + 1e-12:
                    key = (a.time_at(p), a.robot)
                    if best is None or key[0] < best[0] - TIE_TOL or (abs(key[0] - best[0]) <= TIE_TOL and key[1] < best[1]):
                        best = key
        if best is None:
            raise CoverageError([ArcInterval(phi, 0.0)])
        return best


def _arc_pieces(robot: int, phase: int, ph: ArcMotion, t0: float) -> list[tuple]:
    """Split one arc phase into pieces with affine visit time on ``[0, 2pi]``."""
    d = min(ph.duration, TWO_PI)
    if d <= 0.0:
        return []
    b = canonical_angle(ph.b)
    pieces = []
    if ph.sigma == 1:
        # angle b + s at time t0 + s
        lo, hi = b, b + d
        pieces.append((lo, min(hi, TWO_PI), t0 - b, 1))
        if hi > TWO_PI:
            pieces.append((0.0, hi - TWO_PI, t0 - b + TWO_PI, 1))
    else:
        # angle b - s at time t0 + s
        lo, hi = b - d, b
        pieces.append((max(lo, 0.0), hi, t0 + b, -1))
        if lo < 0.0:
            pieces.append((lo + TWO_PI, TWO_PI, t0 + b + TWO_PI, -1))
    return [(robot, phase, lo, hi, c, s) for lo, hi, c, s in pieces if hi - lo > 0.0]


def coverage(trajs: Sequence[Trajectory], strict: bool = True) -> ArcCoverage:
    """First-visitor attribution of the circle for ``trajs`` (index 0 = queen).

    The first-visit time is the lower envelope of affine functions of the
    angle, so it is computed exactly: breakpoints are piece endpoints plus
    pairwise crossings; on each elementary interval one piece wins.  Ties
    go to the lower robot index (the queen first).
    """
    pieces = []
    for r, traj in enumerate(trajs):
        for k, ph in enumerate(traj.phases):
            if isinstance(ph, ArcMotion):
                pieces.extend(_arc_pieces(r, k, ph, traj.starts[k]))

    cuts = {0.0, TWO_PI}
    for p in pieces:
        cuts.update((p[2], p[3]))
    for i, p in enumerate(pieces):
        for q in pieces[i + 1:]:
            if p[5] == q[5]:
                continue
            x = (q[4] - p[4]) / (p[5] - q[5])
            if max(p[2], q[2]) < x < min(p[3], q[3]):
                cuts.add(x)
    cuts = sorted(cuts)

    segs = []  # (lo, hi, piece) or (lo, hi, None) for gaps
    for a, b in zip(cuts, cuts[1:]):
        if b - a <= 0.0:
            continue
        m = 0.5 * (a + b)
        best = None
        for p in pieces:
            if p[2] <= m <= p[3]:
                t = p[4] + p[5] * m
                if best is None or t < best[0] - TIE_TOL or (abs(t - best[0]) <= TIE_TOL and p[0] < best[1][0]):
                    best = (t, p)
        piece = best[1] if best else None
        if segs and segs[-1][2] is piece:
            segs[-1] = (segs[-1][0], b, piece)
        else:
            segs.append((a, b, piece))

    gaps = [ArcInterval(a, b - a) for a, b, p in segs if p is None and b - a > GAP_TOL]
    if gaps and strict:
        raise CoverageError(gaps)

    arcs = [CoveredArc(p[0], p[1], a, b, p[4], p[5]) for a, b, p in segs if p is not None]
    t0 = max((a.t_last for a in arcs), default=math.inf)
    intervals: dict[int, list[tuple[float, float]]] = {r: [] for r in range(len(trajs))}
    for a in sorted(arcs, key=lambda a: a.t_first):
        iv = intervals[a.robot]
        if iv and a.t_first <= iv[-1][1] + TIE_TOL:
            iv[-1] = (iv[-1][0], max(iv[-1][1], a.t_last))
        else:
            iv.append((a.t_first, a.t_last))
    return ArcCoverage(tuple(arcs), t0, intervals, tuple(gaps))


def export_csv_rows(trajs: Sequence[Trajectory], names: Sequence[str], t_end: float, dt: float = 1e-3) -> list[str]:
    """Rows ``robot,t,x,y`` sampled every ``dt`` up to ``ceil(t_end/dt)*dt``, 9 significant digits."""
    n = int(math.ceil(t_end / dt - 1e-9))
    ts = np.arange(n + 1) * dt
    rows = ["robot,t,x,y"]
    for name, traj in zip(names, trajs):
        pts = traj.positions(ts)
        for t, (x, y) in zip(ts, pts):
            rows.append(f"{name},{t:.9g},{x:.9g},{y:.9g}")
    return rows
