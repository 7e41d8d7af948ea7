"""Critical angles, the distance-rate law and the worst-case evacuation cost.

The worst case over exit placements is a supremum over discovery times.
For every arc first searched by a robot ``F`` we maximize
``x + |Q(x) - F(x)|`` over the corresponding discovery times, cut at the
queen's phase boundaries so each piece is smooth.  Each piece is sampled
densely and every local bracket is refined by golden-section search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Point2, canonical_angle, unit_point
from .numerics import golden_max
from .trajectory import Trajectory

REFINE_TOL = 1e-10
N_SAMPLES = 4096
CLUSTER_ANGLE = 1e-4
PLATEAU_EPS = 1e-12


class UndefinedAngleError(ValueError):
    """The two robots occupy the same point, so no direction between them exists."""


@dataclass(frozen=True)
class CriticalAngles:
    phi: float  # servant velocity vs. servant->queen
    theta: float  # queen velocity vs. queen->servant
    flagged: bool = False  # a velocity was zero


def _angle_between(u: Point2, w: Point2) -> float:
    c = u.dot(w) / (u.norm() * w.norm())
    return math.acos(max(-1.0, min(1.0, c)))


def critical_angles(s: Trajectory, q: Trajectory, t: float) -> CriticalAngles:
    sp, qp = s.position_at(t), q.position_at(t)
    sep = qp - sp
    if sep.norm() == 0.0:
        raise UndefinedAngleError(f"robots coincide at t={t}")
    u, v = s.velocity_at(t), q.velocity_at(t)
    flagged = False
    if u.norm() == 0.0:
        phi, flagged = math.pi / 2, True
    else:
        phi = _angle_between(u, sep)
    if v.norm() == 0.0:
        theta, flagged = math.pi / 2, True
    else:
        theta = _angle_between(v, -sep)
    return CriticalAngles(phi, theta, flagged)


def distance_rate(s: Trajectory, q: Trajectory, t: float) -> float:
    """d/dt |Q(t) - S(t)|, equal to ``-(cos phi + cos theta)``.

    A zero velocity contributes nothing (its cosine term is dropped).
    """
    sp, qp = s.position_at(t), q.position_at(t)
    sep = qp - sp
    d = sep.norm()
    if d == 0.0:
        raise UndefinedAngleError(f"robots coincide at t={t}")
    u, v = s.velocity_at(t), q.velocity_at(t)
    cos_phi = u.dot(sep) / d  # |u| is 1 or 0
    cos_theta = -v.dot(sep) / d
    return -(cos_phi + cos_theta)


@dataclass(frozen=True)
class Maximizer:
    exit_angle: float
    discovery_time: float
    finder: int
    value: float
    pickup: Point2  # queen position when the exit is reported

    def to_dict(self) -> dict:
        return {
            "exit_angle": self.exit_angle,
            "discovery_time": self.discovery_time,
            "finder": robot_name(self.finder),
            "value": self.value,
            "queen_position": [self.pickup.x, self.pickup.y],
        }


@dataclass
class EvacuationReport:
    cost: float
    maximizers: list
    local_maxima: list  # every refined local maximum, all pieces
    search_time: float
    algorithm: str = ""
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def queen_pickup_points(self) -> list[Point2]:
        return [m.pickup for m in self.maximizers]

    def near_maximizers(self, tol: float) -> list[Maximizer]:
        """Local maxima within ``tol`` of the cost, clustered by exit angle."""
        return _cluster([m for m in self.local_maxima if m.value >= self.cost - tol])

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "params": dict(self.params),
            "cost": self.cost,
            "search_time": self.search_time,
            "maximizers": [m.to_dict() for m in self.maximizers],
            "tolerances": dict(self.tolerances),
        }


def robot_name(i: int) -> str:
    return "Q" if i == 0 else f"S{i}"


def _cluster(cands: list[Maximizer]) -> list[Maximizer]:
    out: list[Maximizer] = []
    for m in sorted(cands, key=lambda m: -m.value):
        if all(abs(_ang_diff(m.exit_angle, o.exit_angle)) >= CLUSTER_ANGLE for o in out):
            out.append(m)
    return sorted(out, key=lambda m: (m.discovery_time, m.finder))


def _ang_diff(a: float, b: float) -> float:
    d = canonical_angle(a - b)
    return min(d, 2 * math.pi - d)


def _local_max_runs(vals: np.ndarray) -> list[int]:
    """Indices of local maxima; flat runs (within PLATEAU_EPS) count once."""
    n = len(vals)
    ok = np.ones(n, dtype=bool)
    ok[1:] &= vals[1:] >= vals[:-1] - PLATEAU_EPS
    ok[:-1] &= vals[:-1] >= vals[1:] - PLATEAU_EPS
    picks = []
    i = 0
    while i < n:
        if ok[i]:
            j = i
            while j + 1 < n and ok[j + 1]:
                j += 1
            picks.append(i + int(np.argmax(vals[i : j + 1])))
            i = j + 1
        else:
            i += 1
    return picks


def _piece_maxima(q: Trajectory, f: Trajectory, finder: int, a: float, b: float, n: int, tol: float) -> list[Maximizer]:
    def value(t: float) -> float:
        return t + q.position_at(t).dist(f.position_at(t))

    if b - a <= 0.0:
        return [_make(q, f, finder, a, value(a))]
    ts = np.linspace(a, b, n)
    d = q.positions(ts) - f.positions(ts)
    vals = ts + np.hypot(d[:, 0], d[:, 1])
    out = []
    for i in _local_max_runs(vals):
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, n - 1)]
        x, fx = golden_max(value, float(lo), float(hi), tol)
        out.append(_make(q, f, finder, x, fx))
    return out


def _make(q: Trajectory, f: Trajectory, finder: int, t: float, v: float) -> Maximizer:
    return Maximizer(f.position_at(t).angle(), t, finder, v, q.position_at(t))


def evacuation_cost(instance, refine_tol: float = REFINE_TOL, n_samples: int = N_SAMPLES, maximizer_tol: float | None = None) -> EvacuationReport:
    """Worst-case time for the queen to reach the exit.

    The queen's own discoveries contribute their discovery time; servant
    discoveries contribute ``x + |Q(x) - S(x)|``.  Maximizers within
    ``maximizer_tol`` (default ``10*refine_tol``) of the cost are reported.
    """
    trajs = instance.trajectories
    cov = instance.coverage
    q = trajs[0]
    cands: list[Maximizer] = []
    qcuts = q.boundaries()
    for arc in cov.arcs:
        ta, tb = arc.t_first, arc.t_last
        f = trajs[arc.robot]
        if arc.robot == 0:
            # queen-found exits cost their discovery time
            cands.append(_make(q, f, 0, tb, tb))
            continue
        cuts = [ta] + [c for c in qcuts if ta < c < tb] + [tb]
        for u, w in zip(cuts, cuts[1:]):
            cands.extend(_piece_maxima(q, f, arc.robot, u, w, n_samples, refine_tol))
    cost = max(m.value for m in cands)
    tol = 10 * refine_tol if maximizer_tol is None else maximizer_tol
    local = sorted(cands, key=lambda m: (m.discovery_time, m.finder))
    maxs = _cluster([m for m in cands if m.value >= cost - tol])
    return EvacuationReport(
        cost=cost,
        maximizers=maxs,
        local_maxima=local,
        search_time=cov.search_time,
        algorithm=getattr(instance, "family", ""),
        params=dict(getattr(instance, "params", {})),
        tolerances={"refine_tol": refine_tol, "n_samples": n_samples, "maximizer_tol": tol},
    )


def cost_if_found(instance, exit_angle: float) -> float:
    """Evacuation time when the exit sits at ``unit_point(exit_angle)``."""
    x, finder = instance.coverage.first_visit(exit_angle)
    if finder == 0:
        return x
    return x + instance.queen.position_at(x).dist(unit_point(exit_angle))
