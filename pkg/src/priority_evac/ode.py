"""Cost-preserving queen motion.

Given a servant trajectory ``S`` and a queen start point, the queen moves at
unit speed so that ``t + |Q(t) - S(t)|`` stays constant.  Writing ``phi``
for the servant-side critical angle and ``theta`` for the queen-side one,
the separation shrinks at rate ``cos(phi) + cos(theta)``, so the queen must
keep ``cos(theta) = 1 - cos(phi)``.  That fixes her heading up to a mirror
choice about the queen->servant direction; the branch closest to the
previous heading is kept.  The resulting first-order ODE is integrated with
fixed-step RK4 until the queen crosses a given line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Point2
from .trajectory import SampledMotion, Trajectory

ODE_STEP = 1e-5
EVENT_TOL = 1e-10


class HypothesisViolated(RuntimeError):
    """The servant moves away from the queen, so cost preservation is impossible."""

    def __init__(self, t: float, cos_phi: float):
        super().__init__(f"servant recedes from the queen at t={t:.9g} (cos phi={cos_phi:.3g})")
        self.t = t
        self.cos_phi = cos_phi


class EventNotFound(RuntimeError):
    """The queen never reached the event line before ``t_max``."""

    def __init__(self, t_max: float):
        super().__init__(f"queen did not reach the equidistance line before t={t_max:.9g}")
        self.t_max = t_max


def _heading(qx, qy, sx, sy, ux, uy, rx, ry, t):
    wx, wy = qx - sx, qy - sy
    d = math.hypot(wx, wy)
    if d == 0.0:
        raise HypothesisViolated(t, float("nan"))
    cos_phi = (ux * wx + uy * wy) / d
    if cos_phi < -1e-12:
        raise HypothesisViolated(t, cos_phi)
    ct = 1.0 - max(cos_phi, 0.0)
    st = math.sqrt(max(0.0, 1.0 - ct * ct))
    ex, ey = -wx / d, -wy / d  # toward the servant
    px, py = -ey, ex
    ax, ay = ct * ex + st * px, ct * ey + st * py
    bx, by = ct * ex - st * px, ct * ey - st * py
    if ax * rx + ay * ry >= bx * rx + by * ry:
        return ax, ay
    return bx, by


def cost_preserving_velocity(qp: Point2, s: Trajectory, t: float, v_prev: Point2) -> Point2:
    """Unit heading that keeps ``t + |Q - S(t)|`` stationary at ``qp``.

    Of the two mirror solutions the one with the larger dot product against
    ``v_prev`` is returned.  Raises :class:`HypothesisViolated` when the
    servant is moving away from ``qp``.
    """
    sp, u = s.position_at(t), s.velocity_at(t)
    return Point2(*_heading(qp.x, qp.y, sp.x, sp.y, u.x, u.y, v_prev.x, v_prev.y, t))


@dataclass(frozen=True, eq=False)
class OdeSolution:
    t: np.ndarray  # absolute sample times
    p: np.ndarray
    v: np.ndarray
    tau0: float
    tau1: float
    k1: Point2
    preserved_cost: float

    def motion(self) -> SampledMotion:
        return SampledMotion(self.t - self.t[0], self.p, self.v)

    def plateau_residual(self, s: Trajectory) -> float:
        sp = s.positions(self.t)
        d = np.hypot(*(self.p - sp).T)
        return float(np.max(np.abs(self.t + d - self.preserved_cost)))


def integrate_cost_preserving(
    s: Trajectory,
    q0: Point2,
    t0: float,
    event_line: tuple[Point2, Point2],
    t_max: float,
    h: float = ODE_STEP,
    v_init: Point2 | None = None,
    crossing: int = 1,
) -> OdeSolution:
    """Integrate the cost-preserving queen path from ``(t0, q0)``.

    Stops at the ``crossing``-th sign change of the queen's signed distance
    to ``event_line`` (refined by bisection on the final step to
    ``EVENT_TOL``).  ``v_init`` seeds the branch choice; by default the
    heading straight at the servant is used as reference.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    if crossing < 1:
        raise ValueError("crossing must be at least 1")
    pos, vel = s.position_at, s.velocity_at
    la, lb = event_line
    lx, ly = lb.x - la.x, lb.y - la.y
    ln = math.hypot(lx, ly)
    lx, ly = lx / ln, ly / ln

    def side(qx, qy):
        return lx * (qy - la.y) - ly * (qx - la.x)

    def field(t, qx, qy, rx, ry):
        sp, u = pos(t), vel(t)
        return _heading(qx, qy, sp.x, sp.y, u.x, u.y, rx, ry, t)

    def step(t, qx, qy, k1, dt):
        rx, ry = k1
        k2 = field(t + dt / 2, qx + dt / 2 * k1[0], qy + dt / 2 * k1[1], rx, ry)
        k3 = field(t + dt / 2, qx + dt / 2 * k2[0], qy + dt / 2 * k2[1], rx, ry)
        k4 = field(t + dt, qx + dt * k3[0], qy + dt * k3[1], rx, ry)
        return (
            qx + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            qy + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        )

    sp0 = pos(t0)
    cost = t0 + q0.dist(sp0)
    ref = v_init if v_init is not None else (sp0 - q0)
    t, qx, qy = t0, q0.x, q0.y
    k = field(t, qx, qy, ref.x, ref.y)
    ts, ps, vs = [t], [(qx, qy)], [k]
    side0 = side(qx, qy)
    if abs(side0) <= 1e-12:
        return OdeSolution(np.array(ts), np.array(ps), np.array(vs), t0, t0, q0, cost)

    while t < t_max:
        dt = min(h, t_max - t)
        nx, ny = step(t, qx, qy, k, dt)
        sn = side(nx, ny)
        crossed = sn == 0.0 or (sn > 0) != (side0 > 0)
        if crossed and crossing > 1:
            crossing -= 1
            side0 = sn if sn != 0.0 else -side0
        elif crossed:
            lo, hi = 0.0, dt
            while hi - lo > EVENT_TOL:
                mid = 0.5 * (lo + hi)
                mx, my = step(t, qx, qy, k, mid)
                if (side(mx, my) > 0) == (side0 > 0) and side(mx, my) != 0.0:
                    lo = mid
                else:
                    hi = mid
            nx, ny = step(t, qx, qy, k, hi)
            t1 = t + hi
            k = field(t1, nx, ny, k[0], k[1])
            if hi > 0.0:
                ts.append(t1)
                ps.append((nx, ny))
                vs.append(k)
            return OdeSolution(np.array(ts), np.array(ps), np.array(vs), t0, t1, Point2(nx, ny), cost)
        t = t + dt
        qx, qy = nx, ny
        k = field(t, qx, qy, k[0], k[1])
        ts.append(t)
        ps.append((qx, qy))
        vs.append(k)
    raise EventNotFound(t_max)
