"""Parameterized search strategies for a queen and one to three servants.

Every builder returns an :class:`AlgorithmInstance` whose first trajectory
is the queen's.  Preconditions under which the cost analysis of a family
holds are checked by name; a violated one raises :class:`InfeasibleError`
carrying that name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .geometry import ORIGIN, Point2, ak_distance, k_point, unit_point
from .numerics import bisect
from .ode import ODE_STEP, EventNotFound, HypothesisViolated, OdeSolution, integrate_cost_preserving
from .trajectory import ArcMotion, CoverageError, LineMotion, Trajectory, Wait, coverage

FAMILIES = ("search1", "search2", "search3", "nsearch3")
PARAM_NAMES = {
    "search1": ("alpha", "beta"),
    "search2": ("alpha", "rho"),
    "search3": ("alpha", "beta", "rho"),
    "nsearch3": ("alpha", "beta", "rho"),
}
SERVANTS = {"search1": 1, "search2": 2, "search3": 3, "nsearch3": 3}

# Hand-tuned parameter choices the optimizer is expected to rediscover.
REFERENCE_PARAMS = {
    "search2": {"alpha": 0.6361, "rho": 0.7944},
    "search3": {"alpha": 0.26738, "beta": 1.2949, "rho": 0.70685},
    "nsearch3": {"alpha": 0.27764, "beta": 1.29839, "rho": 0.68648},
}

TAU0_SCAN_STEP = 1e-4
TAU0_TOL = 1e-10


class InfeasibleError(RuntimeError):
    def __init__(self, condition: str, detail: str = ""):
        super().__init__(f"{condition}: {detail}" if detail else condition)
        self.condition = condition
        self.detail = detail


@dataclass(frozen=True)
class Condition:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True, eq=False)
class AlgorithmInstance:
    family: str
    params: dict
    queen: Trajectory
    servants: tuple
    validity: tuple = ()
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.servants) != SERVANTS[self.family]:
            raise ValueError(f"{self.family} needs {SERVANTS[self.family]} servants")

    @property
    def trajectories(self) -> list[Trajectory]:
        return [self.queen, *self.servants]

    @cached_property
    def coverage(self):
        return coverage(self.trajectories)

    @property
    def search_time(self) -> float:
        return self.coverage.search_time


def _require(checks: list, name: str, ok: bool, detail: str = "") -> None:
    checks.append(Condition(name, bool(ok), detail))
    if not ok:
        raise InfeasibleError(name, detail)


def _chain(*phases) -> Trajectory:
    # zero-length pieces are dropped
    keep = []
    for ph in phases:
        if ph is None:
            continue
        keep.append(ph)
    return Trajectory(tuple(keep))


def _line(a: Point2, b: Point2):
    return LineMotion(a, b) if a.dist(b) > 0.0 else None


def _arc(b: float, sigma: int, d: float):
    return ArcMotion(b, sigma, d) if d > 0.0 else None


def _finish(family, params, queen, servants, checks, info) -> AlgorithmInstance:
    inst = AlgorithmInstance(family, dict(params), queen, tuple(servants), tuple(checks), info)
    try:
        inst.coverage
    except CoverageError as exc:
        checks.append(Condition("full_coverage", False, str(exc)))
        raise InfeasibleError("full_coverage", str(exc)) from exc
    checks.append(Condition("full_coverage", True))
    return AlgorithmInstance(family, dict(params), queen, tuple(servants), tuple(checks), info)


def build_search1(alpha: float, beta: float) -> AlgorithmInstance:
    """One servant.

    Both robots go to ``ki(pi)``; the servant searches clockwise while the
    queen searches counter-clockwise to ``ki(-alpha)``, cuts along a chord
    to ``ki(beta - alpha)`` and searches back clockwise for ``beta``.
    ``alpha = beta = 0`` gives the plain two-robot sweep.
    """
    checks: list = []
    _require(checks, "parameter_ranges", alpha >= 0 and 0 <= beta <= 2 * math.pi, f"alpha={alpha}, beta={beta}")
    _require(checks, "nonnegative_phase_durations", alpha <= math.pi and beta <= math.pi + alpha)
    queen = _chain(
        LineMotion(ORIGIN, unit_point(math.pi)),
        _arc(math.pi, 1, math.pi - alpha),
        _line(unit_point(-alpha), unit_point(beta - alpha)),
        _arc(beta - alpha, -1, beta),
    )
    servant = _chain(
        LineMotion(ORIGIN, unit_point(math.pi)),
        _arc(math.pi, -1, math.pi + alpha - beta),
    )
    info = {
        "queen_finish": 1 + math.pi - alpha + 2 * math.sin(beta / 2) + beta,
        "servant_finish": 1 + math.pi + alpha - beta,
    }
    return _finish("search1", {"alpha": alpha, "beta": beta}, queen, [servant], checks, info)


def _approach_and_meet(alpha: float, theta: float, rho: float, search_time: float, checks: list, start_angle: float):
    """Queen phases: deploy, search ccw to ``ki(pi)``, cross to ``K`` then to ``ki(-theta)``, wait."""
    k = k_point(theta, rho)
    meet = unit_point(-theta)
    arrival = 1 + alpha + ak_distance(theta, rho) + 2 - 2 * rho
    _require(
        checks,
        "queen_reaches_meeting_point_first",
        search_time >= arrival,
        f"queen arrives at {arrival:.6f}, servants finish at {search_time:.6f}",
    )
    queen = _chain(
        LineMotion(ORIGIN, unit_point(start_angle)),
        _arc(start_angle, 1, alpha),
        _line(unit_point(math.pi), k),
        _line(k, meet),
        Wait(meet, search_time - arrival) if search_time > arrival else None,
    )
    return queen, arrival


def build_search2(alpha: float, rho: float) -> AlgorithmInstance:
    """Two servants sweep towards ``ki(-alpha/2)`` from both sides while the
    queen searches a short arc and cuts across the disk to meet them."""
    checks: list = []
    _require(checks, "parameter_ranges", 0 <= alpha <= 2 * math.pi and 0 <= rho <= 1, f"alpha={alpha}, rho={rho}")
    t0 = 1 + math.pi - alpha / 2
    queen, arrival = _approach_and_meet(alpha, alpha / 2, rho, t0, checks, math.pi - alpha)
    s1 = _chain(LineMotion(ORIGIN, unit_point(math.pi - alpha)), _arc(math.pi - alpha, -1, math.pi - alpha / 2))
    s2 = _chain(LineMotion(ORIGIN, unit_point(math.pi)), _arc(math.pi, 1, math.pi - alpha / 2))
    info = {"queen_arrival": arrival, "search_time": t0}
    return _finish("search2", {"alpha": alpha, "rho": rho}, queen, [s1, s2], checks, info)


def _search3_servants(alpha: float, beta: float) -> list[Trajectory]:
    theta = (alpha + beta) / 2
    base = math.pi - alpha - beta
    s1 = _chain(LineMotion(ORIGIN, unit_point(base)), _arc(base, -1, math.pi - theta))
    s2 = _chain(LineMotion(ORIGIN, unit_point(math.pi)), _arc(math.pi, 1, math.pi - theta))
    s3 = _chain(LineMotion(ORIGIN, unit_point(base)), _arc(base, 1, beta))
    return [s1, s2, s3]


def build_search3(alpha: float, beta: float, rho: float) -> AlgorithmInstance:
    checks: list = []
    _require(checks, "parameter_ranges", alpha >= 0 and beta >= 0 and 0 <= rho <= 1, f"alpha={alpha}, beta={beta}, rho={rho}")
    theta = (alpha + beta) / 2
    ak = ak_distance(theta, rho)
    _require(checks, "queen_search_ends_before_s3", alpha <= beta, f"alpha={alpha} > beta={beta}")
    _require(checks, "s3_done_during_approach", alpha + ak >= beta, f"alpha+AK={alpha + ak:.6f} < beta={beta}")
    t0 = 1 + math.pi - theta
    queen, arrival = _approach_and_meet(alpha, theta, rho, t0, checks, math.pi - alpha)
    info = {"queen_arrival": arrival, "search_time": t0}
    return _finish("search3", {"alpha": alpha, "beta": beta, "rho": rho}, queen, _search3_servants(alpha, beta), checks, info)


def _cost_slope(qp: np.ndarray, qv: np.ndarray, sp: np.ndarray, sv: np.ndarray) -> np.ndarray:
    """d/dt (t + |Q - S|) = 1 - cos(phi) - cos(theta), vectorized."""
    w = qp - sp
    d = np.hypot(w[:, 0], w[:, 1])
    return 1.0 - (np.sum(sv * w, axis=1) - np.sum(qv * w, axis=1)) / d


def find_tau0(alpha: float, beta: float, rho: float, servant: Trajectory) -> float | None:
    """Earliest local maximum of ``t + |Q(t) - S1(t)|`` while the queen
    approaches ``K``; ``None`` if the cost keeps rising or falling."""
    theta = (alpha + beta) / 2
    start = unit_point(math.pi)
    line = LineMotion(start, k_point(theta, rho))
    u = line.direction
    a, b = 1 + alpha, 1 + alpha + line.duration
    n = max(2, int(math.ceil((b - a) / TAU0_SCAN_STEP)) + 1)
    ts = np.linspace(a, b, n)
    qp = line.positions(ts - a)
    qv = np.tile([u.x, u.y], (n, 1))
    sp = servant.positions(ts)
    ang = np.arctan2(sp[:, 1], sp[:, 0])
    sv = np.column_stack((np.sin(ang), -np.cos(ang)))  # clockwise tangent
    g = _cost_slope(qp, qv, sp, sv)
    idx = np.nonzero((g[:-1] > 0) & (g[1:] <= 0))[0]
    if len(idx) == 0:
        return None
    i = int(idx[0])

    def slope(t):
        q = line.position(t - a)
        s, v = servant.position_at(t), servant.velocity_at(t)
        w = q - s
        return 1.0 - (v.dot(w) - u.dot(w)) / w.norm()

    return bisect(slope, float(ts[i]), float(ts[i + 1]), TAU0_TOL)


def build_nsearch3(
    alpha: float,
    beta: float,
    rho: float,
    ode_step: float = ODE_STEP,
    tau0: float | None = None,
    crossing: int = 1,
) -> AlgorithmInstance:
    """Search3 with the queen's approach replaced, from the cost peak
    ``tau0`` on, by a cost-preserving curve that ends when she becomes
    equidistant from servants 1 and 2.

    ``tau0`` may be forced (e.g. to the arrival time at ``K``, which yields
    Search3's queen path).  ``crossing`` picks which crossing of the
    equidistance line ends the curve; the curve can graze the line and come
    back, so later crossings are sometimes wanted.
    """
    checks: list = []
    params = {"alpha": alpha, "beta": beta, "rho": rho}
    _require(checks, "parameter_ranges", alpha >= 0 and beta >= 0 and 0 <= rho <= 1, f"alpha={alpha}, beta={beta}, rho={rho}")
    _require(checks, "queen_search_ends_before_s3", alpha <= beta, f"alpha={alpha} > beta={beta}")
    theta = (alpha + beta) / 2
    t_search = 1 + math.pi - theta
    servants = _search3_servants(alpha, beta)
    s1 = servants[0]
    start = unit_point(math.pi)
    kpt = k_point(theta, rho)
    ak = start.dist(kpt)
    approach = LineMotion(start, kpt)

    if tau0 is None:
        tau0 = find_tau0(alpha, beta, rho, s1)
    _require(
        checks,
        "stationary_point_in_approach_window",
        tau0 is not None and abs(tau0 - 1 - alpha) <= ak + 1e-12,
        "no local maximum of the servant-1 cost while approaching K",
    )
    q0 = approach.position(tau0 - 1 - alpha)
    sp, su = s1.position_at(tau0), s1.velocity_at(tau0)
    sep = q0 - sp
    cos_phi = su.dot(sep) / sep.norm()
    _require(checks, "servant_not_receding", cos_phi >= 0, f"cos phi={cos_phi:.6g} at t={tau0:.9g}")
    _require(checks, "s3_done_before_preservation", 1 + beta <= tau0, f"1+beta={1 + beta:.6f} > tau0={tau0:.6f}")

    meet = unit_point(-theta)
    try:
        sol = integrate_cost_preserving(
            s1, q0, tau0, (ORIGIN, meet), t_search + 1.0, ode_step, approach.direction, crossing
        )
        reached, detail = True, ""
    except (HypothesisViolated, EventNotFound) as exc:
        reached, detail = False, str(exc)
    _require(checks, "equidistance_reached", reached, detail)
    _require(checks, "equidistance_before_search_end", sol.tau1 <= t_search, f"tau1={sol.tau1:.6f} > {t_search:.6f}")
    arrival = sol.tau1 + sol.k1.dist(meet)
    _require(
        checks,
        "queen_reaches_meeting_point_first",
        t_search >= arrival,
        f"queen arrives at {arrival:.6f}, servants finish at {t_search:.6f}",
    )
    queen = _chain(
        LineMotion(ORIGIN, unit_point(math.pi - alpha)),
        _arc(math.pi - alpha, 1, alpha),
        _line(start, q0),
        sol.motion() if sol.tau1 > sol.tau0 else None,
        _line(sol.k1, meet),
        Wait(meet, t_search - arrival) if t_search > arrival else None,
    )
    info = {
        "tau0": tau0,
        "tau1": sol.tau1,
        "k1": sol.k1,
        "preserved_cost": sol.preserved_cost,
        "queen_arrival": arrival,
        "search_time": t_search,
        "ode": sol,
        "ode_step": ode_step,
        "crossing": crossing,
    }
    return _finish("nsearch3", params, queen, servants, checks, info)


BUILDERS = {
    "search1": build_search1,
    "search2": build_search2,
    "search3": build_search3,
    "nsearch3": build_nsearch3,
}


def build(family: str, params: dict, **kwargs) -> AlgorithmInstance:
    if family not in BUILDERS:
        raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    names = PARAM_NAMES[family]
    if set(params) != set(names):
        raise ValueError(f"{family} takes parameters {', '.join(names)}")
    return BUILDERS[family](*(params[n] for n in names), **kwargs)
