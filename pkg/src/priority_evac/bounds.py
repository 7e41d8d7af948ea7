"""Lower-bound constants and the small transcendental systems behind them,
plus the closed-form optimum of the one-servant algorithm.

Every system is reduced to one unknown, bracketed by a scan and finished
by bisection, so convergence never depends on a starting guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import DomainError
from .numerics import BracketError, bisect, scan_brackets

SCAN_STEP = 1e-3
ROOT_TOL = 1e-13
HEXAGON_VERTEX_BOUND = 2 + math.sqrt(3) / 2  # time to reach the last hexagon vertex


@dataclass(frozen=True)
class BoundSolution:
    unknowns: dict
    residuals: dict
    bracket: tuple

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals.values())

    def __getitem__(self, key: str) -> float:
        return self.unknowns[key]

    def to_dict(self) -> dict:
        return {"unknowns": dict(self.unknowns), "residuals": dict(self.residuals), "bracket": list(self.bracket)}


def _root(f, lo: float, hi: float, step: float = SCAN_STEP) -> tuple[float, tuple[float, float]]:
    brackets = scan_brackets(f, lo, hi, step)
    if not brackets:
        raise BracketError(lo, hi, step)
    a, b = brackets[0]
    return (a if a == b else bisect(f, a, b, ROOT_TOL)), (a, b)


def hexagon_lower_bound() -> float:
    """Any one-servant algorithm needs at least this long."""
    return 3 + math.pi / 6 + math.sqrt(3) / 2


def ordinary_evacuation_lb(k: int) -> float:
    """Lower bound for evacuating all of ``k`` robots."""
    if k < 1:
        raise DomainError(f"need at least one robot, got k={k}")
    return 1 + 4 * math.pi / (3 * k) + math.sqrt(3)


def _f(x: float) -> float:
    return x + math.sin(x)


def solve_alpha0() -> BoundSolution:
    """Optimal one-servant parameters: the queen's head start ``alpha0``,
    the servant's search ``beta0`` and the resulting cost."""

    def g(a):
        return _f(_f(a - math.sin(a))) - math.sin(a)

    lo, hi = 1.0, math.pi / 2
    a, br = _root(g, lo, hi)
    b = 2 * _f(a - math.sin(a))
    cost = 1 + math.pi - a + 2 * math.sin(a)
    res = {
        "alpha0": g(a),
        "beta0": b - 2 * _f(a - math.sin(a)),
        # the three worst cases coincide: sin(b/2) + b/2 = sin(a)
        "balance": math.sin(b / 2) + b / 2 - math.sin(a),
    }
    return BoundSolution({"alpha0": a, "beta0": b, "cost": cost}, res, br)


def theta_arc(t: float, T: float) -> float:
    """Length of the boundary arc farther than ``T - t`` from a boundary point."""
    r = T - t
    if not (0.0 <= r <= 2.0):
        raise DomainError(f"T - t = {r} outside [0, 2]")
    return 4 * math.acos(r / 2)


def _check_open(t: float, T: float) -> float:
    r = T - t
    if not (0.0 <= r < 2.0):
        raise DomainError(f"T - t = {r} outside [0, 2)")
    return r


def dtheta_dt(t: float, T: float) -> float:
    r = _check_open(t, T)
    return 4 / math.sqrt(4 - r * r)


def dtheta_dT(t: float, T: float) -> float:
    r = _check_open(t, T)
    return -4 / math.sqrt(4 - r * r)


def solve_lb2() -> BoundSolution:
    """Two-servant lower bound: ``(tau, t_star, T2)``."""

    def inner(T):
        # tau + 2cos((tau-1)/2) is non-decreasing, so the root is unique
        return _root(lambda tau: tau + 2 * math.cos((tau - 1) / 2) - T, 0.0, T)[0]

    def outer(T):
        tau = inner(T)
        ts = (T + 1) / 2
        return ts + 2 * math.cos((2 * ts + tau) / 4 - 0.75) - T

    T, br = _root(outer, 3.0, 1 + math.pi - 1e-9)
    tau = inner(T)
    ts = (T + 1) / 2
    res = {
        "tau": tau - (T - 2 * math.cos((tau - 1) / 2)),
        "t_star": ts - (T + 1) / 2,
        "T": T - (ts + 2 * math.cos((2 * ts + tau) / 4 - 0.75)),
    }
    return BoundSolution({"tau": tau, "t_star": ts, "T": T}, res, br)


def _lb3_t_star(tau: float) -> float:
    return 1 + 2 / 3 * math.acos(-2 / 3) - (tau - 1) / 3


def _lb3_T(tau: float) -> float:
    ts = _lb3_t_star(tau)
    return ts + math.sin((3 * (ts - 1) + (tau - 1)) / 2)


def solve_lb3() -> BoundSolution:
    """Three-servant lower bound: ``(tau, t_star, T3)``."""

    def g(tau):
        return tau - _lb3_T(tau) + 2 * math.cos(0.75 * (tau - 1))

    tau, br = _root(g, 1.0, 3.0)
    ts = _lb3_t_star(tau)
    T = _lb3_T(tau)
    res = {
        "tau": tau - (T - 2 * math.cos(0.75 * (tau - 1))),
        "t_star": ts - _lb3_t_star(tau),
        "T": T - (ts + math.sin((3 * (ts - 1) + (tau - 1)) / 2)),
    }
    return BoundSolution({"tau": tau, "t_star": ts, "T": T}, res, br)


def evac_time_bound(n: int, t: float, y: float) -> float:
    """Lower bound on the finish time when ``n`` servants and a queen that
    has searched ``y`` leave the worst gap open at time ``t``."""
    if n < 1:
        raise DomainError(f"need at least one servant, got n={n}")
    lo, hi = 1 + (math.pi - y) / n, 1 + (2 * math.pi - y) / n
    if not (lo - 1e-12 <= t <= hi + 1e-12):
        raise DomainError(f"t={t} outside the window [{lo:.9g}, {hi:.9g}]")
    return t + math.sin((n * (t - 1) + y) / 2)


def min_queen_perimeter(n: int, T: float) -> float:
    """Perimeter the queen must search herself to finish by ``T`` (two servants)."""
    if n != 2:
        raise NotImplementedError("only the two-servant case has a time-free form")
    if not T <= 1 + math.pi:
        raise DomainError(f"T={T} exceeds 1 + pi")
    return 2 * (1 + math.pi - T)


def implicit_t(T: float, alpha: float) -> float:
    """Solve ``T = t + 2cos((t-1)/2 + alpha/4)`` for ``t`` in ``[1, T]``."""

    def g(t):
        return t + 2 * math.cos((t - 1) / 2 + alpha / 4) - T

    return _root(g, 1.0, T)[0]


def implicit_dt_dT(t: float, alpha: float) -> float:
    """``dt/dT`` along ``T = t + 2cos((t-1)/2 + alpha/4)``; at least 1/2."""
    s = math.sin((t - 1) / 2 + alpha / 4)
    if s >= 1.0:
        raise DomainError("derivative unbounded where the sine reaches 1")
    return 1 / (1 - s)


def implicit_dt_dalpha(t: float, alpha: float) -> float:
    s = math.sin((t - 1) / 2 + alpha / 4)
    if s >= 1.0:
        raise DomainError("derivative unbounded where the sine reaches 1")
    return 0.5 * s / (1 - s)
