"""Parameter tuning for the search families by derivative-free minimization
of the worst-case evacuation cost, and the equal-cost residuals that pin
down the one-servant optimum.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .algorithms import PARAM_NAMES, InfeasibleError, build
from .cost import N_SAMPLES, REFINE_TOL, evacuation_cost
from .geometry import DomainError
from .ode import ODE_STEP

SEARCH_ODE_STEP = 1e-4
REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5


class NoFeasibleStart(RuntimeError):
    """Every grid point in the search box is infeasible."""


class PreconditionError(ValueError):
    def __init__(self, condition: str, detail: str = ""):
        super().__init__(f"{condition}: {detail}" if detail else condition)
        self.condition = condition


@dataclass
class OptimizationResult:
    family: str
    params: dict
    cost: float
    iterations: int
    trace: list = field(default_factory=list)  # (params, cost) in evaluation order
    converged: bool = False

    def to_dict(self) -> dict:
        return {
            "algorithm": self.family,
            "params": dict(self.params),
            "cost": self.cost,
            "iterations": self.iterations,
            "evaluations": len(self.trace),
            "converged": self.converged,
        }

    def write_trace_csv(self, path) -> None:
        names = PARAM_NAMES[self.family]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", *names, "cost"])
            for i, (p, c) in enumerate(self.trace):
                w.writerow([i, *(f"{p[n]:.9g}" for n in names), "inf" if math.isinf(c) else f"{c:.9g}"])


@dataclass
class SimplexResult:
    x: np.ndarray
    fx: float
    iterations: int
    converged: bool


def nelder_mead(f, x0, step: float, tol: float, max_iter: int = 2000) -> SimplexResult:
    """Minimize ``f`` from ``x0`` with an axis-aligned starting simplex.

    Stops when every vertex lies within ``tol`` of the best one.  ``f`` may
    return ``inf``; such vertices are simply ranked last.
    """
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    pts = [x0.copy()]
    for i in range(n):
        p = x0.copy()
        p[i] += step
        pts.append(p)
    vals = [f(p) for p in pts]
    it = 0
    while True:
        order = sorted(range(n + 1), key=lambda i: (vals[i], i))
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]
        diam = max(float(np.max(np.abs(p - pts[0]))) for p in pts[1:])
        if diam < tol:
            return SimplexResult(pts[0], vals[0], it, True)
        if it >= max_iter:
            return SimplexResult(pts[0], vals[0], it, False)
        it += 1
        c = np.mean(pts[:-1], axis=0)
        xr = c + REFLECT * (c - pts[-1])
        fr = f(xr)
        if fr < vals[0]:
            xe = c + EXPAND * (xr - c)
            fe = f(xe)
            pts[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = c + CONTRACT * (xr - c)
            fc = f(xc)
            if fc <= fr:
                pts[-1], vals[-1] = xc, fc
                continue
        else:
            xc = c + CONTRACT * (pts[-1] - c)
            fc = f(xc)
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
                continue
        for i in range(1, n + 1):
            pts[i] = pts[0] + SHRINK * (pts[i] - pts[0])
            vals[i] = f(pts[i])


class _Objective:
    """Worst-case cost of a family, +inf where infeasible, with a trace."""

    def __init__(self, family: str, ode_step: float, n_samples: int, refine_tol: float):
        self.family = family
        self.names = PARAM_NAMES[family]
        self.kwargs = {"ode_step": ode_step} if family == "nsearch3" else {}
        self.n_samples = n_samples
        self.refine_tol = refine_tol
        self.cache: dict = {}
        self.trace: list = []

    def params(self, x) -> dict:
        return {n: float(v) for n, v in zip(self.names, x)}

    def __call__(self, x) -> float:
        key = tuple(float(v) for v in x)
        if key in self.cache:
            return self.cache[key]
        p = self.params(key)
        try:
            inst = build(self.family, p, **self.kwargs)
            c = evacuation_cost(inst, self.refine_tol, self.n_samples).cost
        except (InfeasibleError, DomainError):
            c = math.inf
        self.cache[key] = c
        self.trace.append((p, c))
        return c


def optimize(
    family: str,
    seed: dict,
    box_radius: float = 0.1,
    tol: float = 1e-6,
    *,
    grid: int = 5,
    starts: int = 3,
    max_iter: int = 2000,
    max_restarts: int = 10,
    ode_step: float = SEARCH_ODE_STEP,
    final_ode_step: float = ODE_STEP,
    n_samples: int = N_SAMPLES,
    refine_tol: float = REFINE_TOL,
) -> OptimizationResult:
    """Minimize worst-case cost over ``family``'s parameters near ``seed``.

    A ``grid``-per-axis lattice over ``seed +- box_radius`` supplies starting
    points (the seed plus the ``starts`` best lattice points); Nelder-Mead
    runs from each and is restarted from its own optimum until a restart no
    longer improves.  Ties are broken by start order, so runs are
    deterministic.  For ``nsearch3`` the search uses ``ode_step`` and the
    returned cost is re-evaluated at ``final_ode_step``.
    """
    names = PARAM_NAMES[family]
    if set(seed) != set(names):
        raise ValueError(f"{family} takes parameters {', '.join(names)}")
    if box_radius < 0:
        raise ValueError("box radius must be non-negative")
    obj = _Objective(family, ode_step, n_samples, refine_tol)
    x0 = np.array([float(seed[n]) for n in names])

    if box_radius == 0:
        c = obj(x0)
        if math.isinf(c):
            raise NoFeasibleStart(f"seed {obj.params(x0)} is infeasible")
        return _finish(family, obj, x0, c, 0, True, final_ode_step, n_samples, refine_tol)

    axes = [np.linspace(v - box_radius, v + box_radius, grid) for v in x0]
    lattice = [np.array(p) for p in itertools.product(*axes)]
    scored = [(obj(p), i, p) for i, p in enumerate(lattice)]
    feasible = sorted((s for s in scored if not math.isinf(s[0])), key=lambda s: (s[0], s[1]))
    c_seed = obj(x0)
    if not feasible and math.isinf(c_seed):
        raise NoFeasibleStart(f"no feasible point within {box_radius} of {obj.params(x0)}")
    inits = ([x0] if not math.isinf(c_seed) else []) + [s[2] for s in feasible[:starts]]

    step = 2 * box_radius / max(grid - 1, 1)
    best_x, best_f, iters, conv = None, math.inf, 0, False
    for x in inits:
        fx = obj(x)
        ok = False
        for _ in range(max_restarts + 1):
            r = nelder_mead(obj, x, step, tol, max_iter)
            iters += r.iterations
            improved = r.fx < fx - 1e-12
            x, fx, ok = r.x, r.fx, r.converged
            if not improved:
                break
        if fx < best_f:
            best_x, best_f, conv = x, fx, ok
    return _finish(family, obj, best_x, best_f, iters, conv, final_ode_step, n_samples, refine_tol)


def _finish(family, obj, x, c, iters, conv, final_ode_step, n_samples, refine_tol) -> OptimizationResult:
    params = obj.params(x)
    if family == "nsearch3" and final_ode_step != obj.kwargs.get("ode_step"):
        c = evacuation_cost(build(family, params, ode_step=final_ode_step), refine_tol, n_samples).cost
    return OptimizationResult(family, params, c, iters, obj.trace, conv)


def search1_balance_residuals(alpha: float, beta: float) -> tuple[float, float]:
    """``(E0 - E1, E1 - E2)`` for the three candidate worst cases of the
    one-servant algorithm; both vanish at its optimal parameters."""
    if not alpha > math.pi / 3:
        raise PreconditionError("alpha_above_pi_over_3", f"alpha={alpha}")
    if not math.cos(alpha) + math.cos(alpha - beta / 2) > 1:
        raise PreconditionError("servant_approaching", f"cos a + cos(a - b/2) <= 1 at a={alpha}, b={beta}")
    if not alpha - math.sin(beta / 2) <= beta:
        raise PreconditionError("queen_turns_in_time", f"alpha - sin(beta/2) > beta at a={alpha}, b={beta}")
    e0, e1, e2 = search1_class_costs(alpha, beta)
    return e0 - e1, e1 - e2


def search1_class_costs(alpha: float, beta: float) -> tuple[float, float, float]:
    base = 1 + math.pi
    e0 = base - alpha + 2 * math.sin(beta / 2) + beta
    e1 = base - alpha + 2 * math.sin(alpha)
    e2 = base + alpha - beta + 2 * math.sin(alpha - beta / 2 - math.sin(beta / 2))
    return e0, e1, e2
