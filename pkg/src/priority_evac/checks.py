"""Named invariant checks run by ``verify``.

Each check returns a :class:`CheckResult` carrying the observed quantity and
the bound it was held to, so failures can be reported without re-running.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bounds
from .algorithms import REFERENCE_PARAMS, build, build_nsearch3, build_search1, build_search3
from .cost import REFINE_TOL, critical_angles, cost_if_found, distance_rate, evacuation_cost
from .geometry import TWO_PI, Point2, chord_length, k_point, unit_point
from .ode import ODE_STEP, integrate_cost_preserving
from .optimizer import optimize, search1_balance_residuals
from .trajectory import CHAIN_TOL, Wait, verify_unit_speed


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    observed: float
    bound: float
    detail: str = ""

    @property
    def module(self) -> str:
        return self.name.split(".", 1)[0]

    def line(self) -> str:
        status = "ok  " if self.ok else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{status} {self.name}: observed {self.observed:.3g}, bound {self.bound:.3g}{extra}"


class Context:
    """Shared, lazily built instances for one verify run."""

    def __init__(self, ode_step: float = ODE_STEP, refine_tol: float = REFINE_TOL, seed: int = 0):
        self.ode_step = ode_step
        self.refine_tol = refine_tol
        self.rng = np.random.default_rng(seed)
        self._inst: dict = {}
        self._reports: dict = {}

    def alpha0_beta0(self) -> tuple[float, float]:
        s = bounds.solve_alpha0()
        return s["alpha0"], s["beta0"]

    def instance(self, family: str):
        if family not in self._inst:
            if family == "search1":
                self._inst[family] = build_search1(*self.alpha0_beta0())
            elif family == "nsearch3":
                self._inst[family] = build("nsearch3", REFERENCE_PARAMS[family], ode_step=self.ode_step)
            else:
                self._inst[family] = build(family, REFERENCE_PARAMS[family])
        return self._inst[family]

    def report(self, family: str):
        if family not in self._reports:
            self._reports[family] = evacuation_cost(self.instance(family), self.refine_tol)
        return self._reports[family]

    def instances(self):
        return [self.instance(f) for f in ("search1", "search2", "search3", "nsearch3")]


REGISTRY: dict[str, tuple[str, Callable[[Context], CheckResult]]] = {}


def check(name: str, summary: str):
    def deco(fn):
        REGISTRY[name] = (summary, fn)
        return fn

    return deco


def _result(name, observed, bound, detail="", strict=False, at_least=False) -> CheckResult:
    if at_least:
        ok = observed >= bound
    else:
        ok = observed < bound if strict else observed <= bound
    return CheckResult(name, bool(ok), float(observed), float(bound), detail)


# ---------------------------------------------------------------- geometry


@check("geometry.unit_point_norm", "unit points lie on the circle")
def _unit_norm(ctx):
    th = ctx.rng.uniform(-10, 10, 1000)
    err = max(abs(unit_point(float(t)).norm() - 1) for t in th)
    return _result("geometry.unit_point_norm", err, 1e-12)


@check("geometry.k_point_on_diameter", "K(theta, rho) lies on its diameter")
def _k_diam(ctx):
    err = 0.0
    for th, rho in zip(ctx.rng.uniform(0, TWO_PI, 500), ctx.rng.uniform(0, 1, 500)):
        k = k_point(float(th), float(rho))
        err = max(err, abs(k.dist(unit_point(math.pi - th)) + k.dist(unit_point(-th)) - 2))
    return _result("geometry.k_point_on_diameter", err, 1e-12)


@check("geometry.chord_length", "chord length matches the endpoint distance")
def _chord(ctx):
    err = 0.0
    for a, d in zip(ctx.rng.uniform(0, TWO_PI, 500), ctx.rng.uniform(0, TWO_PI, 500)):
        err = max(err, abs(chord_length(float(d)) - unit_point(a).dist(unit_point(a + d))))
    return _result("geometry.chord_length", err, 1e-12)


# ---------------------------------------------------------------- trajectory


@check("trajectory.unit_speed", "every built-in robot moves at unit speed")
def _unit_speed(ctx):
    worst = max(verify_unit_speed(tr) for inst in ctx.instances() for tr in inst.trajectories)
    return _result("trajectory.unit_speed", worst, 1e-5)


@check("trajectory.lipschitz", "no robot moves faster than 1")
def _lipschitz(ctx):
    worst = 0.0
    eps = 1e-3
    for inst in ctx.instances():
        for tr in inst.trajectories:
            ts = np.linspace(0, tr.duration + 0.5, 4001)
            d = np.diff(tr.positions(ts), axis=0)
            step = np.hypot(d[:, 0], d[:, 1]) / np.diff(ts)
            worst = max(worst, float(step.max()) - 1)
            for t in ctx.rng.uniform(0, tr.duration, 200):
                worst = max(worst, tr.position_at(t + eps).dist(tr.position_at(t)) / eps - 1)
    return _result("trajectory.lipschitz", worst, 1e-9)


@check("trajectory.phase_chaining", "consecutive phases meet")
def _chaining(ctx):
    worst = 0.0
    for inst in ctx.instances():
        for tr in inst.trajectories:
            for a, b in zip(tr.phases, tr.phases[1:]):
                worst = max(worst, a.end_point.dist(b.start_point))
    return _result("trajectory.phase_chaining", worst, CHAIN_TOL)


@check("trajectory.coverage_complete", "the whole circle gets searched")
def _coverage(ctx):
    worst = max(inst.coverage.uncovered_measure for inst in ctx.instances())
    return _result("trajectory.coverage_complete", worst, 1e-6)


@check("trajectory.coverage_partition", "first-visit arcs add up to the full circle")
def _partition(ctx):
    worst = 0.0
    for inst in ctx.instances():
        total = sum(a.hi - a.lo for a in inst.coverage.arcs)
        worst = max(worst, abs(total - TWO_PI))
    return _result("trajectory.coverage_partition", worst, 1e-6)


# ---------------------------------------------------------------- cost


def _smooth_times(inst, n):
    cuts = sorted({c for tr in inst.trajectories for c in tr.boundaries()})
    t_end = inst.search_time
    ts = np.linspace(0.05, t_end, n)
    keep = [t for t in ts if all(abs(t - c) > 1e-4 for c in cuts)]
    return keep


@check("cost.distance_rate", "separation rate matches finite differences")
def _rate(ctx):
    worst = 0.0
    h = 1e-6
    for inst in ctx.instances():
        q = inst.queen
        for s in inst.servants:
            for t in _smooth_times(inst, 300):
                if q.position_at(t).dist(s.position_at(t)) < 1e-3:
                    continue
                fd = (q.position_at(t + h).dist(s.position_at(t + h)) - q.position_at(t - h).dist(s.position_at(t - h))) / (2 * h)
                worst = max(worst, abs(distance_rate(s, q, t) - fd))
    return _result("cost.distance_rate", worst, 1e-4)


@check("cost.rate_sign", "cost grows exactly when 1 - cos(phi) - cos(theta) > 0")
def _rate_sign(ctx):
    bad = 0
    h = 1e-6
    for inst in ctx.instances():
        q = inst.queen
        for s in inst.servants:
            for t in _smooth_times(inst, 300):
                if q.position_at(t).dist(s.position_at(t)) < 1e-3:
                    continue
                ang = critical_angles(s, q, t)
                if ang.flagged:
                    continue
                g = 1 - math.cos(ang.phi) - math.cos(ang.theta)
                if abs(g) < 1e-6:
                    continue
                fd = ((t + h + q.position_at(t + h).dist(s.position_at(t + h))) - (t - h + q.position_at(t - h).dist(s.position_at(t - h)))) / (2 * h)
                if abs(fd) > 1e-6 and (fd > 0) != (g > 0):
                    bad += 1
    return _result("cost.rate_sign", bad, 0, "sign mismatches")


@check("cost.supremum_dominates", "worst case bounds every exit placement")
def _sup(ctx):
    worst = -math.inf
    for fam in ("search1", "search2", "search3", "nsearch3"):
        inst, rep = ctx.instance(fam), ctx.report(fam)
        for phi in np.linspace(0, TWO_PI, 721, endpoint=False):
            worst = max(worst, cost_if_found(inst, float(phi)) - rep.cost)
    return _result("cost.supremum_dominates", worst, 1e-9)


@check("cost.search1_monotone", "one-servant cost rises while the queen sweeps and falls on her chord")
def _monotone(ctx):
    a, b = ctx.alpha0_beta0()
    inst = ctx.instance("search1")
    q, s = inst.queen, inst.servants[0]
    t_turn = 1 + math.pi - a
    t_chord = t_turn + 2 * math.sin(b / 2)
    t_stop = 1 + math.pi + a - b

    def f(t):
        return t + q.position_at(t).dist(s.position_at(t))

    rise = np.arange(1.0, t_turn, 1e-3)
    fall = np.arange(t_turn, min(t_chord, t_stop), 1e-3)
    v1 = np.array([f(t) for t in rise])
    v2 = np.array([f(t) for t in fall])
    viol = max(float(np.max(v1[:-1] - v1[1:], initial=0)), float(np.max(v2[1:] - v2[:-1], initial=0)))
    return _result("cost.search1_monotone", viol, 1e-12)


@check("cost.symmetric_distances", "on the symmetry line the queen is equidistant from servants 1 and 2")
def _symmetric(ctx):
    worst = 0.0
    for fam in ("search2", "search3", "nsearch3"):
        inst = ctx.instance(fam)
        q, s1, s2 = inst.queen, inst.servants[0], inst.servants[1]
        p = REFERENCE_PARAMS[fam]
        th = p["alpha"] / 2 if fam == "search2" else (p["alpha"] + p["beta"]) / 2
        axis = unit_point(-th)
        # the last moving phase runs along the symmetry line
        k = len(q.phases) - (2 if isinstance(q.phases[-1], Wait) else 1)
        a, b = q.starts[k], q.starts[k] + q.phases[k].duration
        for t in np.linspace(a, b, 200):
            p = q.position_at(t)
            if abs(axis.cross(p)) > 1e-9:
                continue
            worst = max(worst, abs(p.dist(s1.position_at(t)) - p.dist(s2.position_at(t))))
    return _result("cost.symmetric_distances", worst, 1e-9)


# ---------------------------------------------------------------- algorithms


@check("algorithms.preconditions", "all feasibility conditions hold at the reference parameters")
def _pre(ctx):
    failed = [c.name for inst in ctx.instances() for c in inst.validity if not c.ok]
    return _result("algorithms.preconditions", len(failed), 0, ", ".join(failed))


@check("algorithms.search1_servant_first", "the servant finishes before the queen at the optimum")
def _servant_first(ctx):
    inst = ctx.instance("search1")
    gap = inst.info["servant_finish"] - inst.info["queen_finish"]
    return _result("algorithms.search1_servant_first", gap, 0.0, strict=True)


@check("algorithms.nsearch3_plateau", "cost stays flat along the cost-preserving curve")
def _plateau(ctx):
    inst = ctx.instance("nsearch3")
    sol = inst.info["ode"]
    s1 = inst.servants[0]
    ts = np.linspace(sol.tau0, sol.tau1, 2001)
    d = inst.queen.positions(ts) - s1.positions(ts)
    res = float(np.max(np.abs(ts + np.hypot(d[:, 0], d[:, 1]) - sol.preserved_cost)))
    return _result("algorithms.nsearch3_plateau", res, 1e-4)


@check("algorithms.nsearch3_degenerates", "a zero-length curve reproduces the three-servant sweep")
def _degenerate(ctx):
    p = REFERENCE_PARAMS["search3"]
    a, b, r = p["alpha"], p["beta"], p["rho"]
    ref = build_search3(a, b, r)
    k_arrival = 1 + a + Point2(-1.0, 0.0).dist(k_point((a + b) / 2, r))
    ns = build_nsearch3(a, b, r, tau0=k_arrival)
    ts = np.linspace(0, ref.search_time, 5001)
    worst = 0.0
    for x, y in zip(ref.trajectories, ns.trajectories):
        d = x.positions(ts) - y.positions(ts)
        worst = max(worst, float(np.max(np.hypot(d[:, 0], d[:, 1]))))
    return _result("algorithms.nsearch3_degenerates", worst, 1e-9)


# ---------------------------------------------------------------- ode


def _ode_motion(ctx):
    return ctx.instance("nsearch3").info["ode"]


@check("ode.plateau", "integrated samples keep the cost constant")
def _ode_plateau(ctx):
    inst = ctx.instance("nsearch3")
    res = inst.info["ode"].plateau_residual(inst.servants[0])
    return _result("ode.plateau", res, 1e-5)


@check("ode.step_refinement", "halving the step shrinks the plateau error at least 8x")
def _ode_order(ctx):
    inst = ctx.instance("nsearch3")
    sol = inst.info["ode"]
    s1 = inst.servants[0]
    q0 = Point2(*sol.p[0])
    line = (Point2(0.0, 0.0), unit_point(-(REFERENCE_PARAMS["nsearch3"]["alpha"] + REFERENCE_PARAMS["nsearch3"]["beta"]) / 2))
    v0 = Point2(*sol.v[0])
    errs = []
    for h in (0.04, 0.02):
        s = integrate_cost_preserving(s1, q0, sol.tau0, line, sol.tau0 + 2, h, v0)
        errs.append(s.plateau_residual(s1))
    ratio = errs[0] / max(errs[1], 1e-300)
    return _result("ode.step_refinement", ratio, 8.0, f"residuals {errs[0]:.3g} -> {errs[1]:.3g}", at_least=True)


@check("ode.unit_speed", "consecutive samples are one time unit apart per unit length")
def _ode_speed(ctx):
    sol = _ode_motion(ctx)
    dp = np.diff(sol.p, axis=0)
    dt = np.diff(sol.t)
    mask = dt > 1e-9
    sp = np.hypot(dp[mask, 0], dp[mask, 1]) / dt[mask]
    return _result("ode.unit_speed", float(np.max(np.abs(sp - 1))), 1e-5)


@check("ode.branch_continuity", "the heading never jumps between samples")
def _ode_branch(ctx):
    sol = _ode_motion(ctx)
    v = sol.v
    ang = np.arctan2(v[:-1, 0] * v[1:, 1] - v[:-1, 1] * v[1:, 0], np.sum(v[:-1] * v[1:], axis=1))
    worst = float(np.max(np.abs(ang)))
    return _result("ode.branch_continuity", worst, 10 * ctx.ode_step)


@check("ode.smooth_junction", "the queen does not turn when preservation starts")
def _ode_junction(ctx):
    inst = ctx.instance("nsearch3")
    sol = inst.info["ode"]
    i = inst.queen.phase_index(sol.tau0) - 1
    before = inst.queen.phases[i].velocity(inst.queen.phases[i].duration)
    after = Point2(*sol.v[0])
    jump = math.acos(max(-1.0, min(1.0, before.dot(after))))
    return _result("ode.smooth_junction", jump, 1e-5)


# ---------------------------------------------------------------- bounds


@check("bounds.residuals", "every solved system satisfies its equations")
def _residuals(ctx):
    worst = max(s.max_residual for s in (bounds.solve_alpha0(), bounds.solve_lb2(), bounds.solve_lb3()))
    return _result("bounds.residuals", worst, 1e-12)


@check("bounds.dtheta", "the far arc grows at rate above 2, and above 3 far from the point")
def _dtheta(ctx):
    T = bounds.solve_lb2()["T"]
    ts = np.linspace(T - 2, T, 10002)[1:-1]
    viol = 0
    lim3 = T - 2 / 3 * math.sqrt(5)
    for t in ts:
        r = bounds.dtheta_dt(float(t), T)
        if r <= 2 or bounds.dtheta_dT(float(t), T) >= -2 or (t < lim3 and r <= 3):
            viol += 1
    return _result("bounds.dtheta", viol, 0, f"{len(ts)} samples")


@check("bounds.implicit_derivative", "dt/dT of the implicit finish-time relation is at least 1/2")
def _implicit(ctx):
    worst = math.inf
    h = 1e-6
    for alpha in np.linspace(0.1, 1.0, 10):
        for T in np.linspace(3.0, 3.6, 10):
            t = bounds.implicit_t(float(T), float(alpha))
            if t <= float(alpha):
                continue
            fd = (bounds.implicit_t(T + h, alpha) - bounds.implicit_t(T - h, alpha)) / (2 * h)
            worst = min(worst, fd)
    return _result("bounds.implicit_derivative", worst, 0.5 - 1e-9, at_least=True)


@check("bounds.ordering", "three-servant bound < two-servant bound < one-servant bound")
def _ordering(ctx):
    t3, t2, h = bounds.solve_lb3()["T"], bounds.solve_lb2()["T"], bounds.hexagon_lower_bound()
    return _result("bounds.ordering", max(t3 - t2, t2 - h), 0.0, strict=True)


@check("bounds.sandwich", "each lower bound sits below the achieved cost")
def _sandwich(ctx):
    lbs = {1: bounds.hexagon_lower_bound(), 2: bounds.solve_lb2()["T"], 3: bounds.solve_lb3()["T"]}
    ubs = {1: ctx.report("search1").cost, 2: ctx.report("search2").cost, 3: ctx.report("nsearch3").cost}
    gap = max(lbs[n] - ubs[n] for n in (1, 2, 3))
    return _result("bounds.sandwich", gap, 0.0, strict=True)


# ---------------------------------------------------------------- optimizer


@check("optimizer.search1_balance", "the three one-servant worst cases coincide at the optimum")
def _balance(ctx):
    r = search1_balance_residuals(*ctx.alpha0_beta0())
    return _result("optimizer.search1_balance", max(abs(x) for x in r), 1e-6)


@check("optimizer.zero_box_identity", "a zero-radius search returns its seed")
def _identity(ctx):
    a, b = ctx.alpha0_beta0()
    res = optimize("search1", {"alpha": a, "beta": b}, 0.0)
    drift = max(abs(res.params["alpha"] - a), abs(res.params["beta"] - b), abs(res.cost - ctx.report("search1").cost))
    return _result("optimizer.zero_box_identity", drift, 1e-12)


def run_checks(ctx: Context | None = None, names=None) -> list[CheckResult]:
    ctx = ctx or Context()
    out = []
    for name, (_, fn) in REGISTRY.items():
        if names is not None and name not in names:
            continue
        try:
            out.append(fn(ctx))
        except Exception as exc:  # a crashing check is a failing check
            out.append(CheckResult(name, False, math.nan, math.nan, f"{type(exc).__name__}: {exc}"))
    return out
