import math

import numpy as np
import pytest

from priority_evac import bounds
from priority_evac.algorithms import REFERENCE_PARAMS, build
from priority_evac.cost import evacuation_cost
from priority_evac.optimizer import (
    NoFeasibleStart,
    PreconditionError,
    nelder_mead,
    optimize,
    search1_balance_residuals,
    search1_class_costs,
)


@pytest.fixture(scope="module")
def search2_opt():
    return optimize("search2", {"alpha": 0.60, "rho": 0.78}, 0.1, 1e-5)


@pytest.fixture(scope="module")
def search3_opt():
    return optimize("search3", {"alpha": 0.25, "beta": 1.30, "rho": 0.70}, 0.1, 1e-6)


def test_nelder_mead_quadratic():
    res = nelder_mead(lambda x: (x[0] - 1) ** 2 + 10 * (x[1] + 2) ** 2, np.zeros(2), 0.5, 1e-9, 5000)
    assert res.x == pytest.approx([1, -2], abs=1e-7)


def test_nelder_mead_avoids_infinite_region():
    def f(x):
        return math.inf if x[0] < 0 else (x[0] - 0.1) ** 2 + x[1] ** 2

    res = nelder_mead(f, np.array([0.5, 0.5]), 0.3, 1e-9, 5000)
    assert res.x == pytest.approx([0.1, 0.0], abs=1e-6)


def test_search2_rediscovers_reference(search2_opt):
    ref = REFERENCE_PARAMS["search2"]
    assert search2_opt.params["alpha"] == pytest.approx(ref["alpha"], abs=5e-3)
    assert search2_opt.params["rho"] == pytest.approx(ref["rho"], abs=5e-3)
    assert search2_opt.cost == pytest.approx(3.8327, abs=1e-3)
    assert search2_opt.converged


def test_search3_rediscovers_reference(search3_opt):
    assert search3_opt.cost == pytest.approx(3.37882, abs=1e-3)


@pytest.mark.parametrize("fixture", ["search2_opt", "search3_opt"])
def test_reported_cost_is_reevaluated(fixture, request):
    res = request.getfixturevalue(fixture)
    assert evacuation_cost(build(res.family, res.params)).cost == pytest.approx(res.cost, abs=1e-10)


@pytest.mark.parametrize("fixture", ["search2_opt", "search3_opt"])
def test_local_optimality_certificate(fixture, request):
    res = request.getfixturevalue(fixture)
    for name in res.params:
        for d in (-1e-3, 1e-3):
            p = dict(res.params)
            p[name] += d
            try:
                c = evacuation_cost(build(res.family, p)).cost
            except Exception:
                continue  # outside the feasible region
            assert c >= res.cost - 1e-5, (name, d)


def test_trace_points_are_evaluated(search2_opt):
    assert len(search2_opt.trace) > 10
    params, cost = search2_opt.trace[-1]
    if math.isfinite(cost):
        assert evacuation_cost(build("search2", params)).cost == pytest.approx(cost, abs=1e-10)
    assert min(c for _, c in search2_opt.trace) == pytest.approx(search2_opt.cost, abs=1e-9)


def test_determinism():
    seed = {"alpha": 0.62, "rho": 0.80}
    a = optimize("search2", seed, 0.02, 1e-4, starts=1)
    b = optimize("search2", seed, 0.02, 1e-4, starts=1)
    assert a.trace == b.trace
    assert a.params == b.params


def test_zero_radius_is_identity():
    s = bounds.solve_alpha0()
    seed = {"alpha": s["alpha0"], "beta": s["beta0"]}
    res = optimize("search1", seed, 0.0, 1e-6)
    assert res.params == seed
    assert res.cost == pytest.approx(s["cost"], abs=1e-8)


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        optimize("search2", REFERENCE_PARAMS["search2"], -0.1, 1e-6)


def test_no_feasible_start():
    with pytest.raises(NoFeasibleStart):
        optimize("search2", {"alpha": 3.0, "rho": 0.1}, 0.01, 1e-6)


def test_trace_csv(tmp_path, search2_opt):
    path = tmp_path / "trace.csv"
    search2_opt.write_trace_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0] == "iter,alpha,rho,cost"
    assert len(rows) == len(search2_opt.trace) + 1
    assert rows[1].startswith("0,")


def test_balance_at_optimum():
    s = bounds.solve_alpha0()
    r = search1_balance_residuals(s["alpha0"], s["beta0"])
    assert r == pytest.approx((0, 0), abs=1e-6)
    assert search1_class_costs(s["alpha0"], s["beta0"])[1] == pytest.approx(4.81854, abs=1e-4)


def test_balance_closed_form():
    rng = np.random.default_rng(7)
    n = 0
    while n < 20:
        a, b = rng.uniform(1.05, 1.5), rng.uniform(0.3, 1.4)
        try:
            r0, _ = search1_balance_residuals(a, b)
        except PreconditionError:
            continue
        n += 1
        assert r0 == pytest.approx(2 * (math.sin(b / 2) + b / 2 - math.sin(a)), abs=1e-12)


@pytest.mark.parametrize(
    "alpha, beta, condition",
    [
        (0.9, 0.5, "alpha_above_pi_over_3"),
        (1.5, 0.01, "servant_approaching"),
        (1.06, 0.3, "queen_turns_in_time"),
    ],
)
def test_balance_preconditions(alpha, beta, condition):
    with pytest.raises(PreconditionError) as err:
        search1_balance_residuals(alpha, beta)
    assert err.value.condition == condition
