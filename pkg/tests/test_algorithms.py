import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from priority_evac.algorithms import (
    FAMILIES,
    REFERENCE_PARAMS,
    SERVANTS,
    InfeasibleError,
    build,
    build_nsearch3,
    build_search1,
    build_search2,
    build_search3,
)
from priority_evac.bounds import solve_alpha0
from priority_evac.cost import cost_if_found, evacuation_cost
from priority_evac.geometry import Point2, k_point, unit_point
from priority_evac.trajectory import verify_unit_speed

A0 = solve_alpha0()


@pytest.fixture(scope="module")
def nsearch3():
    return build("nsearch3", REFERENCE_PARAMS["nsearch3"])


def test_search1_optimum_and_chord_phase():
    inst = build_search1(A0["alpha0"], A0["beta0"])
    assert evacuation_cost(inst).cost == pytest.approx(4.81854, abs=1e-3)
    chord = inst.queen.phases[2]
    assert chord.duration == pytest.approx(2 * math.sin(A0["beta0"] / 2), abs=1e-15)
    assert chord.duration == pytest.approx(0.89310, abs=1e-4)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1.5), st.floats(0, 1.5))
def test_search1_search_time_formula(a, b):
    try:
        inst = build_search1(a, b)
    except InfeasibleError:
        return
    expect = 1 + math.pi + max(a - b, 2 * math.sin(b / 2) + b - a)
    assert inst.search_time == pytest.approx(expect, abs=1e-9)


def test_search1_servant_finishes_first_at_optimum():
    inst = build_search1(A0["alpha0"], A0["beta0"])
    assert inst.info["servant_finish"] < inst.info["queen_finish"]


def test_search2_reference_run():
    p = REFERENCE_PARAMS["search2"]
    inst = build_search2(p["alpha"], p["rho"])
    assert inst.info["queen_arrival"] == pytest.approx(3.6174, abs=1e-3)
    assert inst.search_time == pytest.approx(3.82354, abs=1e-3)
    assert evacuation_cost(inst).cost == pytest.approx(3.8327, abs=1e-3)
    a = p["alpha"]
    # exit found by S1 just as the queen finishes her arc
    assert cost_if_found(inst, math.pi - 2 * a) == pytest.approx(1 + a + 2 * math.sin(a), abs=1e-12)
    assert 1 + a + 2 * math.sin(a) == pytest.approx(2.82423, abs=1e-4)


def test_search2_infeasible_parameters_named():
    with pytest.raises(InfeasibleError) as exc:
        build_search2(3.0, 0.1)
    assert exc.value.condition == "queen_reaches_meeting_point_first"
    a, rho = 3.0, 0.1
    ak = Point2(-1, 0).dist(k_point(a / 2, rho))
    assert math.pi - a / 2 < a + ak + 2 - 2 * rho


def test_search3_reference_run():
    inst = build("search3", REFERENCE_PARAMS["search3"])
    rep = evacuation_cost(inst)
    assert rep.cost == pytest.approx(3.37882, abs=1e-3)
    assert inst.search_time == pytest.approx(3.36045, abs=1e-4)
    times = [m.discovery_time for m in rep.near_maximizers(1e-4)]
    assert any(abs(t - 2.34029) < 1e-2 for t in times)
    assert any(abs(t - 2.84758) < 1e-2 for t in times)


def test_search3_arc_attribution():
    p = REFERENCE_PARAMS["search3"]
    a = p["alpha"]
    inst = build("search3", p)
    # the queen alone searches [pi - alpha, pi]
    _, who = inst.coverage.first_visit(math.pi - a / 2)
    assert who == 0


@pytest.mark.parametrize(
    "params, condition",
    [
        ((0.5, 0.4, 0.7), "queen_search_ends_before_s3"),
        ((0.1, 2.5, 0.7), "s3_done_during_approach"),
        ((1.2, 1.2, 0.1), "queen_reaches_meeting_point_first"),
    ],
)
def test_search3_conditions(params, condition):
    with pytest.raises(InfeasibleError) as exc:
        build_search3(*params)
    assert exc.value.condition == condition


def test_nsearch3_reference_run(nsearch3):
    info = nsearch3.info
    assert info["tau0"] == pytest.approx(2.32641, abs=1e-3)
    assert info["tau0"] - 1 - REFERENCE_PARAMS["nsearch3"]["alpha"] == pytest.approx(1.04877, abs=1e-3)
    assert nsearch3.search_time == pytest.approx(3.35358, abs=1e-4)
    assert info["queen_arrival"] == pytest.approx(3.18073, abs=1e-3)
    assert info["preserved_cost"] == pytest.approx(3.37387, abs=1e-4)
    assert all(c.ok for c in nsearch3.validity)


def test_nsearch3_second_crossing_matches_published_event():
    inst = build_nsearch3(**REFERENCE_PARAMS["nsearch3"], crossing=2)
    assert inst.info["tau1"] == pytest.approx(2.89288, abs=1e-4)
    k1 = inst.info["k1"]
    assert k1.dist(Point2(0.5022, -0.5049)) < 1e-3
    assert inst.info["queen_arrival"] == pytest.approx(3.18073, abs=1e-4)


def test_nsearch3_k1_is_equidistant(nsearch3):
    t1, k1 = nsearch3.info["tau1"], nsearch3.info["k1"]
    s1, s2 = nsearch3.servants[0], nsearch3.servants[1]
    assert abs(k1.dist(s1.position_at(t1)) - k1.dist(s2.position_at(t1))) <= 1e-6


def test_nsearch3_forced_start_is_search3():
    p = REFERENCE_PARAMS["search3"]
    ref = build_search3(**p)
    t_k = 1 + p["alpha"] + Point2(-1, 0).dist(k_point((p["alpha"] + p["beta"]) / 2, p["rho"]))
    ns = build_nsearch3(**p, tau0=t_k)
    for t in (0.5, 1.2, 2.0, 2.7, 3.1, 3.3):
        for x, y in zip(ref.trajectories, ns.trajectories):
            assert x.position_at(t).dist(y.position_at(t)) <= 1e-9


def test_all_reference_builds_are_sound(nsearch3):
    insts = [build_search1(A0["alpha0"], A0["beta0"]), nsearch3] + [
        build(f, REFERENCE_PARAMS[f]) for f in ("search2", "search3")
    ]
    for inst in insts:
        assert len(inst.servants) == SERVANTS[inst.family]
        assert inst.coverage.uncovered_measure <= 1e-6
        assert all(c.ok for c in inst.validity)
        for tr in inst.trajectories:
            assert verify_unit_speed(tr) <= 1e-5
            assert tr.position_at(0.0) == Point2(0.0, 0.0)


def test_build_rejects_unknown_family_and_arity():
    with pytest.raises(ValueError):
        build("search4", {"alpha": 0.1})
    with pytest.raises(ValueError):
        build("search2", {"alpha": 0.1})
    assert set(FAMILIES) == {"search1", "search2", "search3", "nsearch3"}


def test_deploy_lines_reach_the_circle():
    inst = build("search3", REFERENCE_PARAMS["search3"])
    for tr in inst.trajectories:
        assert abs(tr.position_at(1.0).norm() - 1) < 1e-12
    p = REFERENCE_PARAMS["search3"]
    base = math.pi - p["alpha"] - p["beta"]
    assert inst.servants[0].position_at(1.0).dist(unit_point(base)) < 1e-12
