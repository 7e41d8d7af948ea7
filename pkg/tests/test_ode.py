import math

import numpy as np
import pytest

from priority_evac.algorithms import REFERENCE_PARAMS, build
from priority_evac.geometry import ORIGIN, Point2, unit_point
from priority_evac.ode import (
    EventNotFound,
    HypothesisViolated,
    cost_preserving_velocity,
    integrate_cost_preserving,
)
from priority_evac.trajectory import ArcMotion, LineMotion, Trajectory


def straight(a: Point2, b: Point2) -> Trajectory:
    return Trajectory((LineMotion(a, b),), start=a)


@pytest.fixture(scope="module")
def nsearch3():
    return build("nsearch3", REFERENCE_PARAMS["nsearch3"])


def test_perpendicular_servant_means_head_straight_at_it():
    s = straight(Point2(1, -1), Point2(1, 1))  # moving up, queen at the origin-left
    v = cost_preserving_velocity(Point2(0, 0), s, 1.0, Point2(0, 1))
    assert v.dist(Point2(1, 0)) < 1e-12


def test_oncoming_servant_means_sidestep():
    s = straight(Point2(2, 0), Point2(0.5, 0))
    up = cost_preserving_velocity(Point2(0, 0), s, 0.2, Point2(0, 1))
    down = cost_preserving_velocity(Point2(0, 0), s, 0.2, Point2(0, -1))
    assert up.dist(Point2(0, 1)) < 1e-12
    assert down.dist(Point2(0, -1)) < 1e-12


def test_receding_servant_is_rejected():
    s = straight(Point2(1, 0), Point2(2, 0))
    with pytest.raises(HypothesisViolated):
        cost_preserving_velocity(Point2(0, 0), s, 0.5, Point2(1, 0))


def test_oncoming_servant_plateau():
    s = straight(Point2(3, 0), Point2(-3, 0))
    far = (Point2(0, 5), Point2(1, 5))  # never reached
    with pytest.raises(EventNotFound):
        integrate_cost_preserving(s, Point2(0, 0), 0.0, far, 0.5, 1e-3, Point2(0, 1))
    # integrate by hand to a horizontal line above the start instead
    sol = integrate_cost_preserving(s, Point2(0, 0), 0.0, (Point2(0, 0.3), Point2(1, 0.3)), 1.0, 1e-3, Point2(0, 1))
    assert sol.plateau_residual(s) <= 1e-6
    assert sol.k1.y == pytest.approx(0.3, abs=1e-9)
    speeds = np.hypot(*np.diff(sol.p, axis=0).T) / np.diff(sol.t)
    assert np.max(np.abs(speeds - 1)) < 1e-5


def test_step_must_be_positive():
    s = straight(Point2(3, 0), Point2(-3, 0))
    with pytest.raises(ValueError):
        integrate_cost_preserving(s, ORIGIN, 0.0, (Point2(0, 1), Point2(1, 1)), 1.0, 0.0)


def test_reference_solution_invariants(nsearch3):
    sol = nsearch3.info["ode"]
    s1, s2 = nsearch3.servants[0], nsearch3.servants[1]
    assert sol.plateau_residual(s1) <= 1e-5
    assert np.max(np.abs(np.hypot(*sol.v.T) - 1)) <= 1e-6
    assert sol.preserved_cost == pytest.approx(3.37387, abs=1e-3)
    k1, t1 = sol.k1, sol.tau1
    assert abs(k1.dist(s1.position_at(t1)) - k1.dist(s2.position_at(t1))) <= 1e-6


def test_junction_is_smooth(nsearch3):
    sol = nsearch3.info["ode"]
    approach = nsearch3.queen.phases[2]
    assert isinstance(approach, LineMotion)
    v = cost_preserving_velocity(Point2(*sol.p[0]), nsearch3.servants[0], sol.tau0, approach.direction)
    assert v.dist(approach.direction) <= 1e-6


def test_halving_step_shrinks_error(nsearch3):
    sol = nsearch3.info["ode"]
    s1 = nsearch3.servants[0]
    theta = sum(REFERENCE_PARAMS["nsearch3"][k] for k in ("alpha", "beta")) / 2
    line = (ORIGIN, unit_point(-theta))
    errs = []
    for h in (0.04, 0.02):
        s = integrate_cost_preserving(s1, Point2(*sol.p[0]), sol.tau0, line, 4.0, h, Point2(*sol.v[0]))
        errs.append(s.plateau_residual(s1))
    assert errs[0] / errs[1] >= 8


def test_no_branch_flips(nsearch3):
    sol = nsearch3.info["ode"]
    v = sol.v
    turn = np.abs(np.arctan2(v[:-1, 0] * v[1:, 1] - v[:-1, 1] * v[1:, 0], np.sum(v[:-1] * v[1:], axis=1)))
    assert turn.max() <= 10 * nsearch3.info["ode_step"]


def test_start_on_line_returns_immediately():
    s = Trajectory((LineMotion(ORIGIN, Point2(-1, 0)), ArcMotion(math.pi, -1, 1.0)))
    sol = integrate_cost_preserving(s, Point2(0.5, 0.0), 1.2, (ORIGIN, Point2(1, 0)), 2.0, 1e-3)
    assert sol.tau1 == sol.tau0 == 1.2


def test_crossing_must_be_positive():
    s = straight(Point2(3, 0), Point2(-3, 0))
    with pytest.raises(ValueError):
        integrate_cost_preserving(s, ORIGIN, 0.0, (Point2(0, 1), Point2(1, 1)), 1.0, 1e-3, crossing=0)


def test_second_crossing_of_the_equidistance_line():
    inst = build("nsearch3", REFERENCE_PARAMS["nsearch3"], crossing=2)
    sol = inst.info["ode"]
    assert sol.tau1 == pytest.approx(2.89288, abs=1e-4)
    assert sol.k1.x == pytest.approx(0.50225, abs=1e-4)
    assert sol.k1.y == pytest.approx(-0.50488, abs=1e-4)
    assert inst.info["queen_arrival"] == pytest.approx(3.18073, abs=1e-4)
