import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from priority_evac.geometry import ORIGIN, TWO_PI, DomainError, Point2, unit_point
from priority_evac.trajectory import (
    ArcMotion,
    CoverageError,
    DegenerateSegmentError,
    LineMotion,
    SampledMotion,
    Trajectory,
    Wait,
    coverage,
    export_csv_rows,
    verify_unit_speed,
)


def sweep(start, sigma, length):
    """Deploy to ``unit_point(start)`` and sweep ``length`` radians."""
    return Trajectory((LineMotion(ORIGIN, unit_point(start)), ArcMotion(start, sigma, length)))


def test_phase_lookup_is_right_continuous():
    tr = sweep(0.0, 1, 1.0)
    assert tr.phase_index(0.999) == 0
    assert tr.phase_index(1.0) == 1
    assert tr.velocity_at(1.0).dist(Point2(0, 1)) < 1e-15
    assert tr.duration == pytest.approx(2.0)


def test_stationary_after_last_phase():
    tr = sweep(0.0, 1, 1.0)
    assert tr.position_at(5.0) == tr.final_point
    assert tr.velocity_at(5.0) == ORIGIN
    assert tr.final_point.dist(unit_point(1.0)) < 1e-15


def test_chaining_mismatch_rejected():
    with pytest.raises(ValueError):
        Trajectory((LineMotion(ORIGIN, Point2(1, 0)), ArcMotion(0.5, 1, 1.0)))


def test_degenerate_line_rejected():
    with pytest.raises(DegenerateSegmentError):
        LineMotion(Point2(0.2, 0.2), Point2(0.2, 0.2))


def test_negative_durations_rejected():
    with pytest.raises(DomainError):
        ArcMotion(0.0, 1, -1.0)
    with pytest.raises(DomainError):
        Wait(ORIGIN, -0.1)


def test_vectorized_positions_match_scalar():
    tr = Trajectory((LineMotion(ORIGIN, Point2(-1, 0)), ArcMotion(math.pi, -1, 2.0), Wait(unit_point(math.pi - 2), 0.5)))
    ts = np.linspace(0, 4, 97)
    vec = tr.positions(ts)
    for t, p in zip(ts, vec):
        assert Point2(*p).dist(tr.position_at(float(t))) < 1e-14


@settings(max_examples=50, deadline=None)
@given(st.floats(0, TWO_PI), st.sampled_from([-1, 1]), st.floats(0.01, 7), st.floats(0, 8), st.floats(1e-6, 1e-2))
def test_robots_never_exceed_unit_speed(b, sigma, d, t, eps):
    tr = sweep(b, sigma, d)
    assert tr.position_at(t + eps).dist(tr.position_at(t)) <= eps * (1 + 1e-9)


def test_unit_speed_of_sampled_circle():
    ts = np.linspace(0, 1, 201)
    p = np.column_stack([np.cos(ts), np.sin(ts)])
    v = np.column_stack([-np.sin(ts), np.cos(ts)])
    m = SampledMotion(ts, p, v)
    tr = Trajectory((LineMotion(ORIGIN, Point2(1, 0)), m))
    assert verify_unit_speed(tr) < 1e-5
    # hermite interpolation between samples is accurate to ~h^4
    assert m.position(0.5025).dist(unit_point(0.5025)) < 1e-10


def test_sampled_motion_needs_increasing_times():
    with pytest.raises(ValueError):
        SampledMotion([0.0, 0.0], [[0, 0], [0, 0]], [[1, 0], [1, 0]])


def test_two_opposite_sweeps_cover_circle():
    q, s = sweep(math.pi, 1, math.pi), sweep(math.pi, -1, math.pi)
    cov = coverage([q, s])
    assert cov.uncovered_measure == 0
    assert cov.search_time == pytest.approx(1 + math.pi)
    assert sum(a.hi - a.lo for a in cov.arcs) == pytest.approx(TWO_PI)
    t, who = cov.first_visit(math.pi / 2)
    assert who == 1 and t == pytest.approx(1 + math.pi / 2)
    t, who = cov.first_visit(-math.pi / 2)
    assert who == 0 and t == pytest.approx(1 + math.pi / 2)


def test_tie_goes_to_queen():
    q, s = sweep(math.pi, 1, math.pi), sweep(math.pi, -1, math.pi)
    t, who = coverage([q, s]).first_visit(0.0)
    assert who == 0 and t == pytest.approx(1 + math.pi)


def test_gap_is_reported():
    q, s = sweep(math.pi, 1, 2.0), sweep(math.pi, -1, 2.0)
    with pytest.raises(CoverageError) as exc:
        coverage([q, s])
    assert exc.value.condition == "full_coverage"
    assert sum(a.length for a in exc.value.unsearched) == pytest.approx(TWO_PI - 4)
    assert coverage([q, s], strict=False).uncovered_measure == pytest.approx(TWO_PI - 4)


def test_revisits_do_not_count():
    # the second robot retraces the first one's arc later, then finishes the circle
    q = sweep(0.0, 1, math.pi)
    s = sweep(0.0, 1, TWO_PI)
    cov = coverage([q, s])
    assert cov.intervals[0] == [(1.0, 1 + math.pi)]
    assert cov.intervals[1] == [pytest.approx((1 + math.pi, 1 + TWO_PI))]


@settings(max_examples=30, deadline=None)
@given(st.floats(0, TWO_PI), st.floats(0, TWO_PI))
def test_first_visit_matches_brute_force(b1, b2):
    q, s = sweep(b1, 1, TWO_PI), sweep(b2, -1, TWO_PI)
    cov = coverage([q, s])
    def offset(d):
        d %= TWO_PI
        return 0.0 if d > TWO_PI - 1e-9 else d

    for phi in np.linspace(0, TWO_PI, 37, endpoint=False):
        t1 = 1 + offset(phi - b1)
        t2 = 1 + offset(b2 - phi)
        t, _ = cov.first_visit(float(phi))
        assert t == pytest.approx(min(t1, t2), abs=1e-9)


def test_csv_rows_and_format():
    tr = sweep(0.0, 1, 1.0)
    rows = export_csv_rows([tr, tr], ["Q", "S1"], 2.0, 0.3)
    assert rows[0] == "robot,t,x,y"
    n = math.ceil(2.0 / 0.3) + 1
    assert len(rows) == 1 + 2 * n
    assert rows[1] == "Q,0,0,0"
    assert rows[n + 1].startswith("S1,0,")
    last = rows[n].split(",")
    assert float(last[1]) == pytest.approx(2.1)


def test_integer_coordinates_sample_as_floats():
    s = Trajectory((LineMotion(Point2(3, 0), Point2(-3, 0)),), start=Point2(3, 0))
    assert s.positions([0.5])[0, 0] == 2.5
