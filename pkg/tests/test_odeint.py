import math

import numpy as np
import pytest

from fhn_bifurc import FhnParams, PlanarField, Stage, integrate, next_crossing, Section
from fhn_bifurc.odeint import Crossing, NoReturn, TerminationReason
from fhn_bifurc.vectorfield import UsageError


CENTER = PlanarField(FhnParams())
X_AXIS = Section(anchor=(0.0, 0.0), direction=(1.0, 0.0))


def test_full_rotation_returns_to_start():
    traj = integrate(CENTER, (1.0, 0.0), 2 * math.pi, tol=1e-9)
    assert math.hypot(traj.end[0] - 1.0, traj.end[1]) < 1e-6
    assert traj.reason is TerminationReason.REACHED_T_END


def test_half_rotation():
    traj = integrate(CENTER, (1.0, 0.0), math.pi, tol=1e-9)
    assert math.hypot(traj.end[0] + 1.0, traj.end[1]) < 1e-6


def test_times_strictly_increasing_and_dense_output():
    traj = integrate(CENTER, (1.0, 0.0), 2 * math.pi, tol=1e-9)
    assert np.all(np.diff(traj.times) > 0)
    p = traj.at(math.pi / 2)
    assert math.hypot(p[0], p[1] - 1.0) < 1e-8


def test_halving_tol_reduces_error():
    errs = []
    for tol in (1e-6, 5e-7, 1e-7, 5e-8):
        traj = integrate(CENTER, (1.0, 0.0), 2 * math.pi, tol=tol)
        errs.append(math.hypot(traj.end[0] - 1.0, traj.end[1]))
    assert errs[0] / errs[1] >= 2.0
    assert errs[2] / errs[3] >= 2.0


def test_long_lienard_run_bounded_and_matches_rk4_oracle(rk4_oracle):
    field = PlanarField(FhnParams(a=-0.1, b=0.0, c=1.0), Stage.LIENARD)
    traj = integrate(field, (3.0, 0.0), 50.0, tol=1e-10)
    assert traj.reason is TerminationReason.REACHED_T_END
    assert np.hypot(traj.states[:, 0], traj.states[:, 1]).max() < 10.0
    ox, oy = rk4_oracle(field.rhs, (3.0, 0.0), 50.0, 1e-4)
    assert math.hypot(traj.end[0] - ox, traj.end[1] - oy) < 1e-6


def test_backward_time_supported():
    field = PlanarField(FhnParams(a=-0.1, b=0.0, c=1.0), Stage.LIENARD)
    fwd = integrate(field, (0.3, 0.0), 1.0, tol=1e-11)
    back = integrate(field, fwd.end, 1.0, tol=1e-11, backward=True)
    assert math.hypot(back.end[0] - 0.3, back.end[1]) < 1e-8


def test_escape_radius_termination():
    field = PlanarField(FhnParams(a=-0.1, b=0.0, c=1.0), Stage.LIENARD)
    traj = integrate(field, (5.0, 0.0), 50.0, tol=1e-8, backward=True,
                     escape_radius=1e3)
    assert traj.reason is TerminationReason.ESCAPED_RADIUS


def test_invalid_arguments():
    with pytest.raises(UsageError):
        integrate(CENTER, (1.0, 0.0), -1.0)
    with pytest.raises(UsageError):
        integrate(CENTER, (1.0, 0.0), 1.0, tol=0.0)


def test_crossing_of_linear_center():
    cr = next_crossing(CENTER, X_AXIS, (0.5, 0.0), 50.0)
    assert isinstance(cr, Crossing)
    assert abs(cr.time - 2 * math.pi) < 1e-9
    assert abs(cr.s - 0.5) < 1e-9
    assert abs(X_AXIS.offset_of(cr.point)) <= 1e-10


def test_crossing_twice_reproduces_cycle_point(two_cycle_fixture):
    field = PlanarField(two_cycle_fixture["params"])
    s0 = two_cycle_fixture["s_outer"]
    cr1 = next_crossing(field, X_AXIS, (s0, 0.0), 400.0, tol=1e-11)
    cr2 = next_crossing(field, X_AXIS, cr1.point, 400.0, tol=1e-11)
    assert math.hypot(cr2.point[0] - cr1.point[0],
                      cr2.point[1] - cr1.point[1]) < 1e-8


def test_stable_focus_spiral_gives_decreasing_s():
    # a > gamma on the Lienard stage makes the origin attracting
    field = PlanarField(FhnParams(a=0.3, b=0.0, c=1.0), Stage.LIENARD)
    s = 0.4
    values = []
    point = (s, 0.0)
    for _ in range(3):
        cr = next_crossing(field, X_AXIS, point, 200.0, tol=1e-10)
        assert isinstance(cr, Crossing)
        values.append(cr.s)
        point = cr.point
    assert values[0] < s and values[1] < values[0] and values[2] < values[1]


def test_start_at_equilibrium_is_no_return():
    res = next_crossing(CENTER, X_AXIS, (0.0, 0.0), 10.0)
    assert isinstance(res, NoReturn)
    assert res.reason == "start_at_equilibrium"


def test_section_normalizes_direction_and_validates():
    sec = Section(anchor=(0.0, 0.0), direction=(3.0, 4.0))
    assert math.hypot(*sec.direction) == pytest.approx(1.0, abs=1e-12)
    assert sec.coord_of(sec.point_at(0.7)) == pytest.approx(0.7, abs=1e-12)
    with pytest.raises(UsageError):
        Section(anchor=(0.0, 0.0), direction=(0.0, 0.0))


def test_section_transversality_measure():
    sec = Section(anchor=(0.0, 0.0), direction=(1.0, 0.0))
    # at (0.5, 0) the harmonic field is (0, 0.5): fully transversal
    assert sec.transversal_speed(CENTER, (0.5, 0.0)) == pytest.approx(0.5)
    # at the anchor the field vanishes: no transversality
    assert sec.transversal_speed(CENTER, (0.0, 0.0)) == 0.0
