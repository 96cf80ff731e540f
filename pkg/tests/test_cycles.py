import math

import numpy as np
import pytest

from fhn_bifurc import (FhnParams, PlanarField, Stage, displacement, find_cycles,
                        complete_cycle, cycle_multiplier, parameter_sensitivity,
                        multiplicity, section_through, Stability)
from fhn_bifurc.cycles import ROOT_TOL
from fhn_bifurc.vectorfield import UsageError

SEC = section_through((0.0, 0.0))
LIENARD = PlanarField(FhnParams(a=-0.1, b=0.0, c=1.0), Stage.LIENARD)


@pytest.fixture(scope="module")
def lienard_cycle():
    res = find_cycles(LIENARD, SEC, 0.05, 3.0, n_scan=14)
    assert len(res) == 1
    return res[0]


def winding_around(orbit, point):
    """Winding number of a closed polyline around a point."""
    d = orbit[:-1] - np.asarray(point)
    ang = np.arctan2(d[:, 1], d[:, 0])
    dth = np.diff(np.append(ang, ang[0]))
    dth = (dth + np.pi) % (2 * np.pi) - np.pi
    return int(round(dth.sum() / (2 * np.pi)))


def test_displacement_zero_on_reversible_center():
    fld = PlanarField(FhnParams(b=1.0), Stage.REVERSIBLE)
    smp = displacement(fld, SEC, 0.3)
    assert smp.returned
    assert abs(smp.d) <= 1e-7


def test_displacement_zero_on_harmonic_center():
    fld = PlanarField(FhnParams())
    for s in (0.2, 0.5, 0.9):
        smp = displacement(fld, SEC, s)
        assert abs(smp.d) < 1e-9


def test_displacement_contracts_outside_lienard_cycle():
    smp = displacement(LIENARD, SEC, 5.0)
    assert smp.returned and smp.d < 0
    assert smp.d == smp.h - smp.s


def test_find_cycles_unique_stable_lienard(lienard_cycle):
    c = lienard_cycle
    assert c.stability is Stability.STABLE
    assert c.multiplier < 0
    assert c.orientation == 1
    # root quality and orbit closure
    assert abs(displacement(LIENARD, SEC, c.s0).d) <= 1e-8
    gap = math.hypot(c.orbit[0, 0] - c.orbit[-1, 0], c.orbit[0, 1] - c.orbit[-1, 1])
    assert gap < 1e-7


def test_find_cycles_reversible_center_reports_continuum():
    fld = PlanarField(FhnParams(b=1.0), Stage.REVERSIBLE)
    res = find_cycles(fld, SEC, 0.1, 0.5, n_scan=9)
    assert res.continuum
    assert len(res) == 0


def test_find_cycles_two_nested_from_fixture(two_cycle_fixture):
    field = PlanarField(two_cycle_fixture["params"])
    res = find_cycles(field, SEC, 0.02, 1.0, n_scan=20, log_spacing=True)
    assert len(res) == 2
    inner, outer = sorted(res.cycles, key=lambda c: c.s0)
    assert inner.stability is Stability.UNSTABLE
    assert outer.stability is Stability.STABLE
    assert inner.multiplier * outer.multiplier < 0
    # regression against the frozen fixture coordinates
    assert inner.s0 == pytest.approx(two_cycle_fixture["s_inner"], abs=1e-6)
    assert outer.s0 == pytest.approx(two_cycle_fixture["s_outer"], abs=1e-6)


def test_nesting_of_two_cycle_fixture(two_cycle_fixture):
    field = PlanarField(two_cycle_fixture["params"])
    res = find_cycles(field, SEC, 0.02, 1.0, n_scan=20, log_spacing=True)
    inner, outer = sorted(res.cycles, key=lambda c: c.s0)
    assert inner.amplitude < outer.amplitude
    # the outer orbit winds around any interior point of the inner orbit
    assert winding_around(outer.orbit, inner.point) != 0
    # and the orbits do not intersect: inner stays strictly inside
    assert all(winding_around(outer.orbit, p) != 0 for p in inner.orbit[::64])


def test_multiplier_of_center_orbit_is_zero():
    fld = PlanarField(FhnParams(b=1.0), Stage.REVERSIBLE)
    cyc = complete_cycle(fld, SEC, 0.3)
    assert abs(cyc.multiplier) < 1e-9
    assert cyc.stability is Stability.SEMI_STABLE_CANDIDATE


def test_multiplier_matches_finite_difference(lienard_cycle):
    c = lienard_cycle
    h = 1e-5
    fd = (displacement(LIENARD, SEC, c.s0 + h, tol=1e-12).d
          - displacement(LIENARD, SEC, c.s0 - h, tol=1e-12).d) / (2 * h)
    assert cycle_multiplier(c) == pytest.approx(fd, rel=1e-4)


def test_sensitivity_matches_finite_difference(lienard_cycle):
    c = lienard_cycle
    h = 1e-5
    for which in ("gamma", "a"):
        sv = parameter_sensitivity(c, which)
        fp = LIENARD.with_params(**{which: LIENARD.params.get(which) + h})
        fm = LIENARD.with_params(**{which: LIENARD.params.get(which) - h})
        fd = (displacement(fp, SEC, c.s0, tol=1e-12).d
              - displacement(fm, SEC, c.s0, tol=1e-12).d) / (2 * h)
        assert sv == pytest.approx(fd, rel=1e-3)


def test_sensitivity_of_absent_parameter_is_zero(lienard_cycle):
    assert parameter_sensitivity(lienard_cycle, "delta") == 0.0
    with pytest.raises(UsageError):
        parameter_sensitivity(lienard_cycle, "epsilon")


def test_multiplicity_hyperbolic(lienard_cycle):
    est = multiplicity(LIENARD, SEC, lienard_cycle.s0)
    assert est.m == 1
    assert abs(est.d_s) > 1e-6


def test_multiplicity_center_annulus_inconclusive():
    fld = PlanarField(FhnParams(b=1.0), Stage.REVERSIBLE)
    est = multiplicity(fld, SEC, 0.3, tol=1e-12)
    assert est.inconclusive or est.at_least_three
    assert abs(est.d_s) < 1e-8


def test_multiplicity_rejects_non_root():
    with pytest.raises(UsageError):
        multiplicity(LIENARD, SEC, 2.5)


def test_section_rotation_invariance(lienard_cycle):
    rot = section_through((0.0, 0.0), angle=math.pi / 6)
    res = find_cycles(LIENARD, rot, 0.05, 3.0, n_scan=14)
    assert len(res) == 1
    c2 = res[0]
    assert abs(c2.period - lienard_cycle.period) / lienard_cycle.period < 1e-6
    assert abs(c2.amplitude - lienard_cycle.amplitude) < 1e-5
