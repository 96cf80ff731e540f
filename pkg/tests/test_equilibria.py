import math

import numpy as np
import pytest

from fhn_bifurc import (FhnParams, PlanarField, Stage, finite_equilibria,
                        poincare_index, infinite_singularities, index_balance,
                        hopf_scan, EquilibriumKind, EquilibriumLabel)
from fhn_bifurc.equilibria import Chart, InfiniteKind, SingularCurveError
from fhn_bifurc.vectorfield import UsageError


def test_delta_zero_gives_only_origin():
    eqs = finite_equilibria(FhnParams(a=0.4, b=2.0, c=1.0, gamma=0.9, delta=0.0))
    assert len(eqs) == 1
    assert eqs[0].location == (0.0, 0.0)
    assert eqs[0].label is EquilibriumLabel.O


def test_no_real_roots_gives_only_origin():
    # x^2 + 1 = 0 has no real roots
    eqs = finite_equilibria(FhnParams(c=1.0, delta=1.0))
    assert len(eqs) == 1
    assert eqs[0].index == 1


def test_three_equilibria_golden_ratio_roots():
    eqs = finite_equilibria(FhnParams(b=3.0, c=1.0, delta=1.0))
    xs = sorted(e.location[0] for e in eqs)
    assert xs[0] == pytest.approx(0.0, abs=1e-14)
    assert xs[1] == pytest.approx((3 - math.sqrt(5)) / 2, rel=1e-12)
    assert xs[2] == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-12)
    labels = {e.label for e in eqs}
    assert labels == {EquilibriumLabel.O, EquilibriumLabel.S, EquilibriumLabel.A}
    saddle = next(e for e in eqs if e.label is EquilibriumLabel.S)
    assert saddle.index == -1


def test_residuals_below_tolerance():
    rng = np.random.default_rng(4)
    for _ in range(50):
        p = FhnParams(*rng.uniform(0, 2, size=5))
        fld = PlanarField(p)
        for e in finite_equilibria(p):
            px, qx = fld.rhs(*e.location)
            assert abs(px) <= 1e-9 and abs(qx) <= 1e-9


def test_classification_consistent_with_determinant():
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = FhnParams(*rng.uniform(0, 2, size=5))
        fld = PlanarField(p)
        for e in finite_equilibria(p):
            J = fld.jacobian_at(e.location)
            det = float(np.linalg.det(J))
            if e.kind is EquilibriumKind.SADDLE:
                assert det < 0
                assert e.index == -1
            elif e.is_antisaddle:
                assert det > 0
                assert e.index == 1


def test_alternation_along_w_nullcline():
    # with three simple equilibria the saddle sits between the antisaddles
    rng = np.random.default_rng(6)
    found = 0
    while found < 20:
        p = FhnParams(a=float(rng.uniform(0, 1)), b=float(rng.uniform(1, 3)),
                      c=float(rng.uniform(0.2, 1.5)), gamma=float(rng.uniform(0, 1)),
                      delta=float(rng.uniform(0.2, 1.0)))
        eqs = finite_equilibria(p)
        if len(eqs) != 3 or any(e.kind in (EquilibriumKind.SADDLE_NODE,
                                           EquilibriumKind.DEGENERATE)
                                for e in eqs):
            continue
        found += 1
        ordered = sorted(eqs, key=lambda e: e.location[0])
        kinds = ["saddle" if e.is_saddle else "anti" for e in ordered]
        assert kinds in (["anti", "saddle", "anti"],
                         ["saddle", "anti", "saddle"])


def test_index_of_center_saddle_and_empty_circle():
    center = PlanarField(FhnParams())
    assert poincare_index(center, ((0.0, 0.0), 0.5)) == 1
    three = PlanarField(FhnParams(b=3.0, c=1.0, delta=1.0))
    xs = (3 - math.sqrt(5)) / 2
    assert poincare_index(three, ((xs, xs), 0.05)) == -1
    assert poincare_index(three, ((10.0, -3.0), 0.1)) == 0


def test_index_accepts_polygon_and_detects_singular_curve():
    center = PlanarField(FhnParams())
    square = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float)
    assert poincare_index(center, square) == 1
    with pytest.raises(SingularCurveError):
        poincare_index(center, np.array([[0, 0], [1, 0], [0, 1]], dtype=float))


def test_index_additivity_sampled():
    rng = np.random.default_rng(7)
    done = 0
    while done < 10:
        p = FhnParams(a=float(rng.uniform(0, 1)), b=float(rng.uniform(0, 3)),
                      c=float(rng.uniform(0.1, 2)), gamma=float(rng.uniform(0, 1)),
                      delta=float(rng.uniform(0.1, 1.0)))
        eqs = finite_equilibria(p)
        locs = [e.location for e in eqs]
        if len(locs) > 1:
            dmin = min(math.hypot(a[0] - b[0], a[1] - b[1])
                       for i, a in enumerate(locs) for b in locs[i + 1:])
            if dmin < 0.1:
                continue
        else:
            dmin = 1.0
        fld = PlanarField(p)
        total = sum(poincare_index(fld, (loc, min(0.4 * dmin, 0.3)))
                    for loc in locs)
        cx = np.mean([l[0] for l in locs])
        cy = np.mean([l[1] for l in locs])
        r = max(math.hypot(l[0] - cx, l[1] - cy) for l in locs) + 1.0
        assert total == poincare_index(fld, ((cx, cy), r))
        done += 1


def test_infinite_singularities_structure():
    for c in (1.0, 2.0, 0.3):
        sing = infinite_singularities(FhnParams(a=0.5, b=1.0, c=c, gamma=0.2,
                                                delta=0.7))
        assert [s.chart for s in sing] == [Chart.U_CHART, Chart.V_CHART]
        assert sing[0].kind is InfiniteKind.SIMPLE_NODE
        assert sing[0].multiplicity_of_root == 1
        assert sing[1].kind is InfiniteKind.TRIPLE_SADDLE
        assert sing[1].multiplicity_of_root == 3
    degraded = infinite_singularities(FhnParams(b=1.0))
    assert all(s.degraded and s.kind is InfiniteKind.OTHER for s in degraded)


def test_index_balance_focus_only():
    bal = index_balance(FhnParams(c=1.0, delta=1.0))
    assert bal.applicable and bal.holds
    assert (bal.n_foci, bal.n_infinite_nodes, bal.n_infinite_saddles) == (1, 1, 1)


def test_index_balance_three_equilibria():
    bal = index_balance(FhnParams(b=3.0, c=1.0, delta=1.0))
    assert bal.holds
    assert bal.n_saddles == 1
    assert bal.n_nodes + bal.n_foci + bal.n_centers == 2


def test_index_balance_saddle_node_flagged():
    # double root of the quadratic: b^2 = 4*c*K
    p = FhnParams(a=1.0, b=2.0, c=1.0, gamma=0.5, delta=1.0)
    bal = index_balance(p)
    assert not bal.applicable
    assert not bal.holds


def test_hopf_scan_damped_stage():
    res = hopf_scan(FhnParams(b=1.0, gamma=0.5), Stage.DAMPED, "a", (0.0, 1.0))
    assert len(res.critical_values) == 1
    assert abs(res.critical_values[0] - 0.5) < 1e-9
    assert res.collision is None


def test_hopf_scan_full_origin_matches_closed_form():
    # trace at the origin is gamma - a - delta
    p = FhnParams(a=0.2, b=1.0, c=1.0, delta=0.3)
    res = hopf_scan(p, Stage.FULL, "gamma", (0.0, 1.0))
    assert len(res.critical_values) == 1
    assert abs(res.critical_values[0] - (p.a + p.delta)) < 1e-9


def test_hopf_scan_empty_when_no_crossing():
    res = hopf_scan(FhnParams(b=1.0, gamma=0.5), Stage.DAMPED, "a", (0.6, 1.0))
    assert res.critical_values == ()


def test_hopf_scan_rejects_bad_param():
    with pytest.raises(UsageError):
        hopf_scan(FhnParams(), Stage.FULL, "b", (0.0, 1.0))
