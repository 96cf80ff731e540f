import math

import numpy as np
import pytest

from fhn_bifurc import FhnParams, PlanarField, Stage, rotation_determinant, nullclines
from fhn_bifurc.vectorfield import DomainError, UsageError


def test_eval_zero_params_is_harmonic():
    fld = PlanarField(FhnParams())
    smp = fld.sample((1.0, 0.0))
    assert smp.f == (0.0, 1.0)
    assert smp.divergence == 0.0


def test_eval_quadratic_term():
    fld = PlanarField(FhnParams(b=1.0))
    smp = fld.sample((1.0, 2.0))
    assert smp.f == (-2.0 + 1.0, 1.0)


def test_eval_jacobian_at_origin_full():
    fld = PlanarField(FhnParams(a=1, b=1, c=1, gamma=1, delta=1))
    smp = fld.sample((0.0, 0.0))
    assert smp.jacobian == ((0.0, 0.0), (1.0, -1.0))
    assert smp.divergence == -1.0


def test_divergence_equals_jacobian_trace():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = FhnParams(*rng.uniform(-2, 2, size=5))
        fld = PlanarField(p)
        x, y = rng.uniform(-3, 3, size=2)
        smp = fld.sample((x, y))
        assert smp.divergence == pytest.approx(
            smp.jacobian[0][0] + smp.jacobian[1][1], abs=1e-15)


def test_eval_rejects_nonfinite():
    fld = PlanarField(FhnParams())
    with pytest.raises(DomainError):
        fld.sample((math.nan, 0.0))
    with pytest.raises(DomainError):
        FhnParams(a=math.inf)


def test_jacobian_matches_central_differences():
    rng = np.random.default_rng(1)
    h = 1e-6
    for _ in range(100):
        p = FhnParams(*rng.uniform(-1.5, 1.5, size=5))
        fld = PlanarField(p)
        x, y = rng.uniform(-2, 2, size=2)
        J = np.asarray(fld.sample((x, y)).jacobian)
        fd = np.empty((2, 2))
        fd[:, 0] = (np.subtract(fld.rhs(x + h, y), fld.rhs(x - h, y))) / (2 * h)
        fd[:, 1] = (np.subtract(fld.rhs(x, y + h), fld.rhs(x, y - h))) / (2 * h)
        assert np.allclose(J, fd, rtol=1e-6, atol=1e-7)


def test_rotation_determinant_examples():
    full = PlanarField(FhnParams(delta=1.0))
    assert rotation_determinant(full, "gamma", (2.0, 1.0)) == -1.0
    flat = PlanarField(FhnParams(), Stage.LIENARD)
    assert rotation_determinant(flat, "a", (3.0, 5.0)) == 9.0
    assert rotation_determinant(flat, "c", (2.0, -7.0)) == 16.0


def test_rotation_determinant_signs_random():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        a, b, c, g, d = rng.uniform(0, 2, size=5)
        x, y = rng.uniform(-4, 4, size=2)
        full = PlanarField(FhnParams(a=a, b=b, c=c, gamma=g, delta=d))
        flat = PlanarField(FhnParams(a=a, b=b, c=c, gamma=g))
        dg = rotation_determinant(full, "gamma", (x, y))
        da = rotation_determinant(flat, "a", (x, y))
        dc = rotation_determinant(flat, "c", (x, y))
        q = x - d * y
        assert dg <= 0 and (dg == 0) == (q == 0)
        assert da >= 0 and (da == 0) == (x == 0)
        assert dc >= 0 and (dc == 0) == (x == 0)


def test_rotation_determinant_stage_pairing():
    full = PlanarField(FhnParams(delta=0.5))
    with pytest.raises(UsageError):
        rotation_determinant(full, "a", (1.0, 1.0))
    staged = PlanarField(FhnParams(b=1.0), Stage.REVERSIBLE)
    with pytest.raises(UsageError):
        rotation_determinant(staged, "gamma", (1.0, 1.0))


def test_reversible_stage_symmetry():
    fld = PlanarField(FhnParams(a=1, b=0.7, c=1, gamma=1, delta=1), Stage.REVERSIBLE)
    rng = np.random.default_rng(3)
    for _ in range(50):
        x, y = rng.uniform(-2, 2, size=2)
        p1, q1 = fld.rhs(x, y)
        p2, q2 = fld.rhs(-x, y)
        assert p2 == pytest.approx(p1, abs=1e-15)
        assert q2 == pytest.approx(-q1, abs=1e-15)


def test_stage_masks_parameters():
    p = FhnParams(a=1, b=2, c=3, gamma=4, delta=5)
    eff = PlanarField(p, Stage.REVERSIBLE).effective_params()
    assert (eff.a, eff.c, eff.gamma, eff.delta) == (0, 0, 0, 0)
    assert eff.b == 2
    assert PlanarField(p, Stage.LIENARD).effective_params().delta == 0
    # structurally absent parameters have zero partials
    fld = PlanarField(p, Stage.LIENARD)
    assert fld.param_partial("delta", 1.0, 1.0) == (0.0, 0.0)
    assert fld.param_partial("gamma", 1.0, 1.0) == (1.0, 0.0)
    # the full system's gamma partial includes the delta*y term
    assert PlanarField(p).param_partial("gamma", 1.0, 1.0) == (5.0 * 1.0 + 1.0, 0.0)


def test_nullclines_trivial_flat():
    fld = PlanarField(FhnParams(delta=1.0))
    nc = nullclines(fld, (-1, 1), 11)
    assert not nc.v_degenerate
    assert np.allclose(nc.v_curves[0][:, 1], 0.0)
    assert np.allclose(nc.w_curve[:, 1], nc.w_curve[:, 0])


def test_nullclines_vertical_w_when_delta_zero():
    fld = PlanarField(FhnParams(b=1.0))
    nc = nullclines(fld, (-1, 1), 7)
    assert nc.w_vertical
    assert np.allclose(nc.w_curve[:, 0], 0.0)


def test_nullclines_degenerate_when_gamma_delta_one():
    fld = PlanarField(FhnParams(gamma=1.0, delta=1.0, b=1.0, c=1.0))
    nc = nullclines(fld, (-2, 2), 9)
    assert nc.v_degenerate
    for curve in nc.v_curves:
        assert np.ptp(curve[:, 0]) == 0.0  # vertical lines
    with pytest.raises(UsageError):
        nullclines(fld, (-1, 1), 1)
