"""FitzHugh-Nagumo canonical vector field and its staged subsystems.

The full planar system is

    x' = (gamma*delta - 1)*y + (gamma - a)*x + b*x^2 - c*x^3
    y' = x - delta*y

Staged subsystems zero out groups of parameters so that cycle-creating
parameters can be switched on one at a time: the reversible quadratic
center (b only), then gamma, then a, then c.  All derivatives used here
are closed-form polynomial expressions; nothing is differentiated
numerically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FhnParams",
    "Stage",
    "PlanarField",
    "FieldSample",
    "NullclineSet",
    "rotation_determinant",
    "nullclines",
]

PARAM_NAMES = ("a", "b", "c", "gamma", "delta")


class DomainError(ValueError):
    """Raised for non-finite or otherwise invalid numeric input."""


class UsageError(ValueError):
    """Raised for invalid operation/argument pairings."""


@dataclass(frozen=True)
class FhnParams:
    """The five parameters of the canonical system."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in PARAM_NAMES:
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"parameter {name} must be finite, got {v!r}")

    def replace(self, **kw) -> "FhnParams":
        vals = {n: getattr(self, n) for n in PARAM_NAMES}
        vals.update(kw)
        return FhnParams(**vals)

    def get(self, name: str) -> float:
        if name not in PARAM_NAMES:
            raise UsageError(f"unknown parameter {name!r}; expected one of {PARAM_NAMES}")
        return getattr(self, name)


class Stage(enum.Enum):
    """Which staged subsystem is active.

    FULL        full canonical system, all five parameters
    REVERSIBLE  quadratic center x' = -y + b x^2, y' = x
    ROTATED     adds gamma:      x' = -y + gamma x + b x^2
    DAMPED      adds a:          x' = -y + (gamma-a) x + b x^2
    LIENARD     adds c:          x' = -y + (gamma-a) x + b x^2 - c x^3
    """

    FULL = "full"
    REVERSIBLE = "reversible"
    ROTATED = "rotated"
    DAMPED = "damped"
    LIENARD = "lienard"


# parameters structurally present in each stage
_ACTIVE = {
    Stage.FULL: frozenset(PARAM_NAMES),
    Stage.REVERSIBLE: frozenset({"b"}),
    Stage.ROTATED: frozenset({"b", "gamma"}),
    Stage.DAMPED: frozenset({"a", "b", "gamma"}),
    Stage.LIENARD: frozenset({"a", "b", "c", "gamma"}),
}


@dataclass(frozen=True)
class FieldSample:
    """Field value, Jacobian and divergence at one point."""

    f: tuple[float, float]
    jacobian: tuple[tuple[float, float], tuple[float, float]]
    divergence: float


@dataclass(frozen=True)
class NullclineSet:
    """Sampled nullclines of a field.

    v_curves holds one or more (n, 2) arrays for the curve P = 0 (several
    vertical lines in the degenerate gamma*delta = 1 case), w_curve the
    single (n, 2) array for Q = 0.
    """

    v_curves: tuple
    w_curve: np.ndarray
    v_degenerate: bool
    w_vertical: bool


class PlanarField:
    """Evaluatable planar vector field for one parameter set and stage."""

    def __init__(self, params: FhnParams, stage: Stage = Stage.FULL):
        self.params = params
        self.stage = stage
        eff = self.effective_params()
        # cached scalar coefficients of P and Q
        self._gd1 = eff.gamma * eff.delta - 1.0
        self._ga = eff.gamma - eff.a
        self._b = eff.b
        self._c = eff.c
        self._delta = eff.delta

    def effective_params(self) -> FhnParams:
        """Parameters with stage-inactive entries forced to zero."""
        active = _ACTIVE[self.stage]
        return FhnParams(**{n: (getattr(self.params, n) if n in active else 0.0)
                            for n in PARAM_NAMES})

    def active_params(self) -> frozenset:
        return _ACTIVE[self.stage]

    # -- evaluation -----------------------------------------------------

    def rhs(self, x: float, y: float) -> tuple[float, float]:
        """(P, Q) at a point, cheap scalar form used in inner loops."""
        return (self._gd1 * y + (self._ga + (self._b - self._c * x) * x) * x,
                x - self._delta * y)

    def sample(self, point) -> FieldSample:
        """Field, Jacobian and divergence at ``point``.

        All four partials are closed-form polynomial derivatives.
        """
        x, y = float(point[0]), float(point[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DomainError(f"non-finite point {point!r}")
        p, q = self.rhs(x, y)
        px = self._ga + 2.0 * self._b * x - 3.0 * self._c * x * x
        py = self._gd1
        qx = 1.0
        qy = -self._delta
        return FieldSample(f=(p, q), jacobian=((px, py), (qx, qy)), divergence=px + qy)

    def jacobian_at(self, point) -> np.ndarray:
        return np.asarray(self.sample(point).jacobian, dtype=float)

    def divergence(self, x: float, y: float) -> float:
        return self._ga + 2.0 * self._b * x - 3.0 * self._c * x * x - self._delta

    def param_partial(self, which: str, x: float, y: float) -> tuple[float, float]:
        """Closed-form partial of (P, Q) with respect to one parameter.

        Partials of stage-inactive parameters are identically zero, and the
        gamma partial follows the stage formula (gamma enters as gamma*x in
        the staged subsystems, as gamma*(x + delta*y) in the full system).
        """
        if which not in PARAM_NAMES:
            raise UsageError(f"unknown parameter {which!r}")
        if which not in _ACTIVE[self.stage]:
            return (0.0, 0.0)
        if which == "a":
            return (-x, 0.0)
        if which == "b":
            return (x * x, 0.0)
        if which == "c":
            return (-x * x * x, 0.0)
        if which == "gamma":
            if self.stage is Stage.FULL:
                return (self._delta * y + x, 0.0)
            return (x, 0.0)
        # delta (FULL only)
        eff = self.effective_params()
        return (eff.gamma * y, -y)

    def with_params(self, **kw) -> "PlanarField":
        return PlanarField(self.params.replace(**kw), self.stage)


def rotation_determinant(field: PlanarField, which: str, point) -> float:
    """Field-rotation determinant P*Q'_mu - Q*P'_mu at a point.

    For gamma the one-parameter family is the rotated form x' = R + gamma*Q,
    valid for the full system, giving -Q^2.  For a and c the family is the
    delta = 0 subsystem, giving x^2 and x^4.
    """
    x, y = float(point[0]), float(point[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError(f"non-finite point {point!r}")
    if which == "gamma":
        if field.stage is not Stage.FULL:
            raise UsageError("rotation_determinant(gamma) requires the full system")
        q = x - field.params.delta * y
        # P'_gamma = Q, Q'_gamma = 0 in the rotated one-parameter family
        return -q * q
    if which in ("a", "c"):
        if field.effective_params().delta != 0.0:
            raise UsageError(f"rotation_determinant({which}) requires delta = 0")
        p, q = field.rhs(x, y)
        dp, dq = field.param_partial(which, x, y) if which in field.active_params() \
            else ((-x, 0.0) if which == "a" else (-x * x * x, 0.0))
        return p * dq - q * dp
    raise UsageError(f"rotation determinant defined for gamma, a, c; got {which!r}")


def nullclines(field: PlanarField, x_range, n: int) -> NullclineSet:
    """Sample the P = 0 and Q = 0 curves over an x interval.

    For gamma*delta != 1, P is linear in y and the P-nullcline is the
    explicit graph y(x).  When gamma*delta = 1 the y coefficient vanishes;
    the curve degenerates to vertical lines at the real roots of the cubic
    in x, and the degenerate flag is set.
    """
    if n < 2:
        raise UsageError("need at least 2 sample points")
    lo, hi = float(x_range[0]), float(x_range[1])
    xs = np.linspace(lo, hi, n)
    eff = field.effective_params()
    gd1 = eff.gamma * eff.delta - 1.0
    poly_x = ((eff.gamma - eff.a) + (eff.b - eff.c * xs) * xs) * xs

    if abs(gd1) > 1e-14:
        ys = -poly_x / gd1
        v_curves = (np.column_stack([xs, ys]),)
        v_degenerate = False
    else:
        # roots of (gamma-a) x + b x^2 - c x^3 = 0; vertical lines, one per root
        roots = [0.0]
        if eff.c != 0.0:
            disc = eff.b * eff.b + 4.0 * eff.c * (eff.gamma - eff.a)
            if disc >= 0.0:
                r = math.sqrt(disc)
                roots += [(eff.b - r) / (2.0 * eff.c), (eff.b + r) / (2.0 * eff.c)]
        elif eff.b != 0.0:
            roots.append(-(eff.gamma - eff.a) / eff.b)
        ys = np.linspace(lo, hi, n)
        v_curves = tuple(np.column_stack([np.full(n, root), ys])
                         for root in sorted(set(round(r, 15) for r in roots)))
        v_degenerate = True

    if eff.delta != 0.0:
        w_curve = np.column_stack([xs, xs / eff.delta])
        w_vertical = False
    else:
        w_curve = np.column_stack([np.zeros(n), np.linspace(lo, hi, n)])
        w_vertical = True

    return NullclineSet(v_curves=v_curves, w_curve=w_curve,
                        v_degenerate=v_degenerate, w_vertical=w_vertical)
