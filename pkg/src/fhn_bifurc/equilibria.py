"""Finite and infinite equilibria, Poincare indices, and Hopf scans.

Finite equilibria of the full system lie on the W-nullcline; besides the
origin there are at most two more, the roots of a quadratic.  The behavior
at infinity is governed by the top-degree homogeneous part of x*Q - y*P,
which for c != 0 factors as c * x^3 * y: a simple direction along the
x-axis and a triple one along the y-axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .vectorfield import FhnParams, PlanarField, Stage, UsageError

__all__ = [
    "EquilibriumKind",
    "EquilibriumLabel",
    "Equilibrium",
    "InfiniteSingularity",
    "IndexBalance",
    "HopfScanResult",
    "finite_equilibria",
    "poincare_index",
    "infinite_singularities",
    "index_balance",
    "hopf_scan",
]

DET_DEGENERATE_TOL = 1e-10   # |det J| below this -> saddle-node/degenerate
CENTER_RE_TOL = 1e-8         # |Re lambda| below this for a complex pair -> center candidate
RESIDUAL_TOL = 1e-9          # |P|, |Q| at a reported equilibrium


class EquilibriumKind(enum.Enum):
    STABLE_NODE = "stable_node"
    UNSTABLE_NODE = "unstable_node"
    STABLE_FOCUS = "stable_focus"
    UNSTABLE_FOCUS = "unstable_focus"
    CENTER_CANDIDATE = "center_candidate"
    SADDLE = "saddle"
    SADDLE_NODE = "saddle_node"
    DEGENERATE = "degenerate"


ANTISADDLE_KINDS = frozenset({
    EquilibriumKind.STABLE_NODE, EquilibriumKind.UNSTABLE_NODE,
    EquilibriumKind.STABLE_FOCUS, EquilibriumKind.UNSTABLE_FOCUS,
    EquilibriumKind.CENTER_CANDIDATE,
})


class EquilibriumLabel(enum.Enum):
    O = "O"          # the origin
    S = "S"          # the non-origin saddle
    A = "A"          # the non-origin antisaddle
    OTHER = "other"


@dataclass(frozen=True)
class Equilibrium:
    location: tuple[float, float]
    eigenvalues: tuple[complex, complex]
    kind: EquilibriumKind
    index: int
    label: EquilibriumLabel

    @property
    def is_saddle(self) -> bool:
        return self.kind is EquilibriumKind.SADDLE

    @property
    def is_antisaddle(self) -> bool:
        return self.kind in ANTISADDLE_KINDS


class Chart(enum.Enum):
    U_CHART = "u_chart"  # u = y/x, direction of the x-axis
    V_CHART = "v_chart"  # v = x/y, direction of the y-axis


class InfiniteKind(enum.Enum):
    SIMPLE_NODE = "simple_node"
    TRIPLE_SADDLE = "triple_saddle"
    OTHER = "other"


@dataclass(frozen=True)
class InfiniteSingularity:
    chart: Chart
    location: float
    kind: InfiniteKind
    multiplicity_of_root: int
    degraded: bool = False


@dataclass(frozen=True)
class IndexBalance:
    n_nodes: int
    n_foci: int
    n_centers: int
    n_saddles: int
    n_infinite_nodes: int
    n_infinite_saddles: int
    holds: bool
    applicable: bool = True


@dataclass(frozen=True)
class HopfScanResult:
    critical_values: tuple
    collision: float | None = None  # parameter value where tracking failed


def _classify(J: np.ndarray) -> tuple[EquilibriumKind, tuple[complex, complex], int]:
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    tr = float(J[0, 0] + J[1, 1])
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        r = math.sqrt(disc)
        lam = ((tr + r) / 2.0 + 0j, (tr - r) / 2.0 + 0j)
    else:
        r = math.sqrt(-disc)
        lam = (complex(tr / 2.0, r / 2.0), complex(tr / 2.0, -r / 2.0))
    if abs(det) < DET_DEGENERATE_TOL:
        rank = int(np.linalg.matrix_rank(J, tol=1e-12))
        kind = EquilibriumKind.SADDLE_NODE if rank == 1 else EquilibriumKind.DEGENERATE
        return kind, lam, 0
    if det < 0.0:
        return EquilibriumKind.SADDLE, lam, -1
    if disc < 0.0:
        if abs(tr) < 2.0 * CENTER_RE_TOL:
            kind = EquilibriumKind.CENTER_CANDIDATE
        elif tr < 0.0:
            kind = EquilibriumKind.STABLE_FOCUS
        else:
            kind = EquilibriumKind.UNSTABLE_FOCUS
    else:
        kind = EquilibriumKind.STABLE_NODE if tr < 0.0 else EquilibriumKind.UNSTABLE_NODE
    return kind, lam, +1


def finite_equilibria(params: FhnParams, stage: Stage = Stage.FULL) -> list[Equilibrium]:
    """All finite equilibria, classified, indexed and labeled.

    The origin is always present.  For delta != 0 additional points solve
    c x^2 - b x - (gamma*delta - 1)/delta - gamma + a = 0 on y = x/delta;
    for delta = 0 the line Q = x = 0 meets P = 0 only at the origin.
    """
    field = PlanarField(params, stage)
    eff = field.effective_params()
    xs: list[float] = [0.0]
    if eff.delta != 0.0:
        k0 = -(eff.gamma * eff.delta - 1.0) / eff.delta - eff.gamma + eff.a
        if eff.c != 0.0:
            disc = eff.b * eff.b - 4.0 * eff.c * k0
            if disc >= 0.0:
                r = math.sqrt(disc)
                # numerically stable roots of c x^2 - b x + k0
                qq = (eff.b + math.copysign(r, eff.b)) / 2.0
                roots = {qq / eff.c} | ({k0 / qq} if qq != 0.0 else {0.0})
                xs.extend(x for x in roots if abs(x) > 1e-12)
        elif eff.b != 0.0:
            x1 = k0 / eff.b
            if abs(x1) > 1e-12:
                xs.append(x1)
        # b = c = 0: the quadratic degenerates, no isolated extra roots

    out = []
    for x in sorted(set(xs)):
        y = x / eff.delta if eff.delta != 0.0 else 0.0
        smp = field.sample((x, y))
        kind, lam, index = _classify(np.asarray(smp.jacobian))
        out.append(Equilibrium(location=(x, y), eigenvalues=lam, kind=kind,
                               index=index, label=EquilibriumLabel.OTHER))
    # labels: origin -> O, unique non-origin saddle -> S, non-origin antisaddles -> A
    labeled = []
    saddles = [e for e in out if e.location != (0.0, 0.0) and e.is_saddle]
    anti = [e for e in out if e.location != (0.0, 0.0) and e.is_antisaddle]
    for e in out:
        if e.location == (0.0, 0.0):
            label = EquilibriumLabel.O
        elif e.is_saddle and len(saddles) == 1:
            label = EquilibriumLabel.S
        elif e.is_antisaddle and len(anti) == 1:
            label = EquilibriumLabel.A
        elif e.is_antisaddle and len(anti) > 1 and e.location[0] > 0 and e is max(
                anti, key=lambda q: q.location[0]):
            label = EquilibriumLabel.A
        else:
            label = EquilibriumLabel.OTHER
        labeled.append(Equilibrium(e.location, e.eigenvalues, e.kind, e.index, label))
    return labeled


class SingularCurveError(RuntimeError):
    """The field vanishes on (or too close to) the index curve."""


class ResolutionError(RuntimeError):
    """Angle increments stayed >= pi/2 after maximal refinement."""


def poincare_index(field: PlanarField, curve, n_samples: int = 256,
                   max_refine: int = 12) -> int:
    """Winding number of the field along a closed curve.

    ``curve`` is either an (n, 2) array of polygon vertices traversed
    counterclockwise (closure implied) or a pair (center, radius).  The
    index is the summed angle increment of (P, Q) over the curve divided by
    2*pi, with local bisection of any arc whose increment reaches pi/2.
    """
    if isinstance(curve, tuple) and len(curve) == 2 and np.isscalar(curve[1]):
        (cx, cy), rad = curve
        th = np.linspace(0.0, 2.0 * math.pi, max(n_samples, 8), endpoint=False)
        pts = np.column_stack([cx + rad * np.cos(th), cy + rad * np.sin(th)])
    else:
        pts = np.asarray(curve, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise UsageError("curve must be (n, 2) vertices or ((cx, cy), radius)")
        if np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]

    eff = field.effective_params()

    def angles(p):
        px = (eff.gamma * eff.delta - 1.0) * p[:, 1] + (
            (eff.gamma - eff.a) + (eff.b - eff.c * p[:, 0]) * p[:, 0]) * p[:, 0]
        qy = p[:, 0] - eff.delta * p[:, 1]
        mag = np.hypot(px, qy)
        if np.any(mag < 1e-13):
            raise SingularCurveError("field vanishes on the curve")
        return np.arctan2(qy, px)

    total = 0.0
    for _ in range(max_refine + 1):
        th = angles(pts)
        dth = np.diff(np.append(th, th[0]))
        dth = (dth + math.pi) % (2.0 * math.pi) - math.pi
        bad = np.abs(dth) >= math.pi / 2.0
        if not bad.any():
            total = float(dth.sum())
            break
        # bisect offending arcs
        nxt = np.roll(pts, -1, axis=0)
        mids = 0.5 * (pts + nxt)
        seq = []
        for i in range(len(pts)):
            seq.append(pts[i])
            if bad[i]:
                seq.append(mids[i])
        pts = np.asarray(seq)
    else:
        raise ResolutionError("could not resolve angle increments below pi/2")
    return int(round(total / (2.0 * math.pi)))


def infinite_singularities(params: FhnParams) -> list[InfiniteSingularity]:
    """Singular directions at infinity from the top-degree homogeneous form.

    The degree-(n+1) part of x*Q - y*P is c*x^3*y, so each chart polynomial
    is monomial: c*u in the x-direction chart and c*v^3 in the y-direction
    chart.  Root multiplicities 1 and 3 give a simple node and a triple
    saddle; c = 0 changes the structure and is reported degraded.
    """
    c = params.c
    if c == 0.0:
        return [InfiniteSingularity(Chart.U_CHART, 0.0, InfiniteKind.OTHER, 0, degraded=True),
                InfiniteSingularity(Chart.V_CHART, 0.0, InfiniteKind.OTHER, 0, degraded=True)]
    # chart polynomials from the homogeneous top part c*x^3*y
    u_mult = 1   # c*u     has a simple root at u = 0
    v_mult = 3   # c*v^3   has a triple root at v = 0
    return [
        InfiniteSingularity(Chart.U_CHART, 0.0, InfiniteKind.SIMPLE_NODE, u_mult),
        InfiniteSingularity(Chart.V_CHART, 0.0, InfiniteKind.TRIPLE_SADDLE, v_mult),
    ]


def index_balance(params: FhnParams) -> IndexBalance:
    """Check N + N_f + N_c + N' = C + C' + 1 over all equilibria."""
    eqs = finite_equilibria(params)
    if any(e.kind in (EquilibriumKind.SADDLE_NODE, EquilibriumKind.DEGENERATE)
           for e in eqs):
        return IndexBalance(0, 0, 0, 0, 0, 0, holds=False, applicable=False)
    n_nodes = sum(e.kind in (EquilibriumKind.STABLE_NODE, EquilibriumKind.UNSTABLE_NODE)
                  for e in eqs)
    n_foci = sum(e.kind in (EquilibriumKind.STABLE_FOCUS, EquilibriumKind.UNSTABLE_FOCUS)
                 for e in eqs)
    n_centers = sum(e.kind is EquilibriumKind.CENTER_CANDIDATE for e in eqs)
    n_saddles = sum(e.is_saddle for e in eqs)
    inf = infinite_singularities(params)
    n_inf_nodes = sum(s.kind is InfiniteKind.SIMPLE_NODE for s in inf)
    n_inf_saddles = sum(s.kind is InfiniteKind.TRIPLE_SADDLE for s in inf)
    applicable = not any(s.kind is InfiniteKind.OTHER for s in inf)
    holds = (n_nodes + n_foci + n_centers + n_inf_nodes
             == n_saddles + n_inf_saddles + 1)
    return IndexBalance(n_nodes, n_foci, n_centers, n_saddles,
                        n_inf_nodes, n_inf_saddles,
                        holds=holds and applicable, applicable=applicable)


def _tracked_equilibrium(params: FhnParams, stage: Stage, label: EquilibriumLabel):
    eqs = finite_equilibria(params, stage)
    matches = [e for e in eqs if e.label is label]
    if len(matches) != 1:
        return None
    return matches[0]


def hopf_scan(params: FhnParams, stage: Stage, which_param: str, interval,
              which_equilibrium: EquilibriumLabel = EquilibriumLabel.O,
              n_scan: int = 400, tol: float = 1e-10) -> HopfScanResult:
    """Parameter values where trace(J) crosses zero with det(J) > 0.

    Tracks the labeled equilibrium across the interval; a tracking failure
    (collision or label change) truncates the scan and is reported.
    """
    if which_param not in ("a", "gamma"):
        raise UsageError("hopf_scan supports which_param in {'a', 'gamma'}")
    lo, hi = float(interval[0]), float(interval[1])

    def tr_det(v):
        p = params.replace(**{which_param: v})
        eq = _tracked_equilibrium(p, stage, which_equilibrium)
        if eq is None:
            return None
        J = PlanarField(p, stage).jacobian_at(eq.location)
        return float(J[0, 0] + J[1, 1]), float(np.linalg.det(J))

    vals = np.linspace(lo, hi, n_scan)
    crits = []
    collision = None
    prev = tr_det(vals[0])
    if prev is None:
        return HopfScanResult((), collision=lo)
    for v_prev, v in zip(vals[:-1], vals[1:]):
        cur = tr_det(v)
        if cur is None:
            collision = float(v)
            break
        if prev[0] == 0.0:
            if prev[1] > 0.0:
                crits.append(float(v_prev))
        elif prev[0] * cur[0] < 0.0:
            a_, b_ = float(v_prev), float(v)
            while b_ - a_ > tol:
                m = 0.5 * (a_ + b_)
                tm = tr_det(m)
                if tm is None:
                    break
                if tm[0] * prev[0] <= 0.0:
                    b_ = m
                else:
                    a_ = m
            m = 0.5 * (a_ + b_)
            tm = tr_det(m)
            if tm is not None and tm[1] > 0.0:
                crits.append(m)
        prev = cur
    return HopfScanResult(tuple(crits), collision=collision)
