"""Adaptive planar ODE integration and Poincare-section crossings.

A Dormand-Prince 5(4) embedded pair with a quartic dense interpolant,
written directly on tuples of floats: the fields here are tiny fixed
polynomials and a plain-Python stepper beats generic array machinery by a
wide margin, which matters for the parameter sweeps.

Step acceptance uses ``err <= tol * min(h, 1)``, so the local error of any
single step never exceeds ``tol`` while the global error on O(1) horizons
scales linearly in ``tol``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from .vectorfield import PlanarField, DomainError, UsageError

__all__ = [
    "Trajectory",
    "Section",
    "Crossing",
    "IntegrationError",
    "TerminationReason",
    "integrate",
    "next_crossing",
]

DEFAULT_ESCAPE_RADIUS = 1e4
DEPARTURE_RADIUS = 1e-6          # crossings closer to the start are ignored
CROSSING_OFFSET_TOL = 1e-10      # |signed section offset| at a refined crossing
EQUILIBRIUM_SPEED_FLOOR = 1e-12  # below this the start counts as an equilibrium

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# dense-output polynomial, y(t0 + x*h) = y0 + h * sum_i K_i * sum_j P[i][j] * x**(j+1)
_P = (
    (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799),
    (0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072),
    (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632),
    (0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844),
    (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423),
)


class TerminationReason(enum.Enum):
    REACHED_T_END = "reached_t_end"
    ESCAPED_RADIUS = "escaped_radius"
    CROSSING_FOUND = "crossing_found"
    EQUILIBRIUM_CAPTURE = "equilibrium_capture"


class IntegrationError(RuntimeError):
    """Step-size underflow; carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass
class _Step:
    t0: float
    h: float
    y0: tuple
    k: tuple  # 7 stage derivative tuples

    def eval(self, t: float) -> tuple:
        x = (t - self.t0) / self.h
        n = len(self.y0)
        out = []
        for i in range(n):
            acc = 0.0
            for s in range(7):
                p = _P[s]
                acc += self.k[s][i] * (x * (p[0] + x * (p[1] + x * (p[2] + x * p[3]))))
            out.append(self.y0[i] + self.h * acc)
        return tuple(out)


@dataclass
class Trajectory:
    """Accepted integration steps with dense evaluation in between."""

    times: np.ndarray
    states: np.ndarray
    reason: TerminationReason
    steps: list = dc_field(default_factory=list, repr=False)
    backward: bool = False

    def at(self, t: float) -> tuple:
        """Dense-output state at interior time t."""
        steps = self.steps
        if not steps:
            raise ValueError("trajectory has no steps")
        lo, hi = 0, len(steps) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if steps[mid].t0 + steps[mid].h < t:
                lo = mid + 1
            else:
                hi = mid
        return steps[lo].eval(t)

    def sample(self, ts) -> np.ndarray:
        return np.array([self.at(float(t)) for t in np.atleast_1d(ts)])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def end(self) -> tuple:
        return tuple(self.states[-1])


def _integrate_generic(rhs, y0, t_end, tol, escape_radius=DEFAULT_ESCAPE_RADIUS,
                       stop=None, capture_speed=None, max_steps=2_000_000):
    """Core DP54 driver on tuples; ``stop(step) -> result`` may end integration.

    ``rhs(t, y) -> tuple``.  Integration always runs on t in [0, t_end],
    callers handle time reversal by negating the field.
    """
    n = len(y0)
    t = 0.0
    y = tuple(float(v) for v in y0)
    f = rhs(t, y)
    ts = [t]
    ys = [y]
    steps = []
    # initial step from the field scale
    scale = max(1.0, max(abs(v) for v in y))
    speed = max(abs(v) for v in f) + 1e-30
    h = min(t_end, max(1e-8, 0.01 * scale / speed))
    reason = TerminationReason.REACHED_T_END
    stop_payload = None
    nsteps = 0
    while t < t_end:
        if nsteps > max_steps:
            raise IntegrationError(
                "step budget exhausted",
                Trajectory(np.asarray(ts), np.asarray(ys), TerminationReason.REACHED_T_END, steps))
        h = min(h, t_end - t)
        if h < 1e-14 * max(1.0, abs(t)):
            # finite-time blowup: far from the bounded region this is escape
            if math.hypot(y[0], y[1]) > max(50.0, 1e-3 * escape_radius):
                reason = TerminationReason.ESCAPED_RADIUS
                break
            raise IntegrationError(
                f"step underflow at t={t:.6g}",
                Trajectory(np.asarray(ts), np.asarray(ys), TerminationReason.REACHED_T_END, steps))
        k = [f]
        for s in range(1, 7):
            a = _A[s]
            ystage = tuple(
                y[i] + h * sum(a[j] * k[j][i] for j in range(s)) for i in range(n))
            k.append(rhs(t + _C[s] * h, ystage))
        ynew = tuple(y[i] + h * sum(_A[6][j] * k[j][i] for j in range(6)) for i in range(n))
        err = max(
            abs(h * sum(_E[j] * k[j][i] for j in range(7))) / (1.0 + abs(ynew[i]))
            for i in range(n))
        tol_eff = tol * min(h, 1.0)
        nsteps += 1
        if not math.isfinite(err):
            h *= 0.25
            continue
        if err <= tol_eff or h <= 1e-13:
            step = _Step(t, h, y, tuple(k))
            steps.append(step)
            t += h
            y = ynew
            f = k[6] if _C[6] == 1.0 else rhs(t, y)  # FSAL
            ts.append(t)
            ys.append(y)
            r = math.hypot(y[0], y[1])
            if r > escape_radius:
                reason = TerminationReason.ESCAPED_RADIUS
                break
            if capture_speed is not None:
                if max(abs(v) for v in f) < capture_speed:
                    reason = TerminationReason.EQUILIBRIUM_CAPTURE
                    break
            if stop is not None:
                stop_payload = stop(step)
                if stop_payload is not None:
                    reason = TerminationReason.CROSSING_FOUND
                    break
        # PI-free step update
        fac = 0.9 * (tol_eff / err) ** 0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, fac))
    traj = Trajectory(np.asarray(ts), np.asarray(ys), reason, steps)
    return traj, stop_payload


def integrate(field: PlanarField, start, t_end: float, tol: float = 1e-9,
              backward: bool = False,
              escape_radius: float = DEFAULT_ESCAPE_RADIUS) -> Trajectory:
    """Integrate the planar field from ``start`` for time ``t_end``.

    Backward time integrates the negated field; reported times remain
    positive elapsed times.
    """
    if tol <= 0:
        raise UsageError("tol must be positive")
    if t_end <= 0:
        raise UsageError("t_end must be positive (use backward=True for reverse time)")
    x0, y0 = float(start[0]), float(start[1])
    if not (math.isfinite(x0) and math.isfinite(y0)):
        raise DomainError(f"non-finite start {start!r}")
    if backward:
        rhs = lambda t, s: tuple(-v for v in field.rhs(s[0], s[1]))
    else:
        rhs = lambda t, s: field.rhs(s[0], s[1])
    traj, _ = _integrate_generic(rhs, (x0, y0), float(t_end), tol,
                                 escape_radius=escape_radius)
    traj.backward = backward
    return traj


@dataclass(frozen=True)
class Section:
    """A line section: anchor point, unit direction along the line, and an
    orientation sign for the cycles that cross it."""

    anchor: tuple[float, float]
    direction: tuple[float, float]
    orientation_sign: int = 1

    def __post_init__(self):
        dx, dy = self.direction
        nrm = math.hypot(dx, dy)
        if not math.isfinite(nrm) or nrm == 0.0:
            raise UsageError("section direction must be a nonzero finite vector")
        if abs(nrm - 1.0) > 1e-12:
            object.__setattr__(self, "direction", (dx / nrm, dy / nrm))

    @property
    def normal(self) -> tuple[float, float]:
        dx, dy = self.direction
        return (-dy, dx)

    def point_at(self, s: float) -> tuple[float, float]:
        ax, ay = self.anchor
        dx, dy = self.direction
        return (ax + s * dx, ay + s * dy)

    def coord_of(self, point) -> float:
        """Coordinate along the line (the s value)."""
        ax, ay = self.anchor
        dx, dy = self.direction
        return (point[0] - ax) * dx + (point[1] - ay) * dy

    def offset_of(self, point) -> float:
        """Signed perpendicular distance from the line."""
        nx, ny = self.normal
        ax, ay = self.anchor
        return (point[0] - ax) * nx + (point[1] - ay) * ny

    def transversal_speed(self, field: PlanarField, point) -> float:
        """Normal component of the field at a point (zero = tangency)."""
        p, q = field.rhs(float(point[0]), float(point[1]))
        nx, ny = self.normal
        return p * nx + q * ny


@dataclass(frozen=True)
class Crossing:
    point: tuple[float, float]
    time: float
    s: float
    returned: bool = True


@dataclass(frozen=True)
class NoReturn:
    reason: str
    returned: bool = False


_SUBSAMPLES = 5  # interior dense samples per accepted step when scanning


def next_crossing(field: PlanarField, section: Section, start, max_time: float,
                  tol: float = 1e-10, backward: bool = False,
                  escape_radius: float = DEFAULT_ESCAPE_RADIUS,
                  direction_sign: float | None = None):
    """First transversal same-direction crossing of the section line.

    The crossing direction is the sign of the normal velocity at the anchor
    when the field there is nonzero, otherwise the sign at the start point
    (the anchor is typically an enclosed focus, where the field vanishes).
    Crossings within DEPARTURE_RADIUS of the start are ignored.  Returns a
    Crossing, or NoReturn when the trajectory escapes, is captured by an
    equilibrium, or max_time elapses.
    """
    sgn = -1.0 if backward else 1.0
    rhs = (lambda t, s: tuple(sgn * v for v in field.rhs(s[0], s[1])))
    x0, y0 = float(start[0]), float(start[1])
    f0 = rhs(0.0, (x0, y0))
    speed0 = math.hypot(*f0)
    scale0 = 1.0 + math.hypot(x0, y0)
    if speed0 < EQUILIBRIUM_SPEED_FLOOR * scale0:
        return NoReturn("start_at_equilibrium")

    nx, ny = section.normal
    if direction_sign is not None:
        want = float(direction_sign)
    else:
        fa = rhs(0.0, section.anchor)
        want = fa[0] * nx + fa[1] * ny
        if abs(want) < 1e-9 * (1.0 + math.hypot(*fa)):
            want = f0[0] * nx + f0[1] * ny
        want = math.copysign(1.0, want)

    def g_of(state) -> float:
        return section.offset_of(state)

    dep_time = [None]  # first time the trajectory is clear of the start point

    def scan(step: _Step):
        # subsample the dense polynomial, bracket sign changes of g
        pts = [(step.t0, step.y0)]
        for i in range(1, _SUBSAMPLES + 1):
            tt = step.t0 + step.h * i / _SUBSAMPLES
            pts.append((tt, step.eval(tt)))
        for (ta, pa), (tb, pb) in zip(pts[:-1], pts[1:]):
            if dep_time[0] is None and \
                    math.hypot(pb[0] - x0, pb[1] - y0) > DEPARTURE_RADIUS:
                dep_time[0] = tb
            ga, gb = g_of(pa), g_of(pb)
            if ga * gb > 0.0:
                continue
            if ga == gb:
                continue
            # refine on the dense interpolant
            if gb == 0.0:
                t_star = tb
            elif ga == 0.0:
                t_star = ta
            else:
                t_star = brentq(lambda t: g_of(step.eval(t)), ta, tb, xtol=1e-15)
            p_star = step.eval(t_star)
            # ignore the departure itself: a crossing at the start point
            # before the trajectory has left its neighborhood
            if (math.hypot(p_star[0] - x0, p_star[1] - y0) <= DEPARTURE_RADIUS
                    and (dep_time[0] is None or t_star < dep_time[0])):
                continue
            fst = rhs(t_star, p_star)
            gdot = fst[0] * nx + fst[1] * ny
            if gdot * want <= 0.0:
                continue
            if abs(g_of(p_star)) > CROSSING_OFFSET_TOL:
                continue
            return (t_star, p_star)
        return None

    try:
        traj, payload = _integrate_generic(
            rhs, (x0, y0), float(max_time), tol, escape_radius=escape_radius,
            stop=scan, capture_speed=EQUILIBRIUM_SPEED_FLOOR)
    except IntegrationError as exc:
        raise IntegrationError(f"integration failed while seeking a crossing: {exc}",
                               exc.trajectory) from exc
    if payload is None:
        reason = {TerminationReason.ESCAPED_RADIUS: "escaped",
                  TerminationReason.EQUILIBRIUM_CAPTURE: "equilibrium_capture"}.get(
            traj.reason, "no_crossing_within_max_time")
        return NoReturn(reason)
    t_star, p_star = payload
    return Crossing(point=(p_star[0], p_star[1]), time=t_star,
                    s=section.coord_of(p_star))


def integrate_augmented(rhs, y0, t_end: float, tol: float = 1e-12,
                        escape_radius: float = DEFAULT_ESCAPE_RADIUS):
    """Integrate an n-dimensional auxiliary system (orbit + quadratures)."""
    traj, _ = _integrate_generic(rhs, tuple(float(v) for v in y0), float(t_end), tol,
                                 escape_radius=escape_radius)
    return traj
