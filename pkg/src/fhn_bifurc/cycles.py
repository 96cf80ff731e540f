"""Poincare return map, displacement function, and limit-cycle machinery.

The displacement d(s) = h(s) - s is measured along a line section, by
default a ray anchored at an enclosed focus.  Cycle roots are refined by
bisection/secant; each root is completed into a LimitCycle carrying its
period, orbit, orientation and multiplier.

The multiplier (the s-derivative of the displacement at the cycle) is the
classical divergence integral exp(int_0^T div f dt) - 1, and parameter
sensitivities are the weighted wedge-product integrals; both are evaluated
by augmenting the orbit ODE with quadrature states and integrating at
tight tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .vectorfield import PlanarField, UsageError, PARAM_NAMES
from .odeint import (Section, next_crossing, integrate, integrate_augmented,
                     Crossing, IntegrationError, DEFAULT_ESCAPE_RADIUS)

__all__ = [
    "DisplacementSample",
    "LimitCycle",
    "Stability",
    "CycleSearchResult",
    "MultiplicityEstimate",
    "displacement",
    "scan_displacement",
    "find_cycles",
    "complete_cycle",
    "cycle_multiplier",
    "parameter_sensitivity",
    "multiplicity",
    "section_through",
]

ROOT_TOL = 1e-10          # |d| at a refined cycle root
GRAZE_TOL = 1e-6          # |d| at a local minimum flagged as semi-stable candidate
SEMI_STABLE_TOL = 1e-6    # |multiplier| below this -> semi-stable candidate
CONTINUUM_TOL = 1e-7      # |d| below this at most scan points -> period annulus
DEFAULT_TOL = 1e-10       # integration tolerance for displacement evaluation
QUAD_TOL = 1e-12          # tolerance for multiplier/sensitivity quadratures


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    SEMI_STABLE_CANDIDATE = "semi_stable_candidate"


@dataclass(frozen=True)
class DisplacementSample:
    s: float
    h: float
    d: float
    returned: bool
    time: float = math.nan

    @staticmethod
    def no_return(s: float) -> "DisplacementSample":
        return DisplacementSample(s=s, h=math.nan, d=math.nan, returned=False)


@dataclass
class LimitCycle:
    field: PlanarField
    section: Section
    s0: float
    period: float
    orbit: np.ndarray            # (n, 2) closed polyline samples
    orientation: int             # +1 counterclockwise, -1 clockwise
    multiplier: float            # d_s at the cycle, from the divergence integral
    stability: Stability
    amplitude: float             # max distance from the section anchor

    @property
    def point(self) -> tuple[float, float]:
        return self.section.point_at(self.s0)


@dataclass
class CycleSearchResult:
    """find_cycles result: behaves as the list of located cycles, with
    scan-level flags attached."""

    cycles: list
    continuum: bool = False
    graze_candidates: tuple = ()
    samples: tuple = ()

    def __iter__(self):
        return iter(self.cycles)

    def __len__(self):
        return len(self.cycles)

    def __getitem__(self, i):
        return self.cycles[i]


@dataclass(frozen=True)
class MultiplicityEstimate:
    m: int | None                # 1, 2, or None when >= 3 / inconclusive
    at_least_three: bool
    inconclusive: bool
    d: float
    d_s: float
    d_ss: float


def section_through(point, angle: float = 0.0, orientation_sign: int = 1) -> Section:
    """Section anchored at ``point`` with direction at ``angle`` radians."""
    return Section(anchor=(float(point[0]), float(point[1])),
                   direction=(math.cos(angle), math.sin(angle)),
                   orientation_sign=orientation_sign)


def displacement(field: PlanarField, section: Section, s: float,
                 tol: float = DEFAULT_TOL, max_time: float = 1000.0,
                 backward: bool = False,
                 escape_radius: float = DEFAULT_ESCAPE_RADIUS) -> DisplacementSample:
    """One evaluation of the displacement map d(s) = h(s) - s.

    A trajectory that never re-crosses the section in the counted direction
    yields a sample with returned=False rather than an error.
    """
    start = section.point_at(s)
    res = next_crossing(field, section, start, max_time, tol=tol,
                        backward=backward, escape_radius=escape_radius)
    if not isinstance(res, Crossing):
        return DisplacementSample.no_return(s)
    return DisplacementSample(s=s, h=res.s, d=res.s - s, returned=True, time=res.time)


def scan_displacement(field: PlanarField, section: Section, s_values,
                      tol: float = DEFAULT_TOL, max_time: float = 1000.0,
                      backward: bool = False) -> list[DisplacementSample]:
    return [displacement(field, section, float(s), tol=tol, max_time=max_time,
                         backward=backward) for s in s_values]


def _refine_root(dfun, s_lo, d_lo, s_hi, d_hi, tol_d=ROOT_TOL, max_iter=80):
    """Bisection with secant acceleration on a sign-change bracket."""
    a, fa, b, fb = s_lo, d_lo, s_hi, d_hi
    best_s, best_d = (a, fa) if abs(fa) < abs(fb) else (b, fb)
    use_secant = True
    for _ in range(max_iter):
        if abs(best_d) <= tol_d:
            return best_s, best_d
        if use_secant and fb != fa:
            m = b - fb * (b - a) / (fb - fa)
            if not (min(a, b) < m < max(a, b)):
                m = 0.5 * (a + b)
        else:
            m = 0.5 * (a + b)
        use_secant = not use_secant
        smp = dfun(m)
        if not smp.returned:
            # fall back to plain bisection from the defined side
            m = 0.5 * (a + b)
            smp = dfun(m)
            if not smp.returned:
                break
        fm = smp.d
        if abs(fm) < abs(best_d):
            best_s, best_d = m, fm
        if fa * fm <= 0.0:
            b, fb = m, fm
        else:
            a, fa = m, fm
        if abs(b - a) < 1e-14 * max(1.0, abs(a)):
            return best_s, best_d
    return (best_s, best_d) if abs(best_d) <= 10 * tol_d else (None, None)


def complete_cycle(field: PlanarField, section: Section, s0: float,
                   tol: float = DEFAULT_TOL, n_orbit: int = 512,
                   max_time: float = 1000.0) -> LimitCycle:
    """Build the LimitCycle object for a displacement root at s0."""
    start = section.point_at(s0)
    res = next_crossing(field, section, start, max_time, tol=tol)
    if not isinstance(res, Crossing):
        raise IntegrationError(f"no return from s0={s0!r}; not a cycle")
    period = res.time
    traj = integrate(field, start, period, tol=min(tol, 1e-10))
    ts = np.linspace(0.0, period, n_orbit)
    orbit = traj.sample(ts)
    # shoelace area sign -> orientation (skip duplicated endpoint)
    x, y = orbit[:-1, 0], orbit[:-1, 1]
    area2 = float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    orientation = 1 if area2 > 0 else -1
    mult = _divergence_multiplier(field, start, period)
    if abs(mult) < SEMI_STABLE_TOL:
        stab = Stability.SEMI_STABLE_CANDIDATE
    elif mult < 0:
        stab = Stability.STABLE
    else:
        stab = Stability.UNSTABLE
    ax, ay = section.anchor
    dist = np.hypot(orbit[:, 0] - ax, orbit[:, 1] - ay)
    k = int(np.argmax(dist))
    amplitude = float(dist[k])
    # parabolic peak refinement, so the amplitude is sampling-independent
    if 0 < k < len(dist) - 1:
        dm, d0, dp = dist[k - 1], dist[k], dist[k + 1]
        denom = dm - 2.0 * d0 + dp
        if denom < 0:
            amplitude = float(d0 - 0.125 * (dp - dm) ** 2 / denom)
    return LimitCycle(field=field, section=section, s0=s0, period=period,
                      orbit=orbit, orientation=orientation, multiplier=mult,
                      stability=stab, amplitude=amplitude)


def find_cycles(field: PlanarField, section: Section, s_min: float, s_max: float,
                n_scan: int = 24, tol: float = DEFAULT_TOL,
                max_time: float = 1000.0, backward: bool = False,
                log_spacing: bool = False) -> CycleSearchResult:
    """Scan d over [s_min, s_max], refine sign changes into limit cycles.

    Near-tangencies (|d| < GRAZE_TOL at an interior local minimum of |d|
    without a sign change) are reported as graze candidates; a scan that is
    essentially zero everywhere is flagged as a continuum (period annulus)
    and yields no isolated cycles.  Scanning with backward=True locates
    cycles by their reversed-time displacement (useful for unstable cycles
    whose exterior forward orbits never return); the returned cycles are
    still completed in forward time.
    """
    if s_min <= 0 and math.hypot(*map(float, section.anchor)) == 0.0:
        s_min = max(s_min, 1e-6)
    if log_spacing:
        grid = np.geomspace(max(s_min, 1e-9), s_max, n_scan)
    else:
        grid = np.linspace(s_min, s_max, n_scan)
    dfun = lambda s: displacement(field, section, float(s), tol=tol,
                                  max_time=max_time, backward=backward)
    samples = [dfun(s) for s in grid]
    ok = [smp for smp in samples if smp.returned]

    continuum = (len(ok) >= 5
                 and sum(abs(smp.d) < CONTINUUM_TOL for smp in ok) >= 0.7 * len(ok))
    cycles: list[LimitCycle] = []
    grazes: list[float] = []
    if not continuum:
        # sign-change brackets between consecutive returned samples
        for prev, cur in zip(ok[:-1], ok[1:]):
            if prev.d * cur.d < 0.0:
                s0, d0 = _refine_root(dfun, prev.s, prev.d, cur.s, cur.d)
                if s0 is not None:
                    cycles.append(complete_cycle(field, section, s0, tol=tol,
                                                 max_time=max_time))
        # graze candidates: interior local minima of |d| below tolerance
        for i in range(1, len(ok) - 1):
            a, m, b = abs(ok[i - 1].d), abs(ok[i].d), abs(ok[i + 1].d)
            if m < GRAZE_TOL and m <= a and m <= b and ok[i - 1].d * ok[i + 1].d > 0:
                if not any(abs(c.s0 - ok[i].s) < 1e-6 for c in cycles):
                    grazes.append(ok[i].s)
    return CycleSearchResult(cycles=cycles, continuum=continuum,
                             graze_candidates=tuple(grazes), samples=tuple(samples))


def _divergence_multiplier(field: PlanarField, start, period: float,
                           tol: float = QUAD_TOL) -> float:
    """exp of the divergence integral along one period, minus one."""

    def rhs(t, s):
        x, y, _w = s
        p, q = field.rhs(x, y)
        return (p, q, field.divergence(x, y))

    traj = integrate_augmented(rhs, (start[0], start[1], 0.0), period, tol=tol)
    w = traj.end[2]
    return math.expm1(w)


def cycle_multiplier(cycle: LimitCycle, tol: float = QUAD_TOL) -> float:
    """d_s at the cycle from the divergence integral along the stored orbit."""
    return _divergence_multiplier(cycle.field, cycle.point, cycle.period, tol=tol)


def parameter_sensitivity(cycle: LimitCycle, which_param: str,
                          tol: float = QUAD_TOL) -> float:
    """Partial derivative of the displacement at the cycle with respect to
    one field parameter.

    The underlying object is the weighted wedge-product integral of
    f ^ f_mu (f ^ g = f1 g2 - f2 g1) along the orbit.  It is evaluated here
    through the equivalent inhomogeneous variational equation
    v' = J v + f_mu, v(0) = 0, which avoids the exponential weight entirely
    (for strongly contracting relaxation cycles the weight overflows), and
    with the exact transversality prefactor 1/(f ^ e) for a section of
    direction e: this reduces to the classical -w0/|f(p0)| for a section
    normal to the cycle, and the full-period exponential factor relating the
    two textbook weight conventions is validated against finite differences
    of d in the test suite.  Parameters absent from the field's stage have
    f_mu = 0 and yield 0.
    """
    if which_param not in PARAM_NAMES:
        raise UsageError(f"unknown parameter {which_param!r}")
    field = cycle.field
    if which_param not in field.active_params():
        return 0.0
    x0, y0 = cycle.point
    f0 = field.rhs(x0, y0)
    ex, ey = cycle.section.direction
    wedge_fe = f0[0] * ey - f0[1] * ex
    if abs(wedge_fe) < 1e-14:
        raise UsageError("field tangent to the section at the cycle point")

    eff = field.effective_params()
    ga, b2, c3 = eff.gamma - eff.a, 2.0 * eff.b, 3.0 * eff.c
    j12 = eff.gamma * eff.delta - 1.0
    j22 = -eff.delta
    partial = field.param_partial

    def rhs(t, s):
        x, y, v1, v2 = s
        p, q = field.rhs(x, y)
        j11 = ga + (b2 - c3 * x) * x
        dp, dq = partial(which_param, x, y)
        return (p, q, j11 * v1 + j12 * v2 + dp, v1 + j22 * v2 + dq)

    traj = integrate_augmented(rhs, (x0, y0, 0.0, 0.0), cycle.period, tol=tol)
    _, _, v1, v2 = traj.end
    fT = field.rhs(traj.end[0], traj.end[1])
    wedge_fv = fT[0] * v2 - fT[1] * v1
    return wedge_fv / wedge_fe


def multiplicity(field: PlanarField, section: Section, s0: float,
                 tol: float = 1e-6, d_tol: float = DEFAULT_TOL,
                 h_rel: float = 0.01, max_time: float = 1000.0) -> MultiplicityEstimate:
    """Estimate the cycle multiplicity at a displacement root.

    d_s comes from the divergence integral; d_ss from Richardson-extrapolated
    central second differences of d.  Returns m = 1 when |d_s| > tol, m = 2
    when d_s is flat but |d_ss| > tol, otherwise an at-least-three flag.  A
    noise floor larger than the requested tolerance marks the estimate
    inconclusive (the center annulus, where every derivative vanishes, is
    reported as inconclusive rather than high-multiplicity).
    """
    smp0 = displacement(field, section, s0, tol=d_tol, max_time=max_time)
    if not smp0.returned or abs(smp0.d) > max(10 * ROOT_TOL, tol):
        raise UsageError(f"s0={s0} is not a displacement root (d={smp0.d!r})")
    cyc = complete_cycle(field, section, s0, tol=d_tol, max_time=max_time)
    d_s = cyc.multiplier

    h = max(h_rel * max(abs(s0), 0.1), 1e-4)

    def d_at(s):
        smp = displacement(field, section, s, tol=d_tol, max_time=max_time)
        return smp.d if smp.returned else None

    def second_diff(hh):
        dp, dm = d_at(s0 + hh), d_at(s0 - hh)
        if dp is None or dm is None:
            return None
        return (dp - 2.0 * smp0.d + dm) / (hh * hh)

    c1, c2 = second_diff(h), second_diff(h / 2.0)
    if c1 is None or c2 is None:
        return MultiplicityEstimate(None, False, True, smp0.d, d_s, math.nan)
    d_ss = (4.0 * c2 - c1) / 3.0
    noise = 8.0 * ROOT_TOL / (h / 2.0) ** 2
    if abs(d_s) > tol:
        return MultiplicityEstimate(1, False, False, smp0.d, d_s, d_ss)
    if abs(d_ss) > max(tol, noise):
        return MultiplicityEstimate(2, False, False, smp0.d, d_s, d_ss)
    if noise > tol and abs(d_ss) <= noise:
        return MultiplicityEstimate(None, False, True, smp0.d, d_s, d_ss)
    return MultiplicityEstimate(None, True, False, smp0.d, d_s, d_ss)
