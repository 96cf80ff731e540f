"""One-parameter cycle families, fold-surface tracing, cusp search.

Branches of the displacement root d(s, mu) = 0 are followed by
pseudo-arclength predictor-corrector in the (s, mu) plane, so folds in the
parameter are traversed rather than crashed into.  The corrector's Jacobian
row (d_s, d_mu) comes from the closed-form return-map derivatives: the
divergence integral for d_s and the variational wedge integral for d_mu,
both evaluated along the current return orbit.

Fold points are polished by Newton on {d = 0, d_s = 0}; the same kernel,
grid-marched with warm starts over an (a, c) box, traces the fold surface.
The cusp search adds d_ss = 0 (Richardson finite differences) as a third
equation; for this system the expected result is an empty set.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .vectorfield import PlanarField, UsageError
from .odeint import Section, next_crossing, integrate_augmented, Crossing
from .cycles import (LimitCycle, displacement, find_cycles, complete_cycle,
                     section_through, ROOT_TOL)

__all__ = [
    "Branch",
    "BranchPoint",
    "BranchEvent",
    "EventKind",
    "TerminationKind",
    "FoldSurfaceSample",
    "continue_branch",
    "refine_fold",
    "trace_fold_surface",
    "search_cusp",
    "classify_termination",
    "CuspCandidate",
]

FOLD_RESIDUAL_TOL = 1e-8
DEFAULT_PERIOD_CAP = 500.0
DEFAULT_AMP_MIN = 5e-3


class EventKind(enum.Enum):
    FOLD = "fold"
    AMPLITUDE_TO_ZERO = "amplitude_to_zero"
    PERIOD_BLOWUP = "period_blowup"
    ESCAPED = "escaped"
    POSSIBLE_CYCLIC = "possible_cyclic"


class TerminationKind(enum.Enum):
    AMPLITUDE_TO_ZERO = "amplitude_to_zero"
    PERIOD_BLOWUP = "period_blowup"
    ESCAPED = "escaped"
    OPEN_EDGE_OF_SCAN = "open_edge_of_scan"
    POSSIBLE_CYCLIC = "possible_cyclic"
    CORRECTOR_FAILURE = "corrector_failure"


@dataclass(frozen=True)
class BranchPoint:
    param: float
    s0: float
    period: float
    amplitude: float
    multiplier: float


@dataclass(frozen=True)
class BranchEvent:
    kind: EventKind
    param: float
    s0: float | None = None
    residuals: tuple = ()


@dataclass
class Branch:
    param_name: str
    points: list[BranchPoint] = dc_field(default_factory=list)
    events: list[BranchEvent] = dc_field(default_factory=list)
    termination: TerminationKind = TerminationKind.OPEN_EDGE_OF_SCAN

    def arms(self) -> list[list[BranchPoint]]:
        """Monotone-parameter segments: the point list split where the
        continuation parameter reverses direction (at folds)."""
        pts = self.points
        if len(pts) < 2:
            return [list(pts)] if pts else []
        arms, cur = [], [pts[0]]
        direction = 0.0
        for prev, pt in zip(pts[:-1], pts[1:]):
            step = pt.param - prev.param
            if step != 0.0:
                if direction != 0.0 and step * direction < 0.0:
                    arms.append(cur)
                    cur = [prev]
                direction = step
            cur.append(pt)
        arms.append(cur)
        return arms


def _extrapolate_hopf(points, fallback_mu: float) -> float:
    """Critical parameter from a fit of mu against amplitude^2 (+ ^4)."""
    pts = points[-10:]
    if len(pts) < 3:
        return fallback_mu
    a2 = np.array([p.amplitude ** 2 for p in pts])
    mus = np.array([p.param for p in pts])
    if np.ptp(a2) <= 0:
        return fallback_mu
    deg = 2 if len(pts) >= 5 else 1
    coef = np.polyfit(a2, mus, deg)
    return float(coef[-1])


def _return_state(field: PlanarField, section: Section, s: float, which: str | None,
                  tol: float, max_time: float):
    """d, d_s, d_mu and period at one (s, params) point.

    d_s and d_mu use the exact return-map derivative formulas along the
    return orbit; they remain valid off the cycle, which is what the
    corrector needs.
    """
    start = section.point_at(s)
    cr = next_crossing(field, section, start, max_time, tol=tol)
    if not isinstance(cr, Crossing):
        return None
    T = cr.time
    ex, ey = section.direction
    eff = field.effective_params()
    ga, b2, c3 = eff.gamma - eff.a, 2.0 * eff.b, 3.0 * eff.c
    j12 = eff.gamma * eff.delta - 1.0
    j22 = -eff.delta
    partial = field.param_partial

    if which is None:
        def rhs(t, st):
            x, y, w = st
            p, q = field.rhs(x, y)
            return (p, q, ga + (b2 - c3 * x) * x + j22)
        traj = integrate_augmented(rhs, (start[0], start[1], 0.0), T, tol=1e-11)
        w_total = traj.end[2]
        v1 = v2 = 0.0
    else:
        def rhs(t, st):
            x, y, w, v1, v2 = st
            p, q = field.rhs(x, y)
            j11 = ga + (b2 - c3 * x) * x
            dp, dq = partial(which, x, y)
            return (p, q, j11 + j22,
                    j11 * v1 + j12 * v2 + dp, v1 + j22 * v2 + dq)
        traj = integrate_augmented(rhs, (start[0], start[1], 0.0, 0.0, 0.0), T,
                                   tol=1e-11)
        w_total, v1, v2 = traj.end[2], traj.end[3], traj.end[4]

    p0f = field.rhs(start[0], start[1])
    p1 = (traj.end[0], traj.end[1])
    p1f = field.rhs(p1[0], p1[1])
    we0 = p0f[0] * ey - p0f[1] * ex
    we1 = p1f[0] * ey - p1f[1] * ex
    if abs(we1) < 1e-14 or abs(we0) < 1e-14:
        return None
    d_s = (we0 / we1) * math.exp(w_total) - 1.0
    d_mu = (p1f[0] * v2 - p1f[1] * v1) / we1 if which is not None else math.nan
    return {"d": cr.s - s, "d_s": d_s, "d_mu": d_mu, "T": T}


def _corrector(field_of, section, s, mu, which, tangent, target, tol, max_time,
               max_iter=10, d_tol=1e-9):
    """Newton on {d(s, mu) = 0, tangent . (u - target) = 0}."""
    for _ in range(max_iter):
        fld = field_of(mu)
        st = _return_state(fld, section, s, which, tol, max_time)
        if st is None:
            return None
        r1 = st["d"]
        r2 = tangent[0] * (s - target[0]) + tangent[1] * (mu - target[1])
        if abs(r1) < d_tol and abs(r2) < 1e-12:
            return s, mu, st
        a11, a12 = st["d_s"], st["d_mu"]
        a21, a22 = tangent
        det = a11 * a22 - a12 * a21
        if abs(det) < 1e-14:
            return None
        ds = (-r1 * a22 + r2 * a12) / det
        dmu = (-a11 * r2 + a21 * r1) / det
        s, mu = s + ds, mu + dmu
        if not (math.isfinite(s) and math.isfinite(mu)):
            return None
    fld = field_of(mu)
    st = _return_state(fld, section, s, which, tol, max_time)
    if st is not None and abs(st["d"]) < 10 * d_tol:
        return s, mu, st
    return None


def continue_branch(start: LimitCycle, param_name: str = "gamma",
                    param_range: tuple = (0.0, 1.0),
                    step: float = 0.02, min_step: float = 1e-12,
                    max_step: float = 0.1, max_points: int = 400,
                    period_cap: float = DEFAULT_PERIOD_CAP,
                    amp_min: float = DEFAULT_AMP_MIN,
                    tol: float = 1e-10, max_time: float = 2000.0,
                    escape_amplitude: float = 1e3) -> Branch:
    """Continue a limit cycle in one parameter by pseudo-arclength.

    The branch starts at ``start`` (whose field parameters supply the
    initial mu from ``param_name``) and is pushed toward the far end of
    ``param_range``.  Recorded per point: parameter, section coordinate,
    period, amplitude, multiplier.  Terminates on fold-free range edges,
    amplitude collapse (with the critical parameter extrapolated from an
    amplitude^2 fit), period blowup, escape, corrector failure, or closing
    onto itself (flagged possible_cyclic, never asserted).
    """
    field0 = start.field
    if param_name not in field0.active_params():
        raise UsageError(f"{param_name!r} is not active in stage {field0.stage}")
    section = start.section
    mu0 = field0.effective_params().get(param_name)
    lo, hi = float(min(param_range)), float(max(param_range))
    direction = 1.0 if (hi - mu0) >= (mu0 - lo) else -1.0

    def field_of(mu):
        return field0.with_params(**{param_name: mu})

    branch = Branch(param_name=param_name)
    anchor = section.anchor

    def record(s, mu, st):
        T = st["T"]
        cyc_traj = integrate_augmented(
            lambda t, p: field_of(mu).rhs(p[0], p[1]), section.point_at(s), T,
            tol=1e-10)
        pts = cyc_traj.sample(np.linspace(0.0, T, 200))
        amp = float(np.hypot(pts[:, 0] - anchor[0], pts[:, 1] - anchor[1]).max())
        branch.points.append(BranchPoint(param=mu, s0=s, period=T,
                                         amplitude=amp, multiplier=st["d_s"]))
        return amp

    s, mu = start.s0, mu0
    st = _return_state(field_of(mu), section, s, param_name, tol, max_time)
    if st is None or abs(st["d"]) > 100 * ROOT_TOL:
        raise UsageError("continuation start is not a displacement root")
    amp = record(s, mu, st)
    s_scale = max(abs(s), 0.05)
    mu_scale = max(abs(mu), 0.1)

    grad = (st["d_s"], st["d_mu"])
    tau = (-grad[1] / mu_scale * s_scale, grad[0])
    nrm = math.hypot(tau[0] / s_scale, tau[1] / mu_scale)
    tau = (tau[0] / nrm, tau[1] / nrm)
    if tau[1] * direction < 0:
        tau = (-tau[0], -tau[1])

    h = step
    prev_mult = st["d_s"]
    u0 = (s, mu)
    while len(branch.points) < max_points:
        h_eff = min(h, max(0.5 * amp, 2.0 * amp_min, 10.0 * min_step))
        target = (s + h_eff * tau[0], mu + h_eff * tau[1])
        got = _corrector(field_of, section, target[0], target[1], param_name,
                         tau, target, tol, max_time)
        if got is None:
            if h > min_step:
                h = max(min_step, h / 2.0)
                continue
            last = branch.points[-1]
            if last.period > 0.2 * period_cap and len(branch.points) >= 3 and (
                    branch.points[-1].period > branch.points[-2].period):
                branch.events.append(BranchEvent(EventKind.PERIOD_BLOWUP, last.param, last.s0))
                branch.termination = TerminationKind.PERIOD_BLOWUP
            else:
                branch.termination = TerminationKind.CORRECTOR_FAILURE
            return branch
        s_new, mu_new, st_new = got
        if s_new * s != 0.0 and math.copysign(1.0, s_new) != math.copysign(1.0, s):
            # root crossed the anchor: cycle collapsed onto the equilibrium
            branch.events.append(BranchEvent(
                EventKind.AMPLITUDE_TO_ZERO, _extrapolate_hopf(branch.points, mu), 0.0))
            branch.termination = TerminationKind.AMPLITUDE_TO_ZERO
            return branch

        # fold: multiplier sign change along the branch
        if prev_mult * st_new["d_s"] < 0.0 and abs(prev_mult) > 1e-12:
            fold = refine_fold(field_of, section, 0.5 * (s + s_new),
                               0.5 * (mu + mu_new), param_name, tol, max_time)
            if fold is not None:
                fs, fmu, res = fold
                branch.events.append(BranchEvent(EventKind.FOLD, fmu, fs, res))

        s, mu, st = s_new, mu_new, st_new
        amp = record(s, mu, st)
        prev_mult = st["d_s"]

        # events / termination
        if amp < amp_min:
            branch.events.append(BranchEvent(
                EventKind.AMPLITUDE_TO_ZERO, _extrapolate_hopf(branch.points, mu), s))
            branch.termination = TerminationKind.AMPLITUDE_TO_ZERO
            return branch
        if st["T"] > period_cap:
            branch.events.append(BranchEvent(EventKind.PERIOD_BLOWUP, mu, s))
            branch.termination = TerminationKind.PERIOD_BLOWUP
            return branch
        if amp > escape_amplitude:
            branch.events.append(BranchEvent(EventKind.ESCAPED, mu, s))
            branch.termination = TerminationKind.ESCAPED
            return branch
        if not (lo - 1e-12 <= mu <= hi + 1e-12):
            branch.termination = TerminationKind.OPEN_EDGE_OF_SCAN
            return branch
        if (len(branch.points) > 10
                and math.hypot((s - u0[0]) / s_scale, (mu - u0[1]) / mu_scale) < h):
            branch.events.append(BranchEvent(EventKind.POSSIBLE_CYCLIC, mu, s))
            branch.termination = TerminationKind.POSSIBLE_CYCLIC
            return branch

        # new tangent, kept continuous
        grad = (st["d_s"], st["d_mu"])
        tau_new = (-grad[1] / mu_scale * s_scale, grad[0])
        nrm = math.hypot(tau_new[0] / s_scale, tau_new[1] / mu_scale)
        if nrm > 0:
            tau_new = (tau_new[0] / nrm, tau_new[1] / nrm)
            dot = (tau[0] * tau_new[0] / s_scale ** 2
                   + tau[1] * tau_new[1] / mu_scale ** 2)
            if dot < 0:
                tau_new = (-tau_new[0], -tau_new[1])
            tau = tau_new
        h = min(max_step, h * 1.3)
    branch.termination = TerminationKind.OPEN_EDGE_OF_SCAN
    return branch


def refine_fold(field_of, section: Section, s: float, mu: float, which: str,
                tol: float = 1e-10, max_time: float = 2000.0,
                max_iter: int = 14):
    """Newton on {d = 0, d_s = 0} in (s, mu); returns (s, mu, residuals)."""
    fd_s = 1e-6
    fd_mu = 1e-6
    for _ in range(max_iter):
        st = _return_state(field_of(mu), section, s, which, tol, max_time)
        if st is None:
            return None
        r = (st["d"], st["d_s"])
        if abs(r[0]) <= FOLD_RESIDUAL_TOL and abs(r[1]) <= FOLD_RESIDUAL_TOL:
            return s, mu, (abs(r[0]), abs(r[1]))
        sp = _return_state(field_of(mu), section, s + fd_s, which, tol, max_time)
        sm = _return_state(field_of(mu), section, s - fd_s, which, tol, max_time)
        mp = _return_state(field_of(mu + fd_mu), section, s, which, tol, max_time)
        mm = _return_state(field_of(mu - fd_mu), section, s, which, tol, max_time)
        if None in (sp, sm, mp, mm):
            return None
        a11, a12 = st["d_s"], st["d_mu"]
        a21 = (sp["d_s"] - sm["d_s"]) / (2 * fd_s)
        a22 = (mp["d_s"] - mm["d_s"]) / (2 * fd_mu)
        det = a11 * a22 - a12 * a21
        if abs(det) < 1e-14:
            return None
        ds = (-r[0] * a22 + r[1] * a12) / det
        dmu = (-a11 * r[1] + a21 * r[0]) / det
        # damped step with residual backtracking (the return map can switch
        # branches discontinuously a little beyond the fold)
        lim = max(abs(s), 0.1)
        fac = min(1.0, 0.3 * lim / max(abs(ds), 1e-30),
                  0.3 * max(abs(mu), 0.1) / max(abs(dmu), 1e-30))
        norm0 = abs(r[0]) + abs(r[1])
        for _ in range(5):
            s_try, mu_try = s + fac * ds, mu + fac * dmu
            if math.isfinite(s_try) and math.isfinite(mu_try):
                st_try = _return_state(field_of(mu_try), section, s_try, which,
                                       tol, max_time)
                if st_try is not None and \
                        abs(st_try["d"]) + abs(st_try["d_s"]) < 3.0 * norm0:
                    s, mu = s_try, mu_try
                    break
            fac *= 0.5
        else:
            return None
    return None


@dataclass(frozen=True)
class FoldSurfaceSample:
    a: float
    c: float
    gamma: float
    s0: float
    residuals: tuple[float, float]


def _node_fold(field_of, section, s_init, mu_init, which,
               tol=1e-10, max_time=2000.0, rounds=10):
    """Robust fold solve for grid nodes: alternate a displacement-peak
    search in s with a parameter root solve on d, then polish both
    coordinates with the closed-form derivatives.

    Plain two-variable Newton has a tiny basin here: just beyond the fold
    the return map switches branches (a section grazing), so off-curve
    finite differences of d_s are unreliable.
    """
    s, mu = float(s_init), float(mu_init)

    def state(ss, mm):
        return _return_state(field_of(mm), section, ss, which, tol, max_time)

    def d_only(ss, mm):
        smp = displacement(field_of(mm), section, ss, tol=tol,
                           max_time=max_time)
        return smp.d if smp.returned else None

    for _ in range(rounds):
        # hump peak in s (golden section; derivative-free, displacement only)
        lo, hi = 0.75 * s, 1.3 * s
        phi = 0.5 * (math.sqrt(5.0) - 1.0)
        x1 = hi - phi * (hi - lo)
        x2 = lo + phi * (hi - lo)
        f1 = d_only(x1, mu)
        f2 = d_only(x2, mu)
        if f1 is None or f2 is None:
            return None
        for _ in range(40):
            if hi - lo < 1e-7 * max(1.0, s):
                break
            if f1 < f2:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + phi * (hi - lo)
                f2 = d_only(x2, mu)
                if f2 is None:
                    return None
            else:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - phi * (hi - lo)
                f1 = d_only(x1, mu)
                if f1 is None:
                    return None
        s = 0.5 * (lo + hi)
        # 1-D polish of d_s in s using the closed-form derivative
        for _ in range(6):
            st = state(s, mu)
            if st is None:
                return None
            if abs(st["d_s"]) <= 0.1 * FOLD_RESIDUAL_TOL:
                break
            h_fd = 1e-7 * max(abs(s), 0.1)
            stp = state(s + h_fd, mu)
            stm = state(s - h_fd, mu)
            if stp is None or stm is None:
                break
            dss = (stp["d_s"] - stm["d_s"]) / (2 * h_fd)
            if not math.isfinite(dss) or dss == 0.0:
                break
            step = -st["d_s"] / dss
            if abs(step) > 0.2 * max(abs(s), 0.1):
                break
            s += step
        # parameter Newton on d with the closed-form d_mu
        st = state(s, mu)
        if st is None:
            return None
        if abs(st["d"]) <= FOLD_RESIDUAL_TOL and abs(st["d_s"]) <= FOLD_RESIDUAL_TOL:
            return s, mu, (abs(st["d"]), abs(st["d_s"]))
        if st["d_mu"] == 0.0 or not math.isfinite(st["d_mu"]):
            return None
        mu -= st["d"] / st["d_mu"]
    st = state(s, mu)
    if st is not None and abs(st["d"]) <= FOLD_RESIDUAL_TOL \
            and abs(st["d_s"]) <= FOLD_RESIDUAL_TOL:
        return s, mu, (abs(st["d"]), abs(st["d_s"]))
    return None


def trace_fold_surface(base_field: PlanarField, section: Section,
                       a_values, c_values, seed,
                       tol: float = 1e-10, max_time: float = 2000.0) -> list[FoldSurfaceSample]:
    """Grid-march the fold surface over an (a, c) box.

    ``seed`` is ((a0, c0), s0, gamma0), typically from a continue_branch
    fold event.  Each grid node runs Newton on {d = 0, d_s = 0} in
    (s, gamma), warm-started from its nearest already-solved neighbor;
    non-convergent nodes are absent from the result.
    """
    a_values = [float(v) for v in a_values]
    c_values = [float(v) for v in c_values]
    (a0, c0), s_seed, g_seed = seed
    i0 = int(np.argmin([abs(v - a0) for v in a_values]))
    j0 = int(np.argmin([abs(v - c0) for v in c_values]))

    solved: dict[tuple[int, int], tuple[float, float]] = {}
    out: list[FoldSurfaceSample] = []

    def solve(i, j, s_init, g_init):
        av, cv = a_values[i], c_values[j]
        field_of = lambda mu: base_field.with_params(a=av, c=cv, gamma=mu)
        got = _node_fold(field_of, section, s_init, g_init, "gamma",
                         tol=tol, max_time=max_time)
        if got is None:
            return None
        s_f, g_f, res = got
        solved[(i, j)] = (s_f, g_f)
        out.append(FoldSurfaceSample(a=av, c=cv, gamma=g_f, s0=s_f, residuals=res))
        return got

    if solve(i0, j0, s_seed, g_seed) is None:
        return []
    # breadth-first march with warm starts
    frontier = [(i0, j0)]
    visited = {(i0, j0)}
    while frontier:
        nxt = []
        for (i, j) in frontier:
            if (i, j) not in solved:
                continue
            s_w, g_w = solved[(i, j)]
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if not (0 <= ii < len(a_values) and 0 <= jj < len(c_values)):
                    continue
                if (ii, jj) in visited:
                    continue
                visited.add((ii, jj))
                solve(ii, jj, s_w, g_w)
                nxt.append((ii, jj))
        frontier = nxt
    return out


@dataclass(frozen=True)
class CuspCandidate:
    a: float
    c: float
    gamma: float
    s0: float
    residuals: tuple[float, float, float]


def _d_ss_richardson(field, section, s, tol, max_time, h=None):
    h = h or max(0.01 * max(abs(s), 0.1), 1e-4)

    def d_at(ss):
        smp = displacement(field, section, ss, tol=tol, max_time=max_time)
        return smp.d if smp.returned else None

    vals = {}
    for hh in (h, h / 2):
        dp, d0, dm = d_at(s + hh), d_at(s), d_at(s - hh)
        if None in (dp, d0, dm):
            return None
        vals[hh] = (dp - 2 * d0 + dm) / (hh * hh)
    return (4 * vals[h / 2] - vals[h]) / 3


def search_cusp(base_field: PlanarField, section: Section,
                a_range, c_range, gamma_range, s_range,
                multistart: int = 200, seed: int = 0,
                residual_tol: float = FOLD_RESIDUAL_TOL,
                tol: float = 1e-9, max_time: float = 1500.0,
                max_iter: int = 6) -> list[CuspCandidate]:
    """Newton multistart on {d = 0, d_s = 0, d_ss = 0} in (s, a, gamma).

    c stays fixed per start (sampled from its range).  Candidates must meet
    the residual tolerance in all three components and lie inside the box;
    an empty list is the expected (and meaningful) outcome for this system.
    """
    rng = np.random.default_rng(seed)
    cands: list[CuspCandidate] = []
    for _ in range(multistart):
        av = float(rng.uniform(*a_range))
        cv = float(rng.uniform(*c_range))
        gv = float(rng.uniform(*gamma_range))
        sv = float(rng.uniform(*s_range))

        def F(s, a, g):
            fld = base_field.with_params(a=a, c=cv, gamma=g)
            st = _return_state(fld, section, s, "gamma", tol, max_time)
            if st is None:
                return None
            dss = _d_ss_richardson(fld, section, s, tol, max_time)
            if dss is None:
                return None
            return np.array([st["d"], st["d_s"], dss])

        x = np.array([sv, av, gv])
        f0 = F(*x)
        if f0 is None or np.abs(f0[0]) > 1.0:
            continue  # fast path: no nearby cycle structure
        ok = False
        for _ in range(max_iter):
            if np.all(np.abs(f0) <= residual_tol):
                ok = True
                break
            J = np.empty((3, 3))
            hsteps = (1e-5 * max(abs(x[0]), 0.1),
                      1e-5 * max(abs(x[1]), 0.1),
                      1e-5 * max(abs(x[2]), 0.1))
            bad = False
            for k in range(3):
                xp = x.copy(); xp[k] += hsteps[k]
                xm = x.copy(); xm[k] -= hsteps[k]
                fp, fm = F(*xp), F(*xm)
                if fp is None or fm is None:
                    bad = True
                    break
                J[:, k] = (fp - fm) / (2 * hsteps[k])
            if bad:
                break
            try:
                dx = np.linalg.solve(J, -f0)
            except np.linalg.LinAlgError:
                break
            # damping against wild steps
            scale = np.array([max(abs(x[0]), 0.1), max(abs(x[1]), 0.1),
                              max(abs(x[2]), 0.1)])
            fac = min(1.0, float(0.5 / np.max(np.abs(dx) / scale)))
            x = x + fac * dx
            f1 = F(*x)
            if f1 is None or not np.all(np.isfinite(f1)):
                break
            f0 = f1
        if not ok:
            continue
        s_f, a_f, g_f = (float(v) for v in x)
        inside = (a_range[0] <= a_f <= a_range[1]
                  and gamma_range[0] <= g_f <= gamma_range[1]
                  and s_range[0] <= s_f <= s_range[1])
        if inside:
            cands.append(CuspCandidate(a=a_f, c=cv, gamma=g_f, s0=s_f,
                                       residuals=tuple(float(abs(v)) for v in f0)))
    return cands


def classify_termination(branch: Branch) -> str:
    """Map branch events to the open-family termination taxonomy."""
    t = branch.termination
    if t is TerminationKind.AMPLITUDE_TO_ZERO:
        return "singular_point"
    if t is TerminationKind.PERIOD_BLOWUP:
        return "separatrix_cycle"
    if t is TerminationKind.ESCAPED:
        return "unbounded"
    if t is TerminationKind.POSSIBLE_CYCLIC:
        return "possible_cyclic"
    if t is TerminationKind.OPEN_EDGE_OF_SCAN:
        return "open_edge_of_scan"
    return "undetermined"
