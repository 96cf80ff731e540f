"""Saddle separatrices and homoclinic-loop detection.

Separatrix branches launch from small eigenvector offsets at a saddle and
run until escape, equilibrium capture, or a time cap.  Loop detection uses
a splitting function: the signed gap, measured on a short transversal
segment near the saddle, between the first incoming pass of an unstable
branch and the stable branch it would have to join.  A loop corresponds to
a zero of the splitting, bracketed and bisected in gamma.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .vectorfield import FhnParams, PlanarField, UsageError
from .odeint import integrate, Trajectory, TerminationReason
from .equilibria import finite_equilibria, Equilibrium, EquilibriumKind

__all__ = [
    "SeparatrixBranchSet",
    "SeparatrixBranch",
    "LoopKind",
    "LoopDetection",
    "separatrices",
    "splitting_function",
    "find_homoclinic",
]

EIGEN_RESIDUAL_TOL = 1e-10
BRACKET_WIDTH = 1e-8          # gamma bisection width
EIGHT_LOOP_COINCIDENCE = 1e-6  # both small-loop brackets within this -> eight loop


class LoopKind(enum.Enum):
    SMALL_O = "small_O"
    SMALL_A = "small_A"
    BIG = "big"
    EIGHT_LOOP = "eight_loop"
    NONE = "none"


@dataclass
class SeparatrixBranch:
    kind: str                 # "unstable_plus", "unstable_minus", "stable_plus", "stable_minus"
    eigenvalue: float
    eigenvector: tuple[float, float]
    trajectory: Trajectory
    outcome: str              # "escaped", "equilibrium_capture", "time_cap"

    @property
    def endpoint(self) -> tuple[float, float]:
        return self.trajectory.end


@dataclass
class SeparatrixBranchSet:
    saddle: Equilibrium
    unstable_plus: SeparatrixBranch
    unstable_minus: SeparatrixBranch
    stable_plus: SeparatrixBranch
    stable_minus: SeparatrixBranch

    def branches(self):
        return (self.unstable_plus, self.unstable_minus,
                self.stable_plus, self.stable_minus)


def _saddle_frame(field: PlanarField, saddle_loc):
    """Unit unstable/stable eigenvectors and eigenvalues at a saddle."""
    J = field.jacobian_at(saddle_loc)
    lam, V = np.linalg.eig(J)
    if np.iscomplexobj(lam) and np.abs(lam.imag).max() > 1e-12:
        raise UsageError("complex eigenvalues: not a saddle")
    lam = lam.real
    V = V.real
    iu = int(np.argmax(lam))
    if not (lam[iu] > 0 > lam[1 - iu]):
        raise UsageError("eigenvalues do not straddle zero: not a saddle")
    vu = V[:, iu] / np.linalg.norm(V[:, iu])
    vs = V[:, 1 - iu] / np.linalg.norm(V[:, 1 - iu])
    for v, l in ((vu, lam[iu]), (vs, lam[1 - iu])):
        res = np.linalg.norm(J @ v - l * v)
        if res > EIGEN_RESIDUAL_TOL:
            raise UsageError(f"eigenpair residual {res:.2e} above tolerance")
    return lam[iu], lam[1 - iu], vu, vs


def separatrices(params: FhnParams, saddle: Equilibrium, offset: float = 1e-7,
                 time_cap: float = 300.0, tol: float = 1e-10,
                 escape_radius: float = 1e4) -> SeparatrixBranchSet:
    """Launch the four separatrix branches of a saddle.

    Forward time along +/- the unstable eigenvector, backward time along
    +/- the stable one, each until escape, capture, or the time cap.
    """
    if not saddle.is_saddle:
        raise UsageError(f"equilibrium at {saddle.location} is not a saddle")
    if not (1e-8 <= offset <= 1e-5):
        raise UsageError("offset must lie in [1e-8, 1e-5]")
    field = PlanarField(params)
    lu, ls, vu, vs = _saddle_frame(field, saddle.location)
    x0, y0 = saddle.location

    def launch(vec, sign, backward, lam, kind):
        p0 = (x0 + sign * offset * vec[0], y0 + sign * offset * vec[1])
        traj = integrate(field, p0, time_cap, tol=tol, backward=backward,
                         escape_radius=escape_radius)
        outcome = {TerminationReason.ESCAPED_RADIUS: "escaped",
                   TerminationReason.EQUILIBRIUM_CAPTURE: "equilibrium_capture",
                   TerminationReason.REACHED_T_END: "time_cap"}[traj.reason]
        return SeparatrixBranch(kind=kind, eigenvalue=lam,
                                eigenvector=(float(vec[0]), float(vec[1])),
                                trajectory=traj, outcome=outcome)

    return SeparatrixBranchSet(
        saddle=saddle,
        unstable_plus=launch(vu, +1, False, lu, "unstable_plus"),
        unstable_minus=launch(vu, -1, False, lu, "unstable_minus"),
        stable_plus=launch(vs, +1, True, ls, "stable_plus"),
        stable_minus=launch(vs, -1, True, ls, "stable_minus"),
    )


def _dense_samples(traj: Trajectory, per_step: int = 4) -> np.ndarray:
    pts = []
    for step in traj.steps:
        for i in range(1, per_step + 1):
            pts.append(step.eval(step.t0 + step.h * i / per_step))
    if not pts:
        return np.asarray(traj.states, dtype=float)
    return np.asarray(pts, dtype=float)


def splitting_function(params: FhnParams, saddle_loc, u_side, s_side=None,
                       r_frac: float = 0.15, w_frac: float = 0.5,
                       offset_rel: float = 1e-7, time_cap: float = 600.0,
                       tol: float = 1e-10) -> float | None:
    """Signed separatrix gap near the saddle.

    The unstable branch launched toward ``u_side`` is compared against the
    local stable-manifold branch oriented toward ``s_side`` (default: same
    as u_side, the small-loop configuration; a big loop pairs opposite
    sides).  The value is the closest approach of the unstable branch to
    the stable branch's polyline, away from the saddle itself, signed by
    which side of the stable branch the pass occurs on: positive outside
    (away from the enclosed antisaddle), negative inside.  A loop is a zero.
    None when the unstable branch never comes near the stable branch.
    """
    if s_side is None:
        s_side = u_side
    field = PlanarField(params)
    _, _, vu, vs = _saddle_frame(field, saddle_loc)
    S = np.asarray(saddle_loc, dtype=float)
    to_u = np.asarray(u_side, dtype=float) - S
    to_s = np.asarray(s_side, dtype=float) - S
    scale = float(np.linalg.norm(to_u))
    if scale == 0.0 or float(np.linalg.norm(to_s)) == 0.0:
        raise UsageError("side reference coincides with saddle")
    if float(np.dot(vu, to_u)) < 0.0:
        vu = -vu
    if float(np.dot(vs, to_s)) < 0.0:
        vs = -vs
    eps = offset_rel * scale
    r_far = 1.8 * scale
    esc = float(np.hypot(*S)) + 2.5 * scale

    s_traj = integrate(field, tuple(S + eps * vs), time_cap, tol=tol,
                       backward=True, escape_radius=esc)
    u_traj = integrate(field, tuple(S + eps * vu), time_cap, tol=tol,
                       backward=False, escape_radius=esc)
    s_pts = _dense_samples(s_traj)
    u_pts = _dense_samples(u_traj)

    rs = np.hypot(s_pts[:, 0] - S[0], s_pts[:, 1] - S[1])
    s_keep = (rs > r_frac * scale) & (rs < r_far)
    if not s_keep.any():
        return None
    s_local = s_pts[s_keep]

    ru = np.hypot(u_pts[:, 0] - S[0], u_pts[:, 1] - S[1])
    # only passes after the branch has genuinely left the saddle
    exited = np.nonzero(ru > 0.5 * scale)[0]
    if exited.size == 0:
        return None
    u_keep = np.zeros(len(u_pts), dtype=bool)
    u_keep[exited[0]:] = True
    u_keep &= (ru > r_frac * scale) & (ru < r_far)
    if not u_keep.any():
        return None
    u_local = u_pts[u_keep]
    u_idx_full = np.nonzero(u_keep)[0]
    s_idx_full = np.nonzero(s_keep)[0]

    # coarse pass on decimated polylines, exact pass on a local window
    su = max(1, len(u_local) // 2000)
    ss = max(1, len(s_local) // 2000)
    uc, sc = u_local[::su], s_local[::ss]
    d2 = ((uc[:, 0, None] - sc[None, :, 0]) ** 2
          + (uc[:, 1, None] - sc[None, :, 1]) ** 2)
    iu_c, js_c = np.unravel_index(int(np.argmin(d2)), d2.shape)
    iu_lo = max(0, iu_c * su - 2 * su)
    iu_hi = min(len(u_local), iu_c * su + 2 * su + 1)
    js_lo = max(0, js_c * ss - 2 * ss)
    js_hi = min(len(s_local), js_c * ss + 2 * ss + 1)
    uw, sw = u_local[iu_lo:iu_hi], s_local[js_lo:js_hi]
    d2w = ((uw[:, 0, None] - sw[None, :, 0]) ** 2
           + (uw[:, 1, None] - sw[None, :, 1]) ** 2)
    iu_w, js_w = np.unravel_index(int(np.argmin(d2w)), d2w.shape)
    dmin = math.sqrt(float(d2w[iu_w, js_w]))
    if dmin > w_frac * scale:
        return None
    u_hit = uw[iu_w]
    js = js_lo + js_w
    # side of the stable polyline, referenced to the enclosed antisaddle
    j_full = int(s_idx_full[js])
    j0 = max(j_full - 1, 0)
    j1 = min(j_full + 1, len(s_pts) - 1)
    tang = s_pts[j1] - s_pts[j0]
    sq = s_local[js]
    side_u = math.copysign(1.0, float(np.cross(tang, u_hit - sq)))
    side_in = math.copysign(1.0, float(np.cross(tang, np.asarray(u_side) - sq)))
    return -dmin if side_u == side_in else dmin


@dataclass
class LoopDetection:
    loop_kind: LoopKind
    gamma_bracket: tuple[float, float] | None
    splitting: list = dc_field(default_factory=list)  # (gamma, value or None) trace

    @property
    def gamma_star(self) -> float | None:
        if self.gamma_bracket is None:
            return None
        return 0.5 * (self.gamma_bracket[0] + self.gamma_bracket[1])


def _pick_saddle_and_focus(params: FhnParams, enclosed: str):
    """The saddle plus the antisaddle named by ``enclosed``: label O or A,
    or LOW for the smallest-x antisaddle (the unnamed one in symmetric
    configurations where the origin itself is the saddle)."""
    eqs = finite_equilibria(params)
    saddles = [e for e in eqs if e.is_saddle]
    if not saddles:
        raise UsageError("no saddle at these parameters")
    saddle = saddles[0]
    anti = [e for e in eqs if e.is_antisaddle]
    if not anti:
        raise UsageError("no antisaddle at these parameters")
    if enclosed == "O":
        focus = next((e for e in anti if e.location == (0.0, 0.0)), None)
    elif enclosed == "A":
        focus = max(anti, key=lambda e: e.location[0])
    elif enclosed == "LOW":
        focus = min(anti, key=lambda e: e.location[0])
    else:
        raise UsageError(f"unknown enclosed side {enclosed!r}")
    if focus is None:
        raise UsageError(f"no enclosed antisaddle {enclosed!r}")
    return saddle, focus


def _bisect_splitting(split_of, lo, hi, f_lo, f_hi, width=BRACKET_WIDTH,
                      max_iter=120):
    """Bisect a sign change of a partially-defined function.

    When the midpoint value is undefined, any defined interior sample still
    shrinks the bracket while preserving the sign change at its endpoints.
    """
    trace = []
    for _ in range(max_iter):
        if hi - lo <= width:
            break
        got = None
        for t in (0.5, 0.375, 0.625, 0.25, 0.75, 0.125, 0.875):
            x = lo + t * (hi - lo)
            fx = split_of(x)
            trace.append((x, fx))
            if fx is not None:
                got = (x, fx)
                break
        if got is None:
            break
        x, fx = got
        if fx * f_lo <= 0.0:
            hi, f_hi = x, fx
        else:
            lo, f_lo = x, fx
    return (lo, hi), trace


def find_homoclinic(params: FhnParams, gamma_range, target: LoopKind = LoopKind.SMALL_A,
                    n_scan: int = 25, r_frac: float = 0.15, w_frac: float = 0.5,
                    time_cap: float = 600.0, tol: float = 1e-10) -> LoopDetection:
    """Bracket a separatrix loop in gamma by bisecting the splitting function.

    For small loops the splitting is measured on the side of the targeted
    antisaddle (label O or A).  BIG measures the two cross pairs (upper
    separatrices joining around both antisaddles).  EIGHT_LOOP runs both
    small-loop detections and reports a loop only when their brackets
    coincide within EIGHT_LOOP_COINCIDENCE.
    """
    lo, hi = float(gamma_range[0]), float(gamma_range[1])
    for g_chk in (lo, 0.5 * (lo + hi), hi):
        eqs = finite_equilibria(params.replace(gamma=g_chk))
        if not any(e.is_saddle for e in eqs):
            raise UsageError(f"no saddle at gamma={g_chk}: range not admissible")

    if target is LoopKind.EIGHT_LOOP:
        # both small loops, one per antisaddle flanking the saddle
        mid = params.replace(gamma=0.5 * (lo + hi))
        try:
            _pick_saddle_and_focus(mid, "O")
            second = "O"
        except UsageError:
            second = "LOW"
        det_a = _find_loop(params, (lo, hi), "A", LoopKind.SMALL_A, n_scan,
                           r_frac, w_frac, time_cap, tol)
        det_2 = _find_loop(params, (lo, hi), second,
                           LoopKind.SMALL_O if second == "O" else LoopKind.SMALL_A,
                           n_scan, r_frac, w_frac, time_cap, tol)
        if det_a.gamma_bracket is None or det_2.gamma_bracket is None:
            return LoopDetection(LoopKind.NONE, None,
                                 det_a.splitting + det_2.splitting)
        if abs(det_a.gamma_star - det_2.gamma_star) <= EIGHT_LOOP_COINCIDENCE:
            return LoopDetection(LoopKind.EIGHT_LOOP, det_a.gamma_bracket,
                                 det_a.splitting + det_2.splitting)
        return LoopDetection(LoopKind.NONE, None,
                             det_a.splitting + det_2.splitting)

    enclosed = {LoopKind.SMALL_O: "O", LoopKind.SMALL_A: "A",
                LoopKind.BIG: "BIG"}.get(target)
    if enclosed is None:
        raise UsageError(f"unsupported loop target {target!r}")
    return _find_loop(params, (lo, hi), enclosed, target, n_scan, r_frac,
                      w_frac, time_cap, tol)


def _find_loop(params, gamma_range, enclosed, report_kind, n_scan, r_frac,
               w_frac, time_cap, tol) -> LoopDetection:
    lo, hi = gamma_range

    def split_of(g):
        p = params.replace(gamma=g)
        try:
            if enclosed == "BIG":
                # big loop pairs the unstable branch on one antisaddle's side
                # with the stable branch on the other's
                saddle, f_hi = _pick_saddle_and_focus(p, "A")
                _, f_lo = _pick_saddle_and_focus(p, "LOW")
                if f_hi.location == f_lo.location:
                    S = np.asarray(saddle.location)
                    f_lo_loc = tuple(2 * S - np.asarray(f_hi.location))
                else:
                    f_lo_loc = f_lo.location
                return splitting_function(p, saddle.location, f_hi.location,
                                          f_lo_loc, r_frac, w_frac,
                                          time_cap=time_cap, tol=tol)
            saddle, focus = _pick_saddle_and_focus(p, enclosed)
            return splitting_function(p, saddle.location, focus.location,
                                      r_frac=r_frac, w_frac=w_frac,
                                      time_cap=time_cap, tol=tol)
        except UsageError:
            return None

    gs = np.linspace(lo, hi, n_scan)
    trace = []
    prev = None
    bracket = None
    for g in gs:
        val = split_of(float(g))
        trace.append((float(g), val))
        if val is not None and prev is not None and val * prev[1] < 0.0:
            bracket = (prev[0], float(g), prev[1], val)
            break
        if val is not None:
            prev = (float(g), val)
    if bracket is None:
        return LoopDetection(LoopKind.NONE, None, trace)
    (blo, bhi), btrace = _bisect_splitting(split_of, bracket[0], bracket[1],
                                           bracket[2], bracket[3])
    if bhi - blo > 10 * BRACKET_WIDTH:
        # bisection stalled on an undefined gap: no verified connection
        return LoopDetection(LoopKind.NONE, None, trace + btrace)
    return LoopDetection(report_kind, (blo, bhi), trace + btrace)
