"""Structural verification suites.

Each suite checks one empirical property of the system at its stated
tolerance and returns a VerifyResult; the CLI prints one pass/fail line per
suite and the acceptance tests assert on the same results.  Suites are
deterministic given their seeds.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .vectorfield import FhnParams, PlanarField, Stage, rotation_determinant
from .cycles import (find_cycles, displacement, section_through, complete_cycle,
                     cycle_multiplier, parameter_sensitivity, Stability)
from .continuation import (continue_branch, search_cusp, EventKind,
                           FOLD_RESIDUAL_TOL)
from .equilibria import (finite_equilibria, infinite_singularities, index_balance,
                         hopf_scan, poincare_index, EquilibriumLabel,
                         EquilibriumKind, InfiniteKind, Chart)
from .search import search_two_cycles, TwoCycleSearchResult

__all__ = ["VerifyResult", "SUITES", "run_suite",
           "verify_rotation", "verify_multiplier", "verify_sensitivity",
           "verify_hopf", "verify_index", "verify_infinity",
           "verify_two_cycles", "verify_fold", "verify_monotone",
           "verify_cusp", "verify_section_invariance"]


@dataclass
class VerifyResult:
    name: str
    passed: bool
    details: str = ""
    elapsed: float = 0.0
    data: dict = dc_field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.details} ({self.elapsed:.1f}s)"


def _timed(fn):
    def wrapper(*a, **kw):
        t0 = time.time()
        res = fn(*a, **kw)
        res.elapsed = time.time() - t0
        return res
    return wrapper


@_timed
def verify_rotation(n_samples: int = 100_000, seed: int = 7) -> VerifyResult:
    """Rotation-determinant signs over random points and parameters."""
    rng = np.random.default_rng(seed)
    bad = 0
    checked = 0
    n_sets = n_samples // 10
    for _ in range(n_sets):
        a, b, c, g, d = rng.uniform(0.0, 2.0, size=5)
        full = PlanarField(FhnParams(a=a, b=b, c=c, gamma=g, delta=d))
        flat = PlanarField(FhnParams(a=a, b=b, c=c, gamma=g, delta=0.0))
        pts = rng.uniform(-3.0, 3.0, size=(10, 2))
        for x, y in pts:
            dg = rotation_determinant(full, "gamma", (x, y))
            da = rotation_determinant(flat, "a", (x, y))
            dc = rotation_determinant(flat, "c", (x, y))
            q = x - d * y
            ok = (dg <= 0.0 and da >= 0.0 and dc >= 0.0
                  and (dg == 0.0) == (q == 0.0)
                  and (da == 0.0) == (x == 0.0)
                  and (dc == 0.0) == (x == 0.0))
            bad += not ok
            checked += 3
        # exact zero-set points
        y0 = float(rng.uniform(-2, 2))
        x0 = d * y0  # makes Q vanish exactly
        if rotation_determinant(full, "gamma", (x0, y0)) != 0.0:
            bad += 1
        if rotation_determinant(flat, "a", (0.0, y0)) != 0.0:
            bad += 1
        if rotation_determinant(flat, "c", (0.0, y0)) != 0.0:
            bad += 1
        checked += 3
    return VerifyResult("rotation", bad == 0,
                        f"{checked} sign checks, {bad} violations")


# cycle inventory shared by the multiplier/sensitivity suites
_CYCLE_SPECS = (
    (FhnParams(a=-0.1, b=0.0, c=1.0), Stage.LIENARD, 0.05, 3.0),
    (FhnParams(a=0.2, b=0.3, c=1.0, gamma=0.35), Stage.LIENARD, 0.05, 3.0),
    (FhnParams(a=0.0, b=0.5, c=0.5, gamma=0.3), Stage.LIENARD, 0.05, 4.0),
    (FhnParams(a=0.31, b=3.0, c=0.5, gamma=0.5, delta=0.2), Stage.FULL, 0.02, 1.0),
    (FhnParams(a=0.3, b=0.0, c=1.0, gamma=1.18, delta=0.5), Stage.FULL, 0.1, 2.0),
)


def _collect_cycles(max_cycles: int = 8):
    out = []
    for params, stage, s_lo, s_hi in _CYCLE_SPECS:
        field = PlanarField(params, stage)
        sec = section_through((0.0, 0.0))
        res = find_cycles(field, sec, s_lo, s_hi, n_scan=20, log_spacing=True,
                          max_time=400.0)
        for cyc in res:
            if cyc.stability is not Stability.SEMI_STABLE_CANDIDATE:
                out.append(cyc)
        if len(out) >= max_cycles:
            break
    return out


def _fd_displacement_slope(cyc, h: float = 1e-5) -> float:
    f, sec = cyc.field, cyc.section
    dp = displacement(f, sec, cyc.s0 + h, tol=1e-12)
    dm = displacement(f, sec, cyc.s0 - h, tol=1e-12)
    return (dp.d - dm.d) / (2.0 * h)


def _fd_param_slope(cyc, which: str, h: float = 1e-5) -> float:
    base = cyc.field
    fp = base.with_params(**{which: base.params.get(which) + h})
    fm = base.with_params(**{which: base.params.get(which) - h})
    dp = displacement(fp, cyc.section, cyc.s0, tol=1e-12)
    dm = displacement(fm, cyc.section, cyc.s0, tol=1e-12)
    return (dp.d - dm.d) / (2.0 * h)


@_timed
def verify_multiplier(rel_tol: float = 1e-4) -> VerifyResult:
    """Divergence-integral multiplier against finite differences of d."""
    cycles = _collect_cycles()
    if len(cycles) < 5:
        return VerifyResult("multiplier", False,
                            f"only {len(cycles)} cycles available")
    worst = 0.0
    for cyc in cycles:
        fd = _fd_displacement_slope(cyc)
        rel = abs(cyc.multiplier - fd) / max(abs(fd), 1e-8)
        worst = max(worst, rel)
    return VerifyResult("multiplier", worst <= rel_tol,
                        f"{len(cycles)} cycles, worst rel err {worst:.2e}",
                        data={"worst": worst})


@_timed
def verify_sensitivity(rel_tol: float = 1e-3) -> VerifyResult:
    """Wedge-integral parameter sensitivities against finite differences."""
    cycles = _collect_cycles()
    if len(cycles) < 5:
        return VerifyResult("sensitivity", False,
                            f"only {len(cycles)} cycles available")
    worst = 0.0
    for cyc in cycles:
        for which in ("gamma", "a"):
            sv = parameter_sensitivity(cyc, which)
            fd = _fd_param_slope(cyc, which)
            rel = abs(sv - fd) / max(abs(fd), 1e-8)
            worst = max(worst, rel)
    # delta absent from the Lienard stage: exact zero
    lien = [c for c in cycles if c.field.stage is Stage.LIENARD]
    zero_ok = all(parameter_sensitivity(c, "delta") == 0.0 for c in lien)
    ok = worst <= rel_tol and zero_ok
    return VerifyResult("sensitivity", ok,
                        f"{len(cycles)} cycles x (gamma, a), worst rel err {worst:.2e}",
                        data={"worst": worst})


@_timed
def verify_hopf(n_random: int = 10, tol: float = 1e-8, seed: int = 11) -> VerifyResult:
    """Trace-zero locus a* = gamma on the a-damped quadratic stage."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_random):
        g = float(rng.uniform(0.05, 0.95))
        b = float(rng.uniform(0.2, 2.0))
        res = hopf_scan(FhnParams(b=b, gamma=g), Stage.DAMPED, "a",
                        (0.0, 2.0 * g), EquilibriumLabel.O)
        if len(res.critical_values) != 1:
            return VerifyResult("hopf", False,
                                f"expected 1 critical value, got {res.critical_values}")
        worst = max(worst, abs(res.critical_values[0] - g))
    return VerifyResult("hopf", worst <= tol,
                        f"{n_random} random gamma, worst |a*-gamma| = {worst:.2e}")


def _random_simple_params(rng):
    for _ in range(200):
        p = FhnParams(a=float(rng.uniform(0, 2)), b=float(rng.uniform(0, 3)),
                      c=float(rng.uniform(0.05, 2)), gamma=float(rng.uniform(0, 2)),
                      delta=float(rng.uniform(0, 1.2)))
        eqs = finite_equilibria(p)
        if any(e.kind in (EquilibriumKind.SADDLE_NODE, EquilibriumKind.DEGENERATE)
               for e in eqs):
            continue
        J_ok = True
        fld = PlanarField(p)
        for e in eqs:
            J = fld.jacobian_at(e.location)
            if abs(np.linalg.det(J)) < 1e-6:
                J_ok = False
        if not J_ok:
            continue
        locs = [e.location for e in eqs]
        if len(locs) > 1:
            dmin = min(math.hypot(l1[0] - l2[0], l1[1] - l2[1])
                       for i, l1 in enumerate(locs) for l2 in locs[i + 1:])
            if dmin < 5e-2:
                continue
        return p, eqs
    raise RuntimeError("could not draw a simple parameter set")


@_timed
def verify_index(n_sets: int = 500, seed: int = 3) -> VerifyResult:
    """Index balance and index additivity over random simple parameter sets."""
    rng = np.random.default_rng(seed)
    n_balance_fail = 0
    n_add_fail = 0
    for _ in range(n_sets):
        p, eqs = _random_simple_params(rng)
        bal = index_balance(p)
        if not (bal.applicable and bal.holds):
            n_balance_fail += 1
            continue
        fld = PlanarField(p)
        locs = [e.location for e in eqs]
        if len(locs) > 1:
            dmin = min(math.hypot(l1[0] - l2[0], l1[1] - l2[1])
                       for i, l1 in enumerate(locs) for l2 in locs[i + 1:])
        else:
            dmin = 1.0
        r_small = min(0.4 * dmin, 0.3)
        total = 0
        for e in eqs:
            total += poincare_index(fld, (e.location, r_small))
        cx = sum(l[0] for l in locs) / len(locs)
        cy = sum(l[1] for l in locs) / len(locs)
        r_big = max(math.hypot(l[0] - cx, l[1] - cy) for l in locs) + max(1.0, dmin)
        big = poincare_index(fld, ((cx, cy), r_big))
        if total != big:
            n_add_fail += 1
    ok = n_balance_fail == 0 and n_add_fail == 0
    return VerifyResult("index", ok,
                        f"{n_sets} sets: {n_balance_fail} balance, "
                        f"{n_add_fail} additivity failures")


@_timed
def verify_infinity(n_sets: int = 100, seed: int = 5) -> VerifyResult:
    """Infinite singularity structure for c != 0."""
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n_sets):
        p = FhnParams(a=float(rng.uniform(0, 2)), b=float(rng.uniform(0, 3)),
                      c=float(rng.uniform(0.01, 3)), gamma=float(rng.uniform(0, 2)),
                      delta=float(rng.uniform(0, 1.5)))
        sing = infinite_singularities(p)
        ok = (len(sing) == 2
              and sing[0].chart is Chart.U_CHART and sing[0].location == 0.0
              and sing[0].kind is InfiniteKind.SIMPLE_NODE
              and sing[0].multiplicity_of_root == 1
              and sing[1].chart is Chart.V_CHART and sing[1].location == 0.0
              and sing[1].kind is InfiniteKind.TRIPLE_SADDLE
              and sing[1].multiplicity_of_root == 3)
        bad += not ok
    return VerifyResult("infinity", bad == 0, f"{n_sets} sets, {bad} mismatches")


@_timed
def verify_two_cycles(budget_seconds: float = 300.0) -> VerifyResult:
    """Automated search for a two-nested-cycle configuration."""
    hit = search_two_cycles(budget_seconds=budget_seconds)
    if hit is None:
        return VerifyResult("twocycle", False,
                            f"no configuration found within {budget_seconds:.0f}s")
    det = (f"params(a={hit.params.a:g}, b={hit.params.b:g}, c={hit.params.c:g}, "
           f"gamma={hit.params.gamma:g}, delta={hit.params.delta:g}); "
           f"s=({hit.s_inner:.4f}, {hit.s_outer:.4f}), "
           f"multipliers ({hit.multiplier_inner:+.4f}, {hit.multiplier_outer:+.4f})")
    return VerifyResult("twocycle", True, det, data={"result": hit})


@_timed
def verify_fold(two_cycle: TwoCycleSearchResult | None = None,
                c_range=None) -> VerifyResult:
    """Fold of the two-cycle pair under continuation in c, and cycle
    absence beyond it."""
    if two_cycle is None:
        two_cycle = search_two_cycles()
        if two_cycle is None:
            return VerifyResult("fold", False, "no two-cycle configuration")
    params = two_cycle.params
    if c_range is None:
        c_range = (max(params.c - 0.1, 0.05), params.c + 1.0)
    field = PlanarField(params)
    sec = section_through((0.0, 0.0))
    outer = complete_cycle(field, sec, two_cycle.s_outer)
    branch = continue_branch(outer, "c", c_range, step=0.04, max_step=0.15,
                             max_points=200)
    folds = [e for e in branch.events if e.kind is EventKind.FOLD]
    if not folds:
        return VerifyResult("fold", False,
                            f"no fold event (termination {branch.termination.value})",
                            data={"branch": branch})
    fold = folds[0]
    res_ok = all(r <= FOLD_RESIDUAL_TOL for r in fold.residuals)
    beyond = field.with_params(c=fold.param + 0.08)
    res = find_cycles(beyond, sec, 0.02, max(1.5, 2 * two_cycle.s_outer),
                      n_scan=24, log_spacing=True, max_time=400.0)
    none_beyond = len(res) == 0
    ok = res_ok and none_beyond
    return VerifyResult(
        "fold", ok,
        f"fold at c={fold.param:.6f}, residuals {tuple(f'{r:.1e}' for r in fold.residuals)}, "
        f"cycles beyond: {len(res)}",
        data={"branch": branch, "fold_c": fold.param})


@_timed
def verify_monotone(branches=None, slack: float = 1e-9) -> VerifyResult:
    """Amplitude monotonicity between events along branch arms."""
    if branches is None:
        fold_res = verify_fold()
        if not fold_res.passed:
            return VerifyResult("monotone", False, "fold branch unavailable")
        branches = [fold_res.data["branch"]]
    n_arms = 0
    n_bad = 0
    for br in branches:
        for arm in br.arms():
            amps = [p.amplitude for p in arm]
            if len(amps) < 3:
                continue
            n_arms += 1
            diffs = np.diff(amps)
            inc = np.all(diffs > -slack)
            dec = np.all(diffs < slack)
            if not (inc or dec):
                n_bad += 1
    return VerifyResult("monotone", n_bad == 0 and n_arms > 0,
                        f"{n_arms} arms checked, {n_bad} non-monotone")


@_timed
def verify_cusp(multistart: int = 200, seed: int = 17) -> VerifyResult:
    """Multiplicity-three search over the default box; emptiness expected."""
    base = PlanarField(FhnParams(a=0.3, b=3.0, c=0.5, gamma=0.5, delta=0.2))
    sec = section_through((0.0, 0.0))
    cands = search_cusp(base, sec, a_range=(0.0, 1.2), c_range=(0.1, 1.5),
                        gamma_range=(0.05, 1.5), s_range=(0.05, 2.0),
                        multistart=multistart, seed=seed)
    verified = [c for c in cands if max(c.residuals) <= 1e-8]
    return VerifyResult("cusp", len(verified) == 0,
                        f"{multistart} starts, {len(verified)} verified candidates",
                        data={"candidates": verified})


@_timed
def verify_section_invariance(angle: float = math.pi / 6) -> VerifyResult:
    """Cycle period/amplitude reproduction under section rotation."""
    specs = (
        (FhnParams(a=-0.1, b=0.0, c=1.0), Stage.LIENARD, 0.05, 3.0),
        (FhnParams(a=0.2, b=0.3, c=1.0, gamma=0.35), Stage.LIENARD, 0.05, 3.0),
    )
    worst_p = 0.0
    worst_a = 0.0
    n = 0
    for params, stage, lo, hi in specs:
        field = PlanarField(params, stage)
        base = find_cycles(field, section_through((0.0, 0.0)), lo, hi, n_scan=16)
        rot = find_cycles(field, section_through((0.0, 0.0), angle=angle),
                          lo, hi, n_scan=16)
        if len(base) != len(rot):
            return VerifyResult("section", False,
                                f"cycle count changed under rotation: "
                                f"{len(base)} vs {len(rot)}")
        for cb, cr in zip(sorted(base, key=lambda c: c.s0),
                          sorted(rot, key=lambda c: c.s0)):
            worst_p = max(worst_p, abs(cb.period - cr.period) / cb.period)
            worst_a = max(worst_a, abs(cb.amplitude - cr.amplitude))
            n += 1
    ok = worst_p <= 1e-6 and worst_a <= 1e-5
    return VerifyResult("section", ok,
                        f"{n} cycles: period rel {worst_p:.2e}, "
                        f"amplitude abs {worst_a:.2e}")


SUITES = {
    "rotation": verify_rotation,
    "multiplier": verify_multiplier,
    "sensitivity": verify_sensitivity,
    "hopf": verify_hopf,
    "index": verify_index,
    "infinity": verify_infinity,
    "twocycle": verify_two_cycles,
    "fold": verify_fold,
    "monotone": verify_monotone,
    "cusp": verify_cusp,
    "section": verify_section_invariance,
}


def run_suite(name: str, **kw) -> VerifyResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; valid: {sorted(SUITES)}")
    return SUITES[name](**kw)
