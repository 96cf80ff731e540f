"""Budgeted search for a two-nested-cycle configuration.

The search walks candidate (b, c, gamma, delta) combinations, places a at
the trace-zero point of the origin plus a small offset (the side where the
origin is a stable focus), and scans the displacement along a ray from the
origin.  Exactly two sign changes with an unstable inner root and a stable
outer root is a hit.  Deterministic given the same candidate list and
budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, asdict

import numpy as np

from .vectorfield import FhnParams, PlanarField
from .cycles import find_cycles, section_through, Stability

__all__ = ["TwoCycleSearchResult", "search_two_cycles", "DEFAULT_CANDIDATES"]

# (b, c, gamma, delta, a-offsets) tried in order
DEFAULT_CANDIDATES = tuple(
    (b, c, g, d, (0.01, 0.02, 0.005))
    for d in (0.2, 0.1, 0.3)
    for g in (0.5, 0.3, 0.8)
    for b in (3.0, 2.0)
    for c in (0.5, 1.0, 0.2)
)


@dataclass(frozen=True)
class TwoCycleSearchResult:
    params: FhnParams
    s_inner: float
    s_outer: float
    multiplier_inner: float
    multiplier_outer: float
    evaluations: int
    elapsed: float

    def as_dict(self) -> dict:
        d = asdict(self)
        d["params"] = asdict(self.params)
        return d


def _single_equilibrium(params: FhnParams) -> bool:
    if params.delta == 0.0:
        return True
    k0 = -(params.gamma * params.delta - 1.0) / params.delta - params.gamma + params.a
    return params.b * params.b - 4.0 * params.c * k0 < 0.0


def search_two_cycles(candidates=DEFAULT_CANDIDATES, s_min: float = 0.02,
                      s_max: float = 1.5, n_scan: int = 20,
                      budget_seconds: float = 300.0,
                      max_candidates: int = 60) -> TwoCycleSearchResult | None:
    """First candidate configuration carrying exactly two nested cycles
    with opposite-sign multipliers, or None within the budget."""
    t0 = time.time()
    n_eval = 0
    for (b, c, g, d, offsets) in candidates[:max_candidates]:
        a_star = g - d  # trace of the origin Jacobian vanishes here
        if a_star < 0:
            continue
        for da in offsets:
            if time.time() - t0 > budget_seconds:
                return None
            a = a_star + da
            params = FhnParams(a=a, b=b, c=c, gamma=g, delta=d)
            if not _single_equilibrium(params):
                continue
            field = PlanarField(params)
            sec = section_through((0.0, 0.0))
            res = find_cycles(field, sec, s_min, s_max, n_scan=n_scan,
                              log_spacing=True, max_time=400.0)
            n_eval += n_scan
            if len(res) != 2:
                continue
            inner, outer = sorted(res.cycles, key=lambda cyc: cyc.s0)
            if (inner.stability is Stability.UNSTABLE
                    and outer.stability is Stability.STABLE
                    and inner.multiplier * outer.multiplier < 0.0):
                return TwoCycleSearchResult(
                    params=params, s_inner=inner.s0, s_outer=outer.s0,
                    multiplier_inner=inner.multiplier,
                    multiplier_outer=outer.multiplier,
                    evaluations=n_eval, elapsed=time.time() - t0)
    return None
