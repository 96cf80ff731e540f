"""Parameter-grid sweep counting limit cycles per nest.

At each (a, c, gamma) grid node (with b, delta fixed per slice) the finite
equilibria are computed, then displacement scans run on a section through
each antisaddle focus and on an outer section launched from the equilibria
centroid beyond the outermost equilibrium.  Sign-change brackets are
counted as cycles and each bracket's orbit bounding box decides its nest:
around a single antisaddle, or outer (encircling everything).  The headline
number is the maximum count in any single nest, expected to be at most two.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .vectorfield import FhnParams, PlanarField
from .odeint import next_crossing, integrate, Crossing
from .cycles import section_through, displacement
from .equilibria import finite_equilibria, EquilibriumLabel

__all__ = ["SweepConfig", "SweepNode", "SweepReport", "run_sweep", "count_node"]

SCAN_TOL = 1e-6
REFINE_TOL = 1e-8


@dataclass(frozen=True)
class SweepConfig:
    a_values: tuple
    c_values: tuple
    gamma_values: tuple
    slices: tuple            # ((b, delta), ...)
    n_scan: int = 10
    max_time: float = 60.0
    outer_cap: float = 40.0
    jobs: int = 1
    seed: int = 0

    @staticmethod
    def default() -> "SweepConfig":
        return SweepConfig(
            a_values=tuple(np.round(np.linspace(0.0, 1.0, 11), 10)),
            c_values=tuple(np.round(np.linspace(0.1, 1.1, 11), 10)),
            gamma_values=tuple(np.round(np.linspace(0.0, 2.0, 21), 10)),
            slices=((0.5, 0.2), (2.0, 0.5)),
        )


@dataclass
class SweepNode:
    index: tuple
    params: dict
    n_equilibria: int
    counts: dict             # nest label -> cycle count
    grazes: int
    failed: bool = False
    error: str = ""

    @property
    def max_nest_count(self) -> int:
        return max(self.counts.values(), default=0)


@dataclass
class SweepReport:
    config: SweepConfig
    nodes: list
    max_count: int
    violations: list = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _bracket_roots(field, section, s_lo, s_hi, n_scan, max_time):
    """Sign-change brackets of d over a log-spaced scan; returns (brackets,
    graze count)."""
    grid = np.geomspace(max(s_lo, 1e-9), s_hi, n_scan)
    samples = [displacement(field, section, float(s), tol=SCAN_TOL,
                            max_time=max_time) for s in grid]
    ok = [s for s in samples if s.returned]
    brackets = []
    for prev, cur in zip(ok[:-1], ok[1:]):
        if prev.d * cur.d < 0.0:
            brackets.append((prev.s, prev.d, cur.s, cur.d))
    grazes = 0
    for i in range(1, len(ok) - 1):
        a, m, b = abs(ok[i - 1].d), abs(ok[i].d), abs(ok[i + 1].d)
        if m < 1e-6 and m <= a and m <= b and ok[i - 1].d * ok[i + 1].d > 0:
            grazes += 1
    return brackets, grazes


def _locate(field, section, br, max_time, iters=24):
    """Cheap bisection of a bracket to localize the root."""
    a, fa, b, fb = br
    for _ in range(iters):
        m = 0.5 * (a + b)
        smp = displacement(field, section, m, tol=REFINE_TOL, max_time=max_time)
        if not smp.returned:
            break
        if abs(smp.d) < 1e-9 or (b - a) < 1e-9 * max(1.0, abs(m)):
            return m
        if fa * smp.d <= 0:
            b, fb = m, smp.d
        else:
            a, fa = m, smp.d
    return 0.5 * (a + b)


def _orbit_bbox(field, section, s0, max_time):
    start = section.point_at(s0)
    cr = next_crossing(field, section, start, max_time, tol=REFINE_TOL)
    if not isinstance(cr, Crossing):
        return None
    traj = integrate(field, start, cr.time, tol=1e-8)
    pts = traj.states
    return (pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max())


def _bbox_contains(bbox, pt, pad=0.0) -> bool:
    return (bbox[0] - pad <= pt[0] <= bbox[1] + pad
            and bbox[2] - pad <= pt[1] <= bbox[3] + pad)


def count_node(args) -> SweepNode:
    """Cycle counts per nest at one grid node.  Top-level for pickling."""
    index, a, c, g, b, delta, n_scan, max_time, outer_cap = args
    params = dict(a=a, b=b, c=c, gamma=g, delta=delta)
    try:
        p = FhnParams(**params)
        eqs = finite_equilibria(p)
        field = PlanarField(p)
        anti = [e for e in eqs if e.is_antisaddle]
        counts = {"O": 0, "A": 0, "other": 0, "outer": 0}
        grazes = 0
        locs = [e.location for e in eqs]

        for eq in anti:
            others = [l for l in locs if l != eq.location]
            if others:
                d_near = min(math.hypot(l[0] - eq.location[0], l[1] - eq.location[1])
                             for l in others)
                s_hi = 0.92 * d_near
            else:
                s_hi = outer_cap
            sec = section_through(eq.location)
            s_lo = max(1e-3, 2e-3 * s_hi)
            brs, gz = _bracket_roots(field, sec, s_lo, s_hi, n_scan, max_time)
            grazes += gz
            label = eq.label.value if eq.label in (EquilibriumLabel.O,
                                                   EquilibriumLabel.A) else "other"
            for br in brs:
                s0 = _locate(field, sec, br, max_time)
                bbox = _orbit_bbox(field, sec, s0, max_time)
                if bbox is not None and any(_bbox_contains(bbox, l) for l in
                                            (l for l in locs if l != eq.location)):
                    counts["outer"] += 1
                else:
                    counts[label] += 1

        if len(eqs) > 1 or not anti:
            cx = sum(l[0] for l in locs) / len(locs)
            cy = sum(l[1] for l in locs) / len(locs)
            r_out = max(math.hypot(l[0] - cx, l[1] - cy) for l in locs)
            sec = section_through((cx, cy))
            s_lo = max(1.05 * r_out, 1e-3)
            if s_lo < outer_cap:
                brs, gz = _bracket_roots(field, sec, s_lo, outer_cap,
                                         n_scan, max_time)
                grazes += gz
                counts["outer"] += len(brs)
        return SweepNode(index=index, params=params, n_equilibria=len(eqs),
                         counts=counts, grazes=grazes)
    except Exception as exc:  # per-node failures never abort the sweep
        return SweepNode(index=index, params=params, n_equilibria=0,
                         counts={}, grazes=0, failed=True, error=str(exc))


def run_sweep(config: SweepConfig, progress=None) -> SweepReport:
    tasks = []
    for si, (b, delta) in enumerate(config.slices):
        for ia, a in enumerate(config.a_values):
            for ic, c in enumerate(config.c_values):
                for ig, g in enumerate(config.gamma_values):
                    tasks.append(((si, ia, ic, ig), float(a), float(c), float(g),
                                  float(b), float(delta), config.n_scan,
                                  config.max_time, config.outer_cap))
    jobs = max(1, int(config.jobs))
    if jobs == 1:
        nodes = []
        for i, t in enumerate(tasks):
            nodes.append(count_node(t))
            if progress and (i + 1) % 200 == 0:
                progress(i + 1, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            nodes = list(pool.map(count_node, tasks, chunksize=16))
    nodes.sort(key=lambda n: n.index)
    max_count = max((n.max_nest_count for n in nodes if not n.failed), default=0)
    violations = [n for n in nodes if not n.failed and n.max_nest_count > 2]
    return SweepReport(config=config, nodes=nodes, max_count=max_count,
                       violations=violations)


def default_jobs() -> int:
    env = os.environ.get("FHN_BIFURC_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1
