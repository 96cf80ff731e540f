"""Command-line surface.

Subcommands: equilibria, portrait, cycles, continue, surface, homoclinic,
sweep, verify.  Each reads an optional key=value config file plus flags
(flags win), writes CSV / JSON-lines / SVG outputs into --out, and honors
the exit-code contract: 0 success, 1 usage error, 2 numerical failure,
3 verification violation.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .vectorfield import (FhnParams, PlanarField, Stage, nullclines,
                          UsageError, DomainError)
from .odeint import integrate, IntegrationError
from .cycles import find_cycles, section_through, complete_cycle
from .continuation import continue_branch, trace_fold_surface, EventKind
from .equilibria import finite_equilibria, infinite_singularities
from .separatrix import find_homoclinic, LoopKind
from .sweep import SweepConfig, run_sweep, default_jobs
from .verify import SUITES, run_suite
from .report import write_csv, write_jsonl, PortraitBuilder, fmt_float

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VIOLATION = 3

_STAGES = {s.value: s for s in Stage}

# keys accepted in config files / flags, per subcommand
_COMMON_KEYS = {"a", "b", "c", "gamma", "delta", "stage", "out", "tol"}
VALID_KEYS = {
    "equilibria": _COMMON_KEYS,
    "portrait": _COMMON_KEYS | {"x_min", "x_max", "y_min", "y_max",
                                "n_trajectories", "t_end", "with_cycles",
                                "s_min", "s_max", "n_scan"},
    "cycles": _COMMON_KEYS | {"s_min", "s_max", "n_scan", "anchor", "angle",
                              "backward", "max_time"},
    "continue": _COMMON_KEYS | {"s_min", "s_max", "n_scan", "backward",
                                "param", "range_lo", "range_hi", "step",
                                "period_cap", "amp_min", "max_points",
                                "max_time", "pick"},
    "surface": _COMMON_KEYS | {"a_min", "a_max", "a_n", "c_min", "c_max",
                               "c_n", "seed_s", "seed_gamma", "seed_a",
                               "seed_c"},
    "homoclinic": _COMMON_KEYS | {"gamma_lo", "gamma_hi", "target", "n_scan",
                                  "time_cap"},
    "sweep": {"out", "grid", "a_min", "a_max", "a_n", "c_min", "c_max", "c_n",
              "gamma_min", "gamma_max", "gamma_n", "slices", "n_scan",
              "max_time", "outer_cap", "jobs", "seed"},
    "verify": {"out", "suite", "budget", "multistart", "n_samples", "n_sets",
               "seed"},
}


def parse_config_file(path: str) -> dict:
    """Plain UTF-8 key=value lines; '#' starts a comment."""
    cfg = {}
    text = Path(path).read_text(encoding="utf-8")
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        cfg[key.strip()] = val.strip()
    return cfg


def merge_options(command: str, file_cfg: dict, flag_cfg: dict) -> dict:
    valid = VALID_KEYS[command]
    merged = {}
    for src in (file_cfg, flag_cfg):
        for k, v in src.items():
            if v is None:
                continue
            if k not in valid:
                raise UsageError(
                    f"unknown key {k!r} for {command}; valid keys: "
                    + ", ".join(sorted(valid)))
            merged[k] = v
    return merged


def _fget(opts, key, default):
    v = opts.get(key, default)
    return float(v) if v is not None else None


def _iget(opts, key, default):
    v = opts.get(key, default)
    return int(v) if v is not None else None


def _params_from(opts) -> FhnParams:
    return FhnParams(a=_fget(opts, "a", 0.0), b=_fget(opts, "b", 0.0),
                     c=_fget(opts, "c", 0.0), gamma=_fget(opts, "gamma", 0.0),
                     delta=_fget(opts, "delta", 0.0))


def _stage_from(opts) -> Stage:
    name = str(opts.get("stage", "full")).lower()
    if name not in _STAGES:
        raise UsageError(f"unknown stage {name!r}; valid: {sorted(_STAGES)}")
    return _STAGES[name]


def _outdir(opts) -> Path:
    out = Path(opts.get("out", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _section_from(opts, params, stage):
    anchor_spec = str(opts.get("anchor", "origin"))
    angle = _fget(opts, "angle", 0.0)
    if anchor_spec == "origin":
        anchor = (0.0, 0.0)
    elif anchor_spec == "focus":
        eqs = finite_equilibria(params, stage)
        foci = [e for e in eqs if e.is_antisaddle]
        if not foci:
            raise UsageError("no antisaddle to anchor the section at")
        anchor = foci[0].location
    else:
        try:
            sx, sy = anchor_spec.split(",")
            anchor = (float(sx), float(sy))
        except ValueError as exc:
            raise UsageError(f"bad anchor {anchor_spec!r}; use origin|focus|x,y") from exc
    return section_through(anchor, angle=angle)


# -- subcommand bodies ----------------------------------------------------

def cmd_equilibria(opts) -> int:
    params = _params_from(opts)
    stage = _stage_from(opts)
    out = _outdir(opts)
    eqs = finite_equilibria(params, stage)
    rows = []
    for e in eqs:
        lam1, lam2 = e.eigenvalues
        rows.append([e.location[0], e.location[1], e.kind.value, e.index,
                     e.label.value, lam1.real, lam1.imag, lam2.real, lam2.imag])
    write_csv(out / "equilibria.csv",
              ["x", "y", "kind", "index", "label",
               "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2"], rows)
    for e in eqs:
        print(f"({fmt_float(e.location[0])}, {fmt_float(e.location[1])}) "
              f"{e.kind.value} index={e.index} label={e.label.value}")
    if params.c != 0.0:
        for s in infinite_singularities(params):
            print(f"infinity {s.chart.value}: {s.kind.value} "
                  f"multiplicity={s.multiplicity_of_root}")
    return EXIT_OK


def cmd_portrait(opts) -> int:
    params = _params_from(opts)
    stage = _stage_from(opts)
    out = _outdir(opts)
    field = PlanarField(params, stage)
    x0, x1 = _fget(opts, "x_min", -2.0), _fget(opts, "x_max", 2.0)
    y0, y1 = _fget(opts, "y_min", -2.0), _fget(opts, "y_max", 2.0)
    n_traj = _iget(opts, "n_trajectories", 12)
    t_end = _fget(opts, "t_end", 30.0)
    pb = PortraitBuilder()
    nc = nullclines(field, (x0, x1), 200)
    for curve in nc.v_curves:
        pb.add_nullcline(curve)
    pb.add_nullcline(nc.w_curve)
    side = max(2, int(math.sqrt(n_traj)))
    for xs in np.linspace(x0, x1, side):
        for ys in np.linspace(y0, y1, side):
            try:
                traj = integrate(field, (float(xs), float(ys)), t_end, tol=1e-7)
            except IntegrationError:
                continue
            keep = (np.abs(traj.states[:, 0]) < 10 * max(abs(x0), abs(x1))) & \
                   (np.abs(traj.states[:, 1]) < 10 * max(abs(y0), abs(y1)))
            pb.add_trajectory(traj.states[keep])
    for e in finite_equilibria(params, stage):
        pb.add_equilibrium(e.location[0], e.location[1], e.kind.value)
    if str(opts.get("with_cycles", "0")) not in ("0", "false", "no"):
        sec = section_through((0.0, 0.0))
        res = find_cycles(field, sec, _fget(opts, "s_min", 0.05),
                          _fget(opts, "s_max", 3.0),
                          n_scan=_iget(opts, "n_scan", 16))
        for cyc in res:
            pb.add_cycle(cyc.orbit)
    pb.write(out / "portrait.svg")
    print(f"portrait written to {out / 'portrait.svg'}")
    return EXIT_OK


def _cycles_rows(cycles):
    rows = []
    for cyc in cycles:
        rows.append([cyc.s0, cyc.period, cyc.amplitude, cyc.multiplier,
                     cyc.stability.value, cyc.orientation])
    return rows


def cmd_cycles(opts) -> int:
    params = _params_from(opts)
    stage = _stage_from(opts)
    out = _outdir(opts)
    field = PlanarField(params, stage)
    sec = _section_from(opts, params, stage)
    res = find_cycles(field, sec, _fget(opts, "s_min", 0.02),
                      _fget(opts, "s_max", 3.0),
                      n_scan=_iget(opts, "n_scan", 20),
                      backward=str(opts.get("backward", "0")) not in ("0", "false"),
                      max_time=_fget(opts, "max_time", 600.0),
                      log_spacing=True)
    write_csv(out / "cycles.csv",
              ["s0", "period", "amplitude", "multiplier", "stability",
               "orientation"], _cycles_rows(res))
    print(f"{len(res)} cycle(s); continuum={res.continuum}; "
          f"grazes={len(res.graze_candidates)}")
    for cyc in res:
        print(f"  s0={cyc.s0:.8f} T={cyc.period:.6f} amp={cyc.amplitude:.6f} "
              f"mult={cyc.multiplier:+.6f} {cyc.stability.value}")
    return EXIT_OK


def cmd_continue(opts) -> int:
    params = _params_from(opts)
    stage = _stage_from(opts)
    out = _outdir(opts)
    field = PlanarField(params, stage)
    sec = _section_from(opts, params, stage)
    res = find_cycles(field, sec, _fget(opts, "s_min", 0.02),
                      _fget(opts, "s_max", 3.0),
                      n_scan=_iget(opts, "n_scan", 20),
                      backward=str(opts.get("backward", "0")) not in ("0", "false"),
                      log_spacing=True)
    if not len(res):
        print("no starting cycle found", file=sys.stderr)
        return EXIT_NUMERICAL
    pick = _iget(opts, "pick", 0)
    start = sorted(res.cycles, key=lambda cyc: cyc.s0)[min(pick, len(res) - 1)]
    which = str(opts.get("param", "gamma"))
    lo = _fget(opts, "range_lo", 0.0)
    hi = _fget(opts, "range_hi", 1.0)
    branch = continue_branch(
        start, which, (lo, hi), step=_fget(opts, "step", 0.02),
        max_points=_iget(opts, "max_points", 400),
        period_cap=_fget(opts, "period_cap", 500.0),
        amp_min=_fget(opts, "amp_min", 5e-3))
    write_csv(out / "branch.csv",
              ["param", "s0", "period", "amplitude", "multiplier"],
              [[p.param, p.s0, p.period, p.amplitude, p.multiplier]
               for p in branch.points])
    write_jsonl(out / "branch_events.jsonl",
                [{"kind": e.kind.value, "param": e.param, "s0": e.s0,
                  "residuals": list(e.residuals)} for e in branch.events]
                + [{"kind": "termination", "value": branch.termination.value}])
    print(f"{len(branch.points)} points, termination={branch.termination.value}")
    for e in branch.events:
        print(f"  event {e.kind.value} at {which}={e.param:.8f}")
    return EXIT_OK


def cmd_surface(opts) -> int:
    params = _params_from(opts)
    out = _outdir(opts)
    base = PlanarField(params, Stage.FULL)
    sec = section_through((0.0, 0.0))
    a_vals = np.linspace(_fget(opts, "a_min", 0.25), _fget(opts, "a_max", 0.37),
                         _iget(opts, "a_n", 5))
    c_vals = np.linspace(_fget(opts, "c_min", 0.8), _fget(opts, "c_max", 1.6),
                         _iget(opts, "c_n", 5))
    seed = ((_fget(opts, "seed_a", params.a), _fget(opts, "seed_c", params.c)),
            _fget(opts, "seed_s", 0.15), _fget(opts, "seed_gamma", params.gamma))
    samples = trace_fold_surface(base, sec, a_vals, c_vals, seed)
    write_csv(out / "surface.csv",
              ["a", "c", "gamma", "s0", "residual_d", "residual_ds"],
              [[s.a, s.c, s.gamma, s.s0, s.residuals[0], s.residuals[1]]
               for s in samples])
    print(f"{len(samples)} fold-surface samples over "
          f"{len(a_vals)}x{len(c_vals)} grid")
    return EXIT_OK if samples else EXIT_NUMERICAL


def cmd_homoclinic(opts) -> int:
    params = _params_from(opts)
    out = _outdir(opts)
    target_name = str(opts.get("target", "small_A"))
    try:
        target = LoopKind(target_name)
    except ValueError as exc:
        raise UsageError(f"unknown loop target {target_name!r}; valid: "
                         + ", ".join(k.value for k in LoopKind)) from exc
    det = find_homoclinic(params,
                          (_fget(opts, "gamma_lo", 0.0),
                           _fget(opts, "gamma_hi", 1.0)),
                          target,
                          n_scan=_iget(opts, "n_scan", 17),
                          time_cap=_fget(opts, "time_cap", 400.0))
    write_jsonl(out / "homoclinic.jsonl",
                [{"gamma": g, "splitting": v} for g, v in det.splitting]
                + [{"loop_kind": det.loop_kind.value,
                    "gamma_bracket": list(det.gamma_bracket)
                    if det.gamma_bracket else None}])
    if det.gamma_bracket:
        print(f"{det.loop_kind.value} bracket gamma in "
              f"[{det.gamma_bracket[0]:.10f}, {det.gamma_bracket[1]:.10f}]")
    else:
        print("no loop detected; splitting trace written")
    return EXIT_OK


def _sweep_config(opts) -> SweepConfig:
    if str(opts.get("grid", "")) == "default" or not opts.keys() - {"out", "jobs", "grid"}:
        base = SweepConfig.default()
        return SweepConfig(base.a_values, base.c_values, base.gamma_values,
                           base.slices, base.n_scan, base.max_time,
                           base.outer_cap,
                           jobs=_iget(opts, "jobs", default_jobs()),
                           seed=_iget(opts, "seed", 0))
    slices = []
    for part in str(opts.get("slices", "0.5:0.2;2.0:0.5")).split(";"):
        b_s, d_s = part.split(":")
        slices.append((float(b_s), float(d_s)))
    return SweepConfig(
        a_values=tuple(np.linspace(_fget(opts, "a_min", 0.0),
                                   _fget(opts, "a_max", 1.0),
                                   _iget(opts, "a_n", 11))),
        c_values=tuple(np.linspace(_fget(opts, "c_min", 0.1),
                                   _fget(opts, "c_max", 1.1),
                                   _iget(opts, "c_n", 11))),
        gamma_values=tuple(np.linspace(_fget(opts, "gamma_min", 0.0),
                                       _fget(opts, "gamma_max", 2.0),
                                       _iget(opts, "gamma_n", 21))),
        slices=tuple(slices),
        n_scan=_iget(opts, "n_scan", 10),
        max_time=_fget(opts, "max_time", 60.0),
        outer_cap=_fget(opts, "outer_cap", 40.0),
        jobs=_iget(opts, "jobs", default_jobs()),
        seed=_iget(opts, "seed", 0))


def cmd_sweep(opts) -> int:
    out = _outdir(opts)
    config = _sweep_config(opts)
    report = run_sweep(config, progress=lambda i, n: print(f"  {i}/{n} nodes"))
    records = []
    for node in report.nodes:
        records.append({"index": list(node.index), "params": node.params,
                        "n_equilibria": node.n_equilibria,
                        "counts": node.counts, "grazes": node.grazes,
                        "failed": node.failed, "error": node.error})
    records.append({"summary": {"max_count": report.max_count,
                                "n_nodes": len(report.nodes),
                                "n_failed": sum(n.failed for n in report.nodes),
                                "violations": [list(v.index)
                                               for v in report.violations]}})
    write_jsonl(out / "sweep.jsonl", records)
    print(f"swept {len(report.nodes)} nodes; max nest count = {report.max_count}; "
          f"{len(report.violations)} violation(s)")
    if report.violations:
        for v in report.violations:
            print(f"  VIOLATION at {v.index}: params={v.params} counts={v.counts}")
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_verify(opts) -> int:
    suite = str(opts.get("suite", "rotation"))
    names = sorted(SUITES) if suite == "all" else [suite]
    kw_map = {
        "rotation": {"n_samples": _iget(opts, "n_samples", 100_000)},
        "index": {"n_sets": _iget(opts, "n_sets", 500)},
        "infinity": {"n_sets": _iget(opts, "n_sets", 100)},
        "twocycle": {"budget_seconds": _fget(opts, "budget", 300.0)},
        "cusp": {"multistart": _iget(opts, "multistart", 200)},
    }
    any_fail = False
    for name in names:
        if name not in SUITES:
            raise UsageError(f"unknown suite {name!r}; valid: "
                             + ", ".join(sorted(SUITES) + ["all"]))
        res = run_suite(name, **kw_map.get(name, {}))
        print(res.line())
        any_fail |= not res.passed
    return EXIT_VIOLATION if any_fail else EXIT_OK


_COMMANDS = {
    "equilibria": cmd_equilibria,
    "portrait": cmd_portrait,
    "cycles": cmd_cycles,
    "continue": cmd_continue,
    "surface": cmd_surface,
    "homoclinic": cmd_homoclinic,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fhn-bifurc",
        description="Bifurcation analysis of the FitzHugh-Nagumo canonical system")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value config file")
        keys = VALID_KEYS[name]
        for key in sorted(keys):
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        file_cfg = parse_config_file(ns.config) if ns.config else {}
        flag_cfg = {k: v for k, v in vars(ns).items()
                    if k not in ("command", "config")}
        opts = merge_options(ns.command, file_cfg, flag_cfg)
        return _COMMANDS[ns.command](opts)
    except (UsageError, DomainError, KeyError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IntegrationError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
