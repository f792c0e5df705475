"""Command line entry point: ``cyclic-aoi <command> ...``.

Exit status: 0 on success, 1 when ``validate`` finds a failing check,
2 on usage, parse or input errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import analytic as an
from .checks import SCALES, run_all
from .experiments import (
    DEFAULT_ALPHA,
    ConfigError,
    PRESETS,
    load_config,
    point_scenario,
    preset,
    scenario_from_config,
    sim_from_config,
    sweep_from_config,
    write_sweep,
)
from .optimizer import SearchError, insertion_search, near_optimal_search, rr_weighted_aoi
from .schedule import ScheduleError, from_slots
from .simulator import SimConfig, SimulationError, service_models, simulate_cyclic, simulate_pgaw

USAGE_ERRORS = (ConfigError, ScheduleError, an.ScenarioError, SimulationError, SearchError)


def _scenario_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--config", help="INI scenario file ([source1], [source2] sections)")
    g.add_argument("--preset", choices=sorted(PRESETS), help="use a figure preset's scenario")
    p.add_argument("--at", type=float, help="value of the preset's swept parameter (default: first grid point)")


def _sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cycles", type=int, help="simulated cycles after warmup")
    p.add_argument("--seed", type=int, help="RNG seed (unsigned 64-bit)")
    p.add_argument("--batches", type=int, help="batches for standard errors")


def _load_scenario(args):
    """(scenario, (kind1, kind2), sim config from file or None)."""
    if args.config:
        cp = load_config(args.config)
        sc, kinds = scenario_from_config(cp)
        return sc, kinds, sim_from_config(cp)
    spec = PRESETS[args.preset]
    x = spec.grid[0] if args.at is None else args.at
    return point_scenario(spec, x), spec.service, None


def _sim_config(args, base: SimConfig | None) -> SimConfig:
    base = base or SimConfig()
    return SimConfig(
        cycles=args.cycles if args.cycles is not None else base.cycles,
        warmup_cycles=base.warmup_cycles,
        seed=args.seed if args.seed is not None else base.seed,
        batches=args.batches if args.batches is not None else base.batches,
    )


def cmd_analyze(args) -> int:
    s = from_slots(args.schedule)
    sc, _, _ = _load_scenario(args)
    print(f"schedule {s.slots()}  (u={s.u}, u1={s.u1}, r={list(s.r)})")
    for k in (1, 2):
        b = an.aoi_closed_form(s, sc, k)
        print(f"source {k}: AoI = {b.total:.10g}   f = {b.f:.10g}  g = {b.g:.10g}  h = {b.h:.10g}")
    print(f"weighted AoI = {an.weighted_aoi(s, sc):.10g}")
    return 0


def cmd_optimize(args) -> int:
    sc, _, _ = _load_scenario(args)
    rr = rr_weighted_aoi(sc)
    opt = near_optimal_search(sc, args.alpha)
    ins = insertion_search(sc, args.max_cycle)
    print(f"a range: [{opt.a_range[0]:.6g}, {opt.a_range[1]:.6g}]")
    print(f"round-robin      : 12  weighted AoI = {rr:.10g}")
    for name, res in (("near-optimal", opt), ("insertion search", ins)):
        s = res.schedule
        print(f"{name:<17}: {s.slots()}  (u1={s.u1}, u2={s.u2})  weighted AoI = {res.weighted_aoi:.10g}"
              f"  [{res.evaluations} evaluations]")
    return 0


def cmd_simulate(args) -> int:
    sc, kinds, file_sim = _load_scenario(args)
    cfg = _sim_config(args, file_sim)
    svc = service_models(sc, *kinds)
    if args.pgaw is not None:
        est = simulate_pgaw(args.pgaw, sc, *svc, cfg)
        exact = (an.pgaw_aoi(args.pgaw, sc, 1), an.pgaw_aoi(args.pgaw, sc, 2))
        label = f"P-GAW p1={args.pgaw}"
    else:
        s = from_slots(args.schedule)
        est = simulate_cyclic(s, sc, *svc, cfg)
        exact = (an.aoi(s, sc, 1), an.aoi(s, sc, 2))
        label = s.slots()
    print(f"{label}: {cfg.cycles} cycles, {cfg.batches} batches, seed {cfg.seed}")
    for k in (0, 1):
        print(f"source {k + 1}: sim {est.aoi_mean[k]:.6g} +/- {est.aoi_stderr[k]:.3g}   analytic {exact[k]:.6g}")
    print(f"weighted: sim {est.weighted_mean:.6g} +/- {est.weighted_stderr:.3g}")
    return 0


def cmd_sweep(args) -> int:
    if args.config:
        spec = sweep_from_config(load_config(args.config))
        if args.cycles is not None or args.seed is not None:
            spec = _with_sim(spec, args)
    else:
        spec = preset(args.preset, alpha=args.alpha)
        if args.cycles is not None:
            spec = _with_sim(spec, args)
    rows = write_sweep(spec, args.out, jobs=args.jobs)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _with_sim(spec, args):
    return replace(spec, sim=_sim_config(args, spec.sim))


def cmd_validate(args) -> int:
    results = run_all(args.scale)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.ok]
    print("ALL CHECKS PASSED" if not failed else f"FAILED: {', '.join(failed)}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclic-aoi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="exact per-source and weighted AoI of a schedule")
    p.add_argument("schedule", help="slot string over '1' and '2', e.g. 12122")
    _scenario_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("optimize", help="near-optimal and insertion-search schedules")
    _scenario_args(p)
    p.add_argument("--alpha", type=int, default=DEFAULT_ALPHA)
    p.add_argument("--max-cycle", type=int, default=None, help="insertion-search cycle cap")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="discrete-event estimate next to the analytic value")
    p.add_argument("schedule", nargs="?", default="12")
    p.add_argument("--pgaw", type=float, default=None, help="simulate P-GAW with this p1 instead")
    _scenario_args(p)
    _sim_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--config")
    g.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=int, default=DEFAULT_ALPHA)
    p.add_argument("--jobs", type=int, default=1)
    _sim_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the oracle suite")
    p.add_argument("--scale", choices=sorted(SCALES), default="quick")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
