"""Scenario config files, figure presets and parameter sweeps.

Config files are INI-style (``configparser``)::

    [source1]
    service = exponential     ; deterministic | exponential | gamma
    mean = 2
    variance = 4              ; gamma only; forced for the other kinds
    drop = 0.8
    weight = 0.2

    [source2]
    service = exponential
    mean = 3
    drop = 0.9
    weight = 0.8              ; optional, defaults to 1 - weight of source1

    [sweep]                   ; only needed by the sweep command
    varying = drop_prob_1     ; drop_prob_1 | mean_service_1 | weight_1
    grid = 0, 0.1, 0.2
    methods = optimal, pgaw, round_robin, insertion_search
    alpha = 200
    pgaw_step = 0.05

    [sim]                     ; optional; enables the simulation columns
    cycles = 100000
    batches = 30
    warmup = 1000
    seed = 0
"""

from __future__ import annotations

import configparser
import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

from .analytic import Scenario, ScenarioError, SourceParams, pgaw_weighted_aoi
from .optimizer import ROUND_ROBIN, insertion_search, near_optimal_search, rr_weighted_aoi
from .schedule import CyclicSchedule
from .simulator import (
    KINDS,
    ServiceModel,
    SimConfig,
    SimulationError,
    pgaw_best,
    pgaw_grid,
    simulate_cyclic,
)

VARYING = ("drop_prob_1", "mean_service_1", "weight_1")
METHODS = ("insertion_search", "optimal", "pgaw", "round_robin")
DEFAULT_ALPHA = 200
DEFAULT_PGAW_STEP = 0.05


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    varying: str
    grid: tuple[float, ...]
    scenario: Scenario
    service: tuple[str, str]
    methods: tuple[str, ...] = METHODS
    sim: Optional[SimConfig] = None
    alpha: int = DEFAULT_ALPHA
    pgaw_step: float = DEFAULT_PGAW_STEP

    def __post_init__(self):
        if self.varying not in VARYING:
            raise ConfigError(f"varying must be one of {VARYING}, got {self.varying!r}")
        if not self.grid:
            raise ConfigError("grid must be nonempty")
        if list(self.grid) != sorted(self.grid):
            raise ConfigError("grid must be ascending")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; expected a subset of {METHODS}")
        for x in self.grid:
            point_scenario(self, x)  # validates the domain


def _variance_for(kind: str, mean: float, variance: float) -> float:
    if kind == "deterministic":
        return 0.0
    if kind == "exponential":
        return mean * mean
    return variance


def point_scenario(spec: SweepSpec, x: float) -> Scenario:
    """Base scenario with the swept parameter set to ``x``."""
    s1, s2 = spec.scenario.src1, spec.scenario.src2
    try:
        if spec.varying == "drop_prob_1":
            s1 = replace(s1, drop_prob=x)
        elif spec.varying == "mean_service_1":
            s1 = replace(s1, mean_service=x, var_service=_variance_for(spec.service[0], x, s1.var_service))
        else:
            if not 0 < x < 1:
                raise ScenarioError(f"weight must lie in (0, 1), got {x}")
            s1, s2 = replace(s1, weight=x), replace(s2, weight=1.0 - x)
        return Scenario(s1, s2)
    except ScenarioError as exc:
        raise ConfigError(f"grid value {x} for {spec.varying}: {exc}") from None


def point_services(spec: SweepSpec, sc: Scenario) -> tuple[ServiceModel, ServiceModel]:
    return (ServiceModel(spec.service[0], sc.src1.mean_service, sc.src1.var_service),
            ServiceModel(spec.service[1], sc.src2.mean_service, sc.src2.var_service))


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def _preset(varying, grid, kind, s1, p, w1, s2, q, methods=METHODS) -> SweepSpec:
    sc = Scenario(
        SourceParams(s1, _variance_for(kind, s1, 0.0), p, w1),
        SourceParams(s2, _variance_for(kind, s2, 0.0), q, 1.0 - w1),
    )
    return SweepSpec(varying, tuple(grid), sc, (kind, kind), tuple(methods))


_P_GRID = tuple(round(0.1 * k, 10) for k in range(10))
_W_GRID = tuple(round(0.1 * k, 10) for k in range(1, 10))
_S_GRID = (0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0)

PRESETS = {
    # exponential services, s2=3, w=(0.2, 0.8), q=0.9; (a) s1=2 with p swept, (b) p=0.8 with s1 swept
    "fig4a": _preset("drop_prob_1", _P_GRID, "exponential", s1=2.0, p=0.0, w1=0.2, s2=3.0, q=0.9),
    "fig4b": _preset("mean_service_1", _S_GRID, "exponential", s1=2.0, p=0.8, w1=0.2, s2=3.0, q=0.9),
    # deterministic unit services
    "fig5": _preset("drop_prob_1", _P_GRID, "deterministic", s1=1.0, p=0.0, w1=0.5, s2=1.0, q=0.9),
    "fig6": _preset("weight_1", _W_GRID, "deterministic", s1=1.0, p=0.9, w1=0.5, s2=1.0, q=0.9),
}


def preset(name: str, sim: Optional[SimConfig] = None, alpha: int = DEFAULT_ALPHA) -> SweepSpec:
    try:
        spec = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None
    return replace(spec, sim=sim, alpha=alpha)


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

def _get(section, key, conv, default=None, required=True):
    if key not in section:
        if required and default is None:
            raise ConfigError(f"[{section.name}] missing required key {key!r}")
        return default
    raw = section[key]
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key} = {raw!r}: {exc}") from None


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(t) for t in raw.replace(";", ",").split(",") if t.strip())


def _words(raw: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in raw.split(",") if t.strip())


def _read(text: str, origin: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return cp


def _source(cp, name: str, fallback_weight: Optional[float] = None) -> tuple[SourceParams, str]:
    if name not in cp:
        raise ConfigError(f"missing section [{name}]")
    sec = cp[name]
    kind = _get(sec, "service", str, default="exponential")
    if kind not in KINDS:
        raise ConfigError(f"[{name}] service = {kind!r}: expected one of {KINDS}")
    mean = _get(sec, "mean", float)
    var = _get(sec, "variance", float, default=0.0, required=False)
    if kind == "gamma" and "variance" not in sec:
        raise ConfigError(f"[{name}] gamma service needs a variance")
    drop = _get(sec, "drop", float, default=0.0, required=False)
    weight = _get(sec, "weight", float, default=fallback_weight, required=fallback_weight is None)
    try:
        return SourceParams(mean, _variance_for(kind, mean, var), drop, weight), kind
    except ScenarioError as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def scenario_from_config(cp: configparser.ConfigParser) -> tuple[Scenario, tuple[str, str]]:
    src1, k1 = _source(cp, "source1")
    src2, k2 = _source(cp, "source2", fallback_weight=1.0 - src1.weight)
    try:
        return Scenario(src1, src2), (k1, k2)
    except ScenarioError as exc:
        raise ConfigError(str(exc)) from None


def sim_from_config(cp: configparser.ConfigParser) -> Optional[SimConfig]:
    if "sim" not in cp:
        return None
    sec = cp["sim"]
    d = SimConfig()
    try:
        return SimConfig(
            cycles=_get(sec, "cycles", int, default=d.cycles),
            warmup_cycles=_get(sec, "warmup", int, default=d.warmup_cycles, required=False),
            seed=_get(sec, "seed", int, default=d.seed),
            batches=_get(sec, "batches", int, default=d.batches),
        )
    except SimulationError as exc:
        raise ConfigError(f"[sim] {exc}") from None


def load_config(path) -> configparser.ConfigParser:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return _read(text, str(path))


def parse_config(text: str, origin: str = "<string>") -> configparser.ConfigParser:
    return _read(text, origin)


def sweep_from_config(cp: configparser.ConfigParser) -> SweepSpec:
    sc, kinds = scenario_from_config(cp)
    if "sweep" not in cp:
        raise ConfigError("missing section [sweep]")
    sec = cp["sweep"]
    return SweepSpec(
        varying=_get(sec, "varying", str),
        grid=_get(sec, "grid", _floats),
        scenario=sc,
        service=kinds,
        methods=tuple(sorted(_get(sec, "methods", _words, default=METHODS))),
        sim=sim_from_config(cp),
        alpha=_get(sec, "alpha", int, default=DEFAULT_ALPHA),
        pgaw_step=_get(sec, "pgaw_step", float, default=DEFAULT_PGAW_STEP),
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    param: float
    method: str
    analytic_aoi: float
    schedule: Optional[CyclicSchedule] = None
    sim_mean: Optional[float] = None
    sim_stderr: Optional[float] = None


def pgaw_analytic_best(sc: Scenario, grid_step: float) -> tuple[float, float]:
    """Best P-GAW probability on the grid using the exact P-GAW formula."""
    return min(((p1, pgaw_weighted_aoi(p1, sc)) for p1 in pgaw_grid(grid_step)), key=lambda t: t[1])


def evaluate_point(spec: SweepSpec, x: float) -> list[SweepRow]:
    sc = point_scenario(spec, x)
    svc = point_services(spec, sc)
    rows = []
    for method in sorted(spec.methods):
        sched = None
        if method == "round_robin":
            sched, value = ROUND_ROBIN, rr_weighted_aoi(sc)
        elif method == "optimal":
            res = near_optimal_search(sc, spec.alpha)
            sched, value = res.schedule, res.weighted_aoi
        elif method == "insertion_search":
            res = insertion_search(sc)
            sched, value = res.schedule, res.weighted_aoi
        else:
            _, value = pgaw_analytic_best(sc, spec.pgaw_step)
        sim_mean = sim_err = None
        if spec.sim is not None:
            if sched is None:
                _, est = pgaw_best(sc, *svc, spec.pgaw_step, spec.sim)
            else:
                est = simulate_cyclic(sched, sc, *svc, spec.sim)
            sim_mean, sim_err = est.weighted_mean, est.weighted_stderr
        rows.append(SweepRow(x, method, value, sched, sim_mean, sim_err))
    return rows


def _evaluate_packed(args):
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """All grid points; cells may run in worker processes, output order is fixed."""
    work = [(spec, x) for x in spec.grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_evaluate_packed, work))
    else:
        chunks = [evaluate_point(*w) for w in work]
    rows = [r for chunk in chunks for r in chunk]
    return sorted(rows, key=lambda r: (r.param, r.method))


def _fmt(x: float) -> str:
    return repr(float(x))


def rows_to_csv(rows: list[SweepRow], with_sim: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["param", "method", "analytic_aoi"]
    if with_sim:
        header += ["sim_mean", "sim_stderr"]
    w.writerow(header)
    for r in rows:
        line = [_fmt(r.param), r.method, _fmt(r.analytic_aoi)]
        if with_sim:
            line += [_fmt(r.sim_mean), _fmt(r.sim_stderr)]
        w.writerow(line)
    return buf.getvalue()


def write_sweep(spec: SweepSpec, out_path, jobs: int = 1) -> list[SweepRow]:
    rows = run_sweep(spec, jobs)
    text = rows_to_csv(rows, spec.sim is not None)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return rows
