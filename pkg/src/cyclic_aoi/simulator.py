"""Discrete-event simulation of generate-at-will status updates over a lossy channel.

The transmitter works back to back: a slot samples its source, transmits for
a random service time, and the packet is dropped independently with the
source's drop probability. A delivered packet resets that source's age to
its own service time (it was generated when transmission started). The age
of each source is a piecewise-linear sawtooth and is integrated exactly.

Slots are processed batch by batch with numpy; each batch is a whole number
of cycles, and batch-level (area, duration) pairs give a ratio-estimator
standard error. Times inside a batch are kept relative to the batch start.

Randomness comes from independent streams, one per (source, purpose) plus
one for P-GAW slot choices, so that candidates in a P-GAW grid search see
common random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import Scenario
from .schedule import CyclicSchedule

KINDS = ("deterministic", "exponential", "gamma")
MEAN_RTOL = 1e-9


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceModel:
    kind: str
    mean: float
    variance: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SimulationError(f"unknown service kind {self.kind!r}; expected one of {KINDS}")
        if not self.mean > 0:
            raise SimulationError(f"service mean must be > 0, got {self.mean}")
        if self.kind == "deterministic":
            object.__setattr__(self, "variance", 0.0)
        elif self.kind == "exponential":
            object.__setattr__(self, "variance", float(self.mean) ** 2)
        elif not self.variance > 0:
            raise SimulationError("gamma service requires variance > 0")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "deterministic":
            return np.full(n, float(self.mean))
        if self.kind == "exponential":
            return rng.exponential(self.mean, n)
        shape = self.mean**2 / self.variance
        return rng.gamma(shape, self.variance / self.mean, n)


@dataclass(frozen=True)
class SimConfig:
    cycles: int = 100_000
    warmup_cycles: int = 1_000
    seed: int = 0
    batches: int = 30

    def __post_init__(self):
        if self.batches < 10:
            raise SimulationError(f"need at least 10 batches, got {self.batches}")
        if self.cycles < 100 * self.batches:
            raise SimulationError(f"cycles ({self.cycles}) must be >= 100 * batches ({self.batches})")
        if self.warmup_cycles < 0:
            raise SimulationError("warmup_cycles must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise SimulationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SimEstimate:
    aoi_mean: tuple[float, float]
    aoi_stderr: tuple[float, float]
    weighted_mean: float
    sim_time: float
    weighted_stderr: float = 0.0
    batch_means: tuple = field(default=(), repr=False, compare=False)


class _AgeTracker:
    """Carries one source's sawtooth across batch boundaries.

    ``t_last`` is the last delivery time relative to the current batch start
    (<= 0) and ``x_last`` the age right after that delivery.
    """

    def __init__(self):
        self.t_last = 0.0
        self.x_last = 0.0  # age 0 at time 0

    def integrate(self, d: np.ndarray, x: np.ndarray, horizon: float) -> float:
        base = np.concatenate(([self.t_last], d))
        age0 = np.concatenate(([self.x_last], x))
        lo = np.concatenate(([0.0], d))
        hi = np.concatenate((d, [horizon]))
        width = hi - lo
        area = float(np.sum(age0 * width + 0.5 * width * (hi + lo - 2 * base)))
        if len(d):
            self.t_last, self.x_last = float(d[-1]) - horizon, float(x[-1])
        else:
            self.t_last -= horizon
        return area


class _Streams:
    def __init__(self, seed: int):
        children = np.random.SeedSequence(seed).spawn(5)
        gens = [np.random.Generator(np.random.PCG64(c)) for c in children]
        self.service = {1: gens[0], 2: gens[1]}
        self.drop = {1: gens[2], 2: gens[3]}
        self.choice = gens[4]


def _check_models(sc: Scenario, svc1: ServiceModel, svc2: ServiceModel) -> None:
    for k, svc in ((1, svc1), (2, svc2)):
        want = sc.source(k).mean_service
        if not math.isclose(svc.mean, want, rel_tol=MEAN_RTOL):
            raise SimulationError(f"source {k}: service mean {svc.mean} != scenario mean {want}")


def _run(labels_for_batch, n_units: int, sc: Scenario, svcs, cfg: SimConfig, streams: _Streams) -> SimEstimate:
    """Drive the engine; ``labels_for_batch(k)`` returns a bool array (True = source 1) for k units."""
    trackers = {1: _AgeTracker(), 2: _AgeTracker()}
    drops = {1: sc.src1.drop_prob, 2: sc.src2.drop_prob}

    def step(units: int):
        is1 = labels_for_batch(units)
        dur = np.empty(len(is1))
        ok = np.empty(len(is1), dtype=bool)
        for k, mask in ((1, is1), (2, ~is1)):
            m = int(mask.sum())
            dur[mask] = svcs[k].sample(streams.service[k], m)
            ok[mask] = streams.drop[k].random(m) >= drops[k]
        ends = np.cumsum(dur)
        horizon = float(ends[-1]) if len(ends) else 0.0
        areas = {}
        for k, mask in ((1, is1), (2, ~is1)):
            hit = mask & ok
            areas[k] = trackers[k].integrate(ends[hit], dur[hit], horizon)
        return areas, horizon

    if cfg.warmup_cycles:
        step(cfg.warmup_cycles * n_units)

    sizes = [cfg.cycles // cfg.batches] * cfg.batches
    sizes[-1] += cfg.cycles - sum(sizes)
    area = np.empty((cfg.batches, 2))
    span = np.empty(cfg.batches)
    for b, size in enumerate(sizes):
        areas, horizon = step(size * n_units)
        area[b] = areas[1], areas[2]
        span[b] = horizon

    w = np.array([sc.src1.weight, sc.src2.weight])
    total_t = float(span.sum())
    means = area.sum(axis=0) / total_t
    stderr = [_ratio_stderr(area[:, k], span) for k in range(2)]
    w_area = area @ w
    return SimEstimate(
        aoi_mean=(float(means[0]), float(means[1])),
        aoi_stderr=(stderr[0], stderr[1]),
        weighted_mean=float(w @ means),
        sim_time=total_t,
        weighted_stderr=_ratio_stderr(w_area, span),
        batch_means=tuple(map(tuple, area / span[:, None])),
    )


def _ratio_stderr(num: np.ndarray, den: np.ndarray) -> float:
    """Standard error of sum(num)/sum(den) from per-batch pairs."""
    n = len(num)
    r = num.sum() / den.sum()
    resid = num - r * den
    return float(math.sqrt(np.sum(resid**2) / (n * (n - 1))) / den.mean())


def simulate_cyclic(s: CyclicSchedule, sc: Scenario, svc1: ServiceModel, svc2: ServiceModel,
                    cfg: SimConfig) -> SimEstimate:
    """Simulate ``cfg.cycles`` repetitions of the cycle ``s`` (after warmup)."""
    _check_models(sc, svc1, svc2)
    pattern = np.array([c == "1" for c in s.slots()])
    streams = _Streams(cfg.seed)
    return _run(lambda n: np.tile(pattern, n // len(pattern)), len(pattern), sc,
                {1: svc1, 2: svc2}, cfg, streams)


def simulate_pgaw(p1: float, sc: Scenario, svc1: ServiceModel, svc2: ServiceModel,
                  cfg: SimConfig) -> SimEstimate:
    """Each slot independently serves source 1 with probability ``p1``.

    There is no cycle here; ``cfg.cycles`` counts pairs of slots so the
    slot budget matches a round-robin run of the same config.
    """
    if not 0 < p1 < 1:
        raise SimulationError(f"p1 must lie strictly between 0 and 1, got {p1}")
    _check_models(sc, svc1, svc2)
    streams = _Streams(cfg.seed)
    return _run(lambda n: streams.choice.random(n) < p1, 2, sc, {1: svc1, 2: svc2}, cfg, streams)


def pgaw_grid(grid_step: float) -> list[float]:
    if not 0 < grid_step <= 0.1:
        raise SimulationError(f"grid_step must lie in (0, 0.1], got {grid_step}")
    return [k * grid_step for k in range(1, math.ceil(1 / grid_step - 1e-9))]


def pgaw_best(sc: Scenario, svc1: ServiceModel, svc2: ServiceModel, grid_step: float,
              cfg: SimConfig) -> tuple[float, SimEstimate]:
    """1-D exhaustive search over p1 on a uniform grid, common random numbers across candidates."""
    best = None
    for p1 in pgaw_grid(grid_step):
        est = simulate_pgaw(p1, sc, svc1, svc2, cfg)
        if best is None or est.weighted_mean < best[1].weighted_mean:
            best = (p1, est)
    return best


def service_models(sc: Scenario, kind1: str, kind2: str | None = None) -> tuple[ServiceModel, ServiceModel]:
    """Service models matching the scenario's means (and variances, for gamma)."""
    kind2 = kind2 or kind1
    return (ServiceModel(kind1, sc.src1.mean_service, sc.src1.var_service),
            ServiceModel(kind2, sc.src2.mean_service, sc.src2.var_service))
