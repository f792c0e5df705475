"""Oracle suite behind ``cyclic-aoi validate``.

Each check returns a :class:`CheckResult`; nothing here raises on a failed
comparison, so one broken check does not hide the others.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analytic as an
from .optimizer import brute_force, near_optimal_search, uniform_placement
from .schedule import CyclicSchedule, all_cycles, compositions, dual, r_tilde_all
from .simulator import SimConfig, service_models, simulate_cyclic

P_GRID = (0.0, 0.3, 0.7, 0.95)
SV_GRID = ((1.0, 0.0), (2.0, 4.0), (3.0, 9.0))
PLACEMENT_PS = (0.0, 0.3, 0.7, 0.95)
REFERENCE_PLACEMENT = (3, 4, 4, 4, 3, 4, 4, 4, 3, 4, 4)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


@_timed
def check_stationary(max_u1: int = 12, ps=(0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99)) -> CheckResult:
    worst = 0.0
    for u1 in range(1, max_u1 + 1):
        for p in ps:
            P = an.transition_matrix(u1, p)
            if not np.allclose(P.sum(axis=1), 1.0, atol=1e-13, rtol=0):
                return CheckResult("stationary", False, f"transition matrix not stochastic at u1={u1}, p={p}")
            worst = max(worst, float(np.max(np.abs(an.stationary(u1, p) - an.stationary_power_iteration(u1, p)))))
    return CheckResult("stationary", worst <= 1e-12, f"max |closed - power iteration| = {worst:.2e} (u1 <= {max_u1})")


def _scenarios():
    for (s1, v1), (s2, v2) in itertools.product(SV_GRID, SV_GRID):
        for p, q in itertools.product(P_GRID, P_GRID):
            yield an.Scenario.of(s1, v1, p, 0.5, s2, v2, q)


@_timed
def check_formula_equivalence(max_u: int = 8) -> CheckResult:
    worst, n = 0.0, 0
    cycles = list(all_cycles(max_u))
    for sc in _scenarios():
        for s in cycles:
            for k in (1, 2):
                worst = max(worst, _rel(an.aoi_general(s, sc, k), an.aoi_closed_form(s, sc, k).total))
                n += 1
    return CheckResult("formula_equivalence", worst <= 1e-10,
                       f"{n} comparisons over u <= {max_u}, max rel diff {worst:.2e}")


@_timed
def check_aggregate_sums(max_u: int = 8) -> CheckResult:
    worst, n = 0.0, 0
    cycles = list(all_cycles(max_u))
    for sc in _scenarios():
        for s in cycles:
            for k in (1, 2):
                direct = an.aggregate_sums(s, sc, k)
                closed = an.aggregate_sums_closed(s, sc, k)
                worst = max(worst, _rel(closed[0], direct[0]), _rel(closed[1], direct[1]))
                n += 1
    return CheckResult("aggregate_sums", worst <= 1e-10, f"{n} comparisons, max rel diff {worst:.2e}")


def placement_objective(r, p: float) -> float:
    rt = r_tilde_all(r).astype(float)
    return float(np.sum(rt * np.power(p, np.arange(len(r)))))


@_timed
def check_placement_optimality(placement: Callable[[int, int], tuple] = uniform_placement,
                               max_u1: int = 5, max_u2: int = 12, ps=PLACEMENT_PS) -> CheckResult:
    """``placement`` must minimize sum_i r_tilde(i) p^(i-1) for every (u1, u2) and p.

    Also checks that the dual of the arrangement minimizes source 2's sum.
    """
    bad = []
    for u1 in range(1, max_u1 + 1):
        for u2 in range(1, max_u2 + 1):
            cands = list(compositions(u2, u1))
            r = tuple(placement(u1, u2))
            rd = dual(CyclicSchedule.from_placement(r)).r
            duals = [dual(CyclicSchedule.from_placement(c)).r for c in cands]
            for p in ps:
                best = min(placement_objective(c, p) for c in cands)
                got = placement_objective(r, p)
                if got > best * (1 + 1e-12) + 1e-12:
                    bad.append(f"(u1={u1}, u2={u2}, p={p}): {r} gives {got:g} > {best:g}")
                best_d = min(placement_objective(d, p) for d in duals)
                got_d = placement_objective(rd, p)
                if got_d > best_d * (1 + 1e-12) + 1e-12:
                    bad.append(f"dual (u1={u1}, u2={u2}, p={p}): {got_d:g} > {best_d:g}")
    got_ref = tuple(placement(11, 41))
    if got_ref != REFERENCE_PLACEMENT:
        bad.append(f"(11, 41) -> {got_ref}, expected {REFERENCE_PLACEMENT}")
    detail = f"u1 <= {max_u1}, u2 <= {max_u2}" if not bad else f"{len(bad)} failures, e.g. {bad[0]}"
    return CheckResult("placement_optimality", not bad, detail)


def random_sim_cases(n: int, seed: int = 2024):
    """Deterministically drawn (schedule, scenario, service-kind) triples."""
    rng = np.random.default_rng(seed)
    kinds = ("deterministic", "exponential", "gamma")
    cases = []
    pool = [s for s in all_cycles(7)]
    for _ in range(n):
        s = pool[rng.integers(len(pool))]
        kind = kinds[rng.integers(3)]
        s1, s2 = (float(x) for x in np.round(rng.uniform(0.5, 3.0, 2), 2))
        v1, v2 = (float(x) for x in np.round(rng.uniform(0.1, 4.0, 2), 2))
        p, q = (float(x) for x in np.round(rng.uniform(0.0, 0.9, 2), 2))
        w1 = float(np.round(rng.uniform(0.1, 0.9), 2))
        cases.append((s, an.Scenario.of(s1, v1, p, w1, s2, v2, q), kind))
    return cases


def _zscore(estimate: float, exact: float, stderr: float) -> float:
    err = abs(estimate - exact)
    if err <= 1e-9 * max(1.0, abs(exact)):
        return 0.0
    return err / stderr if stderr > 0 else float("inf")


def sim_agreement(cases, cycles: int, batches: int = 30, seed: int = 7, n_sigma: float = 3.0):
    """Yield (case, estimate, analytic, z-scores, ok) per case."""
    for idx, (s, sc, kind) in enumerate(cases):
        svc1, svc2 = service_models(sc, kind)
        sc_used = an.Scenario(
            an.SourceParams(svc1.mean, svc1.variance, sc.src1.drop_prob, sc.src1.weight),
            an.SourceParams(svc2.mean, svc2.variance, sc.src2.drop_prob, sc.src2.weight),
        )
        est = simulate_cyclic(s, sc_used, svc1, svc2, SimConfig(cycles=cycles, batches=batches, seed=seed + idx))
        exact = (an.aoi(s, sc_used, 1), an.aoi(s, sc_used, 2))
        z = tuple(_zscore(est.aoi_mean[k], exact[k], est.aoi_stderr[k]) for k in range(2))
        yield (s, sc_used, kind), est, exact, z, max(z) <= n_sigma


@_timed
def check_simulation(n_cases: int = 20, cycles: int = 1_000_000) -> CheckResult:
    fails, zmax = [], 0.0
    for (s, sc, kind), _, _, z, ok in sim_agreement(random_sim_cases(n_cases), cycles):
        zmax = max(zmax, *z)
        if not ok:
            fails.append(f"{s.slots()} {kind} z={max(z):.2f}")
    # drop-free deterministic runs are periodic, hence exact
    worst = 0.0
    for slots in ("12", "12122", "1122212"):
        s = CyclicSchedule.parse(slots)
        sc = an.Scenario.of(1.0, 0.0, 0.0, 0.4, 2.0, 0.0, 0.0)
        est = simulate_cyclic(s, sc, *service_models(sc, "deterministic"), SimConfig(cycles=10_000, batches=10))
        worst = max(worst, *(abs(est.aoi_mean[k] - an.aoi(s, sc, k + 1)) for k in range(2)))
    ok = not fails and worst <= 1e-9
    detail = f"{n_cases} random cases x 2 sources, max z {zmax:.2f}; deterministic max abs err {worst:.1e}"
    if fails:
        detail += f"; outside 3 stderr: {fails}"
    return CheckResult("simulation_agreement", ok, detail)


def near_opt_scenarios():
    """Ten fixed scenarios for the brute-force cross-check."""
    return [
        an.Scenario.of(2.0, 4.0, 0.8, 0.2, 3.0, 9.0, 0.9),
        an.Scenario.of(1.0, 0.0, 0.5, 0.5, 1.0, 0.0, 0.9),
        an.Scenario.of(1.0, 0.0, 0.9, 0.3, 1.0, 0.0, 0.9),
        an.Scenario.of(1.0, 1.0, 0.0, 0.5, 2.0, 4.0, 0.0),
        an.Scenario.of(0.5, 0.25, 0.3, 0.6, 2.0, 4.0, 0.7),
        an.Scenario.of(3.0, 0.0, 0.1, 0.7, 1.0, 0.0, 0.5),
        an.Scenario.of(1.5, 2.0, 0.95, 0.5, 1.0, 0.5, 0.2),
        an.Scenario.of(1.0, 0.0, 0.0, 0.25, 1.0, 0.0, 0.0),
        an.Scenario.of(2.0, 1.0, 0.6, 0.4, 0.5, 0.1, 0.6),
        an.Scenario.of(1.0, 1.0, 0.7, 0.5, 1.0, 1.0, 0.7),
    ]


@_timed
def check_near_optimality(scenarios=None, max_u: int = 12, alpha: int = 200) -> CheckResult:
    scenarios = near_opt_scenarios() if scenarios is None else scenarios
    worst, bad = 0.0, []
    for i, sc in enumerate(scenarios):
        ours = near_optimal_search(sc, alpha).weighted_aoi
        bf = brute_force(sc, max_u).weighted_aoi
        worst = max(worst, ours / bf)
        if ours > 1.01 * bf:
            bad.append(i)
    return CheckResult("near_optimality", not bad,
                       f"max ratio to brute force (u <= {max_u}) = {worst:.5f} over {len(scenarios)} scenarios")


SCALES = {
    "quick": dict(stationary=6, equivalence=6, placement=(4, 8), sim=(4, 100_000), near_opt=None),
    "full": dict(stationary=12, equivalence=8, placement=(5, 12), sim=(20, 1_000_000), near_opt=12),
}


def run_all(scale: str = "quick") -> list[CheckResult]:
    cfg = SCALES[scale]
    results = [
        check_stationary(cfg["stationary"]),
        check_formula_equivalence(cfg["equivalence"]),
        check_aggregate_sums(cfg["equivalence"]),
        check_placement_optimality(max_u1=cfg["placement"][0], max_u2=cfg["placement"][1]),
        check_simulation(*cfg["sim"]),
    ]
    if cfg["near_opt"]:
        results.append(check_near_optimality(max_u=cfg["near_opt"]))
    return results
