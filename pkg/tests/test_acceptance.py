"""Acceptance criteria, one test each, at their stated tolerances.

Every test records a ``criterion N: PASS|FAIL`` line that is printed immediately
(visible with ``-s``) and repeated in the pytest terminal summary.
"""

import itertools
import random
import time

import pytest

from cyclic_aoi import analytic as an
from cyclic_aoi.checks import (
    P_GRID,
    SV_GRID,
    check_aggregate_sums,
    check_formula_equivalence,
    check_near_optimality,
    check_placement_optimality,
    check_stationary,
    near_opt_scenarios,
    random_sim_cases,
    sim_agreement,
)
from cyclic_aoi.experiments import PRESETS, pgaw_analytic_best, point_scenario, point_services
from cyclic_aoi.optimizer import insertion_search, near_optimal_search, rr_weighted_aoi
from cyclic_aoi.schedule import CyclicSchedule, all_cycles, r_tilde
from cyclic_aoi.simulator import SimConfig, pgaw_best, service_models, simulate_cyclic

from conftest import ACCEPTANCE_LINES


def report(n: int, ok: bool, detail: str, seconds: float) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail} ({seconds:.1f}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_formula_equivalence():
    assert P_GRID == (0.0, 0.3, 0.7, 0.95) and SV_GRID == ((1.0, 0.0), (2.0, 4.0), (3.0, 9.0))
    res = check_formula_equivalence(max_u=8)
    report(1, res.ok and res.seconds < 60, res.detail, res.seconds)


def test_criterion_2_stationary_distribution():
    res = check_stationary(max_u1=12)
    report(2, res.ok, res.detail, res.seconds)


def test_criterion_3_drop_free_reduction():
    t0 = time.perf_counter()
    worst, n = 0.0, 0
    nonzero = []
    for (s1, v1), (s2, v2) in itertools.product(SV_GRID, SV_GRID):
        for q in P_GRID:
            sc = an.Scenario.of(s1, v1, 0.0, 0.5, s2, v2, q)
            for s in all_cycles(8):
                a = s.u2 / s.u1
                sb, vb = a * s2 + s1, a * v2 + v1
                want = sb / 2 + vb / (2 * sb) + s1 + s2**2 * (r_tilde(s, 1) - s.u1 * a * a) / (2 * sb * s.u1)
                got = an.aoi_closed_form(s, sc, 1).total
                worst = max(worst, abs(got - want) / want)
                n += 1
    for u1, k in itertools.product(range(1, 9), range(1, 5)):
        s = CyclicSchedule.from_placement([k] * u1)
        for p in P_GRID:
            corr = an.aoi_closed_form(s, an.Scenario.of(2.0, 4.0, p, 0.5, 3.0, 9.0, 0.5), 1).correction
            if corr != 0.0:
                nonzero.append((s.slots(), p, corr))
    ok = worst <= 1e-12 and not nonzero
    detail = f"{n} drop-free comparisons, max rel diff {worst:.2e}; constant placements with nonzero correction: {len(nonzero)}"
    report(3, ok, detail, time.perf_counter() - t0)


def _preset_cases():
    fig4 = an.Scenario.of(2.0, 4.0, 0.8, 0.2, 3.0, 9.0, 0.9)
    fig5 = an.Scenario.of(1.0, 0.0, 0.5, 0.5, 1.0, 0.0, 0.9)
    small = ("12", "122", "12122", "1222122")
    return ([(CyclicSchedule.parse(x), fig4, "exponential") for x in small]
            + [(CyclicSchedule.parse(x), fig5, "deterministic") for x in small])


def test_criterion_4_simulation_agreement():
    t0 = time.perf_counter()
    cases = random_sim_cases(20) + _preset_cases()
    fails, zmax = [], 0.0
    for (s, sc, kind), _, exact, z, ok in sim_agreement(cases, cycles=1_000_000):
        zmax = max(zmax, *z)
        if not ok:
            fails.append(f"{s.slots()} {kind} z={max(z):.2f}")
    worst = 0.0
    for slots in ("12", "12122", "1122212", "1222222"):
        s = CyclicSchedule.parse(slots)
        sc = an.Scenario.of(1.0, 0.0, 0.0, 0.4, 2.5, 0.0, 0.0)
        est = simulate_cyclic(s, sc, *service_models(sc, "deterministic"), SimConfig(cycles=1_000_000))
        worst = max(worst, *(abs(est.aoi_mean[k] - an.aoi(s, sc, k + 1)) for k in range(2)))
    dt = time.perf_counter() - t0
    ok = not fails and worst <= 1e-9 and dt < 600
    detail = (f"{len(cases)} configurations x 2 sources at 1e6 cycles, max |z| {zmax:.2f}, "
              f"outside 3 stderr: {fails or 'none'}; deterministic drop-free max abs err {worst:.1e}")
    report(4, ok, detail, dt)


def test_criterion_5_placement_optimality():
    res = check_placement_optimality(max_u1=5, max_u2=12, ps=(0.0, 0.3, 0.7, 0.95))
    report(5, res.ok, res.detail + "; (11, 41) example reproduced", res.seconds)


def test_criterion_6_near_optimality():
    res = check_near_optimality(max_u=12, alpha=200)
    t0 = time.perf_counter()
    worse = []
    for i, sc in enumerate(near_opt_scenarios()):
        vals = [near_optimal_search(sc, a).weighted_aoi for a in (25, 50, 100, 200, 400)]
        if any(b > a * (1 + 1e-12) for a, b in zip(vals, vals[1:])):
            worse.append(i)
    ok = res.ok and not worse
    detail = f"{res.detail}; alpha doubling 25..400 worsened scenarios: {worse or 'none'}"
    report(6, ok, detail, res.seconds + time.perf_counter() - t0)


@pytest.mark.slow
def test_criterion_7_baseline_dominance():
    t0 = time.perf_counter()
    cfg = SimConfig(cycles=1_000_000, seed=2025)
    bad, points, min_gap = [], 0, float("inf")
    for name in ("fig4a", "fig4b", "fig5", "fig6"):
        spec = PRESETS[name]
        for x in spec.grid:
            sc = point_scenario(spec, x)
            opt = near_optimal_search(sc, 200).weighted_aoi
            rr = rr_weighted_aoi(sc)
            _, pg_exact = pgaw_analytic_best(sc, spec.pgaw_step)
            _, est = pgaw_best(sc, *point_services(spec, sc), spec.pgaw_step, cfg)
            points += 1
            min_gap = min(min_gap, (est.weighted_mean - opt) / est.weighted_mean)
            if not (opt <= rr * (1 + 1e-12) and opt <= pg_exact and opt <= est.weighted_mean):
                bad.append(f"{name}@{x}")
    dt = time.perf_counter() - t0
    ok = not bad and dt < 900
    detail = (f"{points} preset points, optimal <= round-robin and <= P-GAW best (exact and simulated); "
              f"smallest margin to simulated P-GAW {100 * min_gap:.2f}%; violations: {bad or 'none'}")
    report(7, ok, detail, dt)


def test_criterion_8_insertion_search():
    t0 = time.perf_counter()
    rnd = random.Random(8)
    worst = 0.0
    for _ in range(10):
        sc = an.Scenario.of(rnd.uniform(0.5, 3), rnd.uniform(0, 4), 0.0, rnd.uniform(0.1, 0.9),
                            rnd.uniform(0.5, 3), rnd.uniform(0, 4), 0.0)
        ins = insertion_search(sc).weighted_aoi
        near = near_optimal_search(sc, 200).weighted_aoi
        worst = max(worst, abs(ins - near) / near)
    above_rr = []
    lossy = [an.Scenario.of(rnd.uniform(0.5, 3), rnd.uniform(0, 4), rnd.uniform(0.05, 0.95), rnd.uniform(0.1, 0.9),
                            rnd.uniform(0.5, 3), rnd.uniform(0, 4), rnd.uniform(0.05, 0.95)) for _ in range(10)]
    lossy += [point_scenario(PRESETS[k], x) for k in ("fig4a", "fig5") for x in PRESETS[k].grid[1:]]
    for i, sc in enumerate(lossy):
        if insertion_search(sc).weighted_aoi > rr_weighted_aoi(sc):
            above_rr.append(i)
    ok = worst <= 1e-9 and not above_rr
    detail = (f"drop-free: max rel diff to near-optimal {worst:.1e} over 10 scenarios; "
              f"with drops: {len(lossy)} scenarios, above round-robin: {above_rr or 'none'}")
    report(8, ok, detail, time.perf_counter() - t0)


def test_criterion_9_aggregate_sums():
    res = check_aggregate_sums(max_u=8)
    report(9, res.ok, res.detail, res.seconds)
