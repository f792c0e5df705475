"""Search for weighted-AoI-minimizing cyclic schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .analytic import Scenario, ratio_term, weighted_aoi
from .schedule import (
    SOURCE1,
    SOURCE2,
    CyclicSchedule,
    all_cycles,
    canonical_rotation,
    from_slots,
    reduce_coprime,
)

ROUND_ROBIN = CyclicSchedule(2, 1, (1,))
BRUTE_FORCE_CAP = 14
TIE_RTOL = 1e-12


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SearchResult:
    schedule: CyclicSchedule
    weighted_aoi: float
    evaluations: int
    a_range: tuple[float, float]


def uniform_placement(u1: int, u2: int) -> tuple[int, ...]:
    """Spread ``u2`` source-2 slots over ``u1`` gaps as evenly as possible.

    Gaps take the values floor(a) and ceil(a), a = u2/u1, and are arranged by
    repeatedly merging the rarer block into the commoner one: with ``c1``
    copies of block ``b1`` and ``c2 >= c1`` copies of ``b2``, each ``b1`` is
    followed by floor(c2/c1) or ceil(c2/c1) copies of ``b2``; the two merged
    blocks become the new pair. Stops when either block occurs at most once.

    >>> uniform_placement(11, 41)
    (3, 4, 4, 4, 3, 4, 4, 4, 3, 4, 4)
    """
    if u1 < 1 or u2 < 1:
        raise SearchError("slot counts must be positive")
    lo, hi = u2 // u1, -(-u2 // u1)
    c1, c2 = u1 * hi - u2, u2 - u1 * lo  # exact counts of floor / ceil entries
    if c1 == 0:
        return (hi,) * u1
    b1, b2 = (lo,), (hi,)
    while min(c1, c2) > 1:
        if c1 > c2:
            c1, c2 = c2, c1
            b1, b2 = b2, b1
        k_lo, k_hi = c2 // c1, -(-c2 // c1)
        if k_lo == k_hi:  # divides evenly (u1, u2 not coprime)
            return (b1 + b2 * k_lo) * c1
        b1, b2 = b1 + b2 * k_lo, b1 + b2 * k_hi
        c1, c2 = c1 * k_hi - c2, c2 - c1 * k_lo
    return b2 * c2 + b1 * c1


def uniform_schedule(u1: int, u2: int) -> CyclicSchedule:
    return CyclicSchedule.from_placement(uniform_placement(u1, u2))


def rr_weighted_aoi(sc: Scenario) -> float:
    return weighted_aoi(ROUND_ROBIN, sc)


def _linear_bound_root(own, other, target: float) -> float:
    """Solve w * [(1+p)(x*s_other + s_own) / (2(1-p)) + s_own] = target for x."""
    p = own.drop_prob
    k = (1 + p) / (2 * (1 - p))
    return ((target / own.weight - own.mean_service) / k - own.mean_service) / other.mean_service


def a_bounds(sc: Scenario) -> tuple[float, float]:
    """Range of a = u2/u1 outside which a single source's weighted AoI alone exceeds round-robin.

    Uses the lower bound E[age_1] >= (1+p) s / (2(1-p)) + s1, which is linear
    in a, so the pruning never cuts off a better schedule.
    """
    rr = rr_weighted_aoi(sc)
    a_max = _linear_bound_root(sc.src1, sc.src2, rr)
    b_max = _linear_bound_root(sc.src2, sc.src1, rr)
    if not (a_max > 0 and b_max > 0) or not 1.0 / b_max < a_max:
        raise SearchError(f"degenerate search range: a_min={1 / b_max if b_max else math.inf}, a_max={a_max}")
    return 1.0 / b_max, a_max


class _Incumbent:
    def __init__(self, schedule: CyclicSchedule, value: float):
        self.schedule, self.value = schedule, value

    def offer(self, schedule: CyclicSchedule, value: float) -> None:
        tol = TIE_RTOL * abs(self.value)
        if value < self.value - tol or (abs(value - self.value) <= tol and schedule.u < self.schedule.u):
            self.schedule, self.value = schedule, value


def ratio_floor(sc: Scenario, u1: int, u2: int) -> float:
    """Lower bound on the weighted AoI of any cycle with this slot ratio."""
    a = u2 / u1
    return (sc.src1.weight * ratio_term(sc.src1, sc.src2, a)
            + sc.src2.weight * ratio_term(sc.src2, sc.src1, 1 / a))


def near_optimal_search(sc: Scenario, alpha: int = 200) -> SearchResult:
    """Sweep a = u2/u1 on the grids {u2/alpha : a >= 1} and {alpha/u1 : a <= 1}.

    Each ratio is reduced to lowest terms, arranged with ``uniform_placement``
    and scored by weighted AoI; round-robin seeds the incumbent. Ratios whose
    :func:`ratio_floor` already exceeds the incumbent (beyond the tie
    tolerance) cannot win and are skipped without building the cycle.
    ``evaluations`` counts the cycles actually scored.
    """
    if alpha < 1:
        raise SearchError("alpha must be a positive integer")
    a_min, a_max = a_bounds(sc)
    score = _scorer(sc)
    best = _Incumbent(ROUND_ROBIN, score(1, 1))
    evaluations = 1

    def visit(u1: int, u2: int) -> None:
        nonlocal evaluations
        c1, c2 = reduce_coprime(u1, u2)
        if ratio_floor(sc, c1, c2) > best.value * (1 + 2 * TIE_RTOL):
            return
        best.offer(uniform_schedule(c1, c2), score(c1, c2))
        evaluations += 1

    u1 = u2 = alpha
    while u2 / u1 < a_max:
        visit(u1, u2)
        u2 += 1

    u1 = u2 = alpha
    while u2 / u1 > a_min:
        visit(u1, u2)
        u1 += 1

    return SearchResult(best.schedule, best.value, evaluations, (a_min, a_max))


def _scorer(sc: Scenario) -> Callable[[int, int], float]:
    return lambda c1, c2: _cached_score(sc, c1, c2)


@lru_cache(maxsize=200_000)
def _cached_score(sc: Scenario, u1: int, u2: int) -> float:
    return weighted_aoi(uniform_schedule(u1, u2), sc)


def _insertions(seq: str):
    seen = set()
    for label in (SOURCE1, SOURCE2):
        for pos in range(len(seq)):
            cand = canonical_rotation(seq[:pos] + label + seq[pos:])
            if cand not in seen:
                seen.add(cand)
                yield cand


def insertion_search(sc: Scenario, max_cycle: int | None = None) -> SearchResult:
    """Greedy growth from round-robin: insert the best (source, position) while it strictly helps."""
    a_min, a_max = a_bounds(sc)
    if max_cycle is None:
        max_cycle = max(2, math.ceil(4 * (max(a_max, 1 / a_min) + 1)))
    if max_cycle < 2:
        raise SearchError("max_cycle must be at least 2")
    seq = canonical_rotation(ROUND_ROBIN.slots())
    value = weighted_aoi(ROUND_ROBIN, sc)
    evaluations = 1
    while len(seq) < max_cycle:
        step_best, step_value = None, value
        for cand in _insertions(seq):
            v = weighted_aoi(from_slots(cand), sc)
            evaluations += 1
            if v < step_value:
                step_best, step_value = cand, v
        if step_best is None:
            break
        seq, value = step_best, step_value
    return SearchResult(from_slots(seq), value, evaluations, (a_min, a_max))


def brute_force(sc: Scenario, max_u: int, cap: int = BRUTE_FORCE_CAP) -> SearchResult:
    """Exhaustive minimum over all rotation-distinct cycles with 2 <= u <= max_u."""
    if max_u > cap:
        raise SearchError(f"max_u={max_u} exceeds brute-force cap {cap}")
    if max_u < 2:
        raise SearchError("max_u must be at least 2")
    best = _Incumbent(ROUND_ROBIN, weighted_aoi(ROUND_ROBIN, sc))
    evaluations = 0
    for s in all_cycles(max_u):
        best.offer(s, weighted_aoi(s, sc))
        evaluations += 1
    try:
        rng = a_bounds(sc)
    except SearchError:
        rng = (math.nan, math.nan)
    return SearchResult(best.schedule, best.value, evaluations, rng)
