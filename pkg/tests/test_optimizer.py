import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from cyclic_aoi import analytic as an
from cyclic_aoi import optimizer as opt
from cyclic_aoi.checks import check_placement_optimality, placement_objective
from cyclic_aoi.schedule import CyclicSchedule, all_cycles, canonical_rotation, compositions, reduce_coprime

FIG4 = an.Scenario.of(2.0, 4.0, 0.8, 0.2, 3.0, 9.0, 0.9)


def _rotations(r):
    r = list(r)
    return {tuple(r[k:] + r[:k]) for k in range(len(r))}


def test_uniform_placement_known_example():
    assert opt.uniform_placement(11, 41) == (3, 4, 4, 4, 3, 4, 4, 4, 3, 4, 4)


@pytest.mark.parametrize("u1, u2, multiset", [
    (3, 5, (1, 2, 2)),
    (1, 7, (7,)),
    (4, 6, (1, 1, 2, 2)),
    (5, 2, (0, 0, 0, 1, 1)),
])
def test_uniform_placement_small(u1, u2, multiset):
    r = opt.uniform_placement(u1, u2)
    assert sorted(r) == sorted(multiset)
    # best arrangement of the multiset by exhaustive permutation, for every p
    for p in (0.0, 0.5, 0.9):
        best = min(placement_objective(perm, p) for perm in set(itertools.permutations(multiset)))
        assert placement_objective(r, p) == pytest.approx(best, rel=1e-13)


def test_non_coprime_is_repetition():
    assert opt.uniform_placement(4, 6) in _rotations((1, 2) * 2)
    assert opt.uniform_placement(300, 500) in _rotations(opt.uniform_placement(3, 5) * 100)


@settings(max_examples=300)
@given(st.integers(1, 300), st.integers(1, 3000))
def test_uniform_placement_is_balanced(u1, u2):
    r = opt.uniform_placement(u1, u2)
    assert len(r) == u1 and sum(r) == u2
    assert set(r) <= {u2 // u1, -(-u2 // u1)}
    if u1 <= 40:
        # every window length sees sums that differ by at most one
        rr = r + r
        for i in range(1, u1 + 1):
            sums = {sum(rr[j:j + i]) for j in range(u1)}
            assert max(sums) - min(sums) <= 1


def test_placement_optimality_small_grid():
    res = check_placement_optimality(max_u1=4, max_u2=9)
    assert res.ok, res.detail


def test_placement_check_detects_a_bad_arrangement():
    def clumped(u1, u2):
        return tuple(sorted(opt.uniform_placement(u1, u2)))
    assert not check_placement_optimality(clumped, max_u1=4, max_u2=9).ok


def test_a_bounds_symmetric():
    sc = an.Scenario.of(1.5, 2.0, 0.4, 0.5, 1.5, 2.0, 0.4)
    a_min, a_max = opt.a_bounds(sc)
    assert a_min == pytest.approx(1 / a_max, rel=1e-12)
    assert a_min < 1 < a_max


def test_a_max_grows_as_weight_shrinks():
    prev = 0.0
    for w1 in (0.5, 0.2, 0.05, 0.01, 0.001):
        a_max = opt.a_bounds(an.Scenario.of(2.0, 4.0, 0.8, w1, 3.0, 9.0, 0.9))[1]
        assert a_max > prev
        prev = a_max
    assert prev > 1000


def test_a_bounds_exclude_only_hopeless_ratios():
    a_min, a_max = opt.a_bounds(FIG4)
    rr = opt.rr_weighted_aoi(FIG4)
    for a in (a_max * 1.0001, a_max * 2):
        u1 = 1000
        s = opt.uniform_schedule(u1, math.ceil(a * u1))
        assert FIG4.src1.weight * an.aoi(s, FIG4, 1) > rr
    for a in (a_min / 1.0001, a_min / 2):
        u2 = 1000
        s = opt.uniform_schedule(math.ceil(u2 / a), u2)
        assert FIG4.src2.weight * an.aoi(s, FIG4, 2) > rr


def test_alpha_must_be_positive():
    sc = an.Scenario.of(1.0, 0.0, 0.0, 0.5, 1.0, 0.0, 0.0)
    assert opt.a_bounds(sc)[0] < 1 < opt.a_bounds(sc)[1]
    with pytest.raises(opt.SearchError):
        opt.near_optimal_search(sc, alpha=0)


scenario_st = st.builds(
    lambda s1, c1, p, w1, s2, c2, q: an.Scenario.of(s1, c1 * s1 * s1, p, w1, s2, c2 * s2 * s2, q),
    st.floats(0.2, 5), st.floats(0, 2), st.floats(0, 0.95), st.floats(0.05, 0.95),
    st.floats(0.2, 5), st.floats(0, 2), st.floats(0, 0.95),
)


@settings(max_examples=40, deadline=None)
@given(scenario_st)
def test_ratio_floor_is_a_lower_bound(sc):
    for s in all_cycles(7):
        assert opt.ratio_floor(sc, s.u1, s.u2) <= an.weighted_aoi(s, sc) * (1 + 1e-12)


def _unpruned(sc, alpha):
    a_min, a_max = opt.a_bounds(sc)
    best = opt._Incumbent(opt.ROUND_ROBIN, opt.rr_weighted_aoi(sc))
    pairs = [(alpha, u2) for u2 in itertools.takewhile(lambda u2: u2 / alpha < a_max, itertools.count(alpha))]
    pairs += [(u1, alpha) for u1 in itertools.takewhile(lambda u1: alpha / u1 > a_min, itertools.count(alpha))]
    for u1, u2 in pairs:
        c = reduce_coprime(u1, u2)
        s = opt.uniform_schedule(*c)
        best.offer(s, an.weighted_aoi(s, sc))
    return best.schedule, best.value


@settings(max_examples=25, deadline=None)
@given(scenario_st, st.integers(1, 40))
def test_pruning_does_not_change_the_answer(sc, alpha):
    res = opt.near_optimal_search(sc, alpha)
    assert (res.schedule, res.weighted_aoi) == _unpruned(sc, alpha)


def test_near_optimal_fig4():
    res = opt.near_optimal_search(FIG4, 200)
    assert res.weighted_aoi <= opt.rr_weighted_aoi(FIG4)
    assert res.weighted_aoi == pytest.approx(an.weighted_aoi(res.schedule, FIG4), rel=1e-15)
    bf = opt.brute_force(FIG4, 12)
    assert bf.weighted_aoi >= res.weighted_aoi * 0.99
    assert res.weighted_aoi <= bf.weighted_aoi * 1.01


@pytest.mark.parametrize("sc", [
    FIG4,
    an.Scenario.of(1.0, 0.0, 0.5, 0.5, 1.0, 0.0, 0.9),
    an.Scenario.of(1.0, 1.0, 0.0, 0.3, 2.0, 4.0, 0.0),
])
def test_doubling_alpha_never_hurts(sc):
    prev = math.inf
    for alpha in (1, 2, 4, 8, 16, 32, 64):
        v = opt.near_optimal_search(sc, alpha).weighted_aoi
        assert v <= prev * (1 + 1e-12)
        prev = v


def test_symmetric_sources_pick_round_robin():
    sc = an.Scenario.of(1.0, 0.0, 0.9, 0.5, 1.0, 0.0, 0.9)
    res = opt.near_optimal_search(sc, 50)
    assert res.schedule == opt.ROUND_ROBIN
    assert res.weighted_aoi == pytest.approx(20.0, rel=1e-14)


def test_ties_prefer_shorter_cycles():
    inc = opt._Incumbent(CyclicSchedule(4, 2, (1, 1)), 5.0)
    inc.offer(opt.ROUND_ROBIN, 5.0)
    assert inc.schedule == opt.ROUND_ROBIN
    inc.offer(CyclicSchedule(6, 3, (1, 1, 1)), 5.0)
    assert inc.schedule == opt.ROUND_ROBIN


def test_insertion_search_basics():
    res = opt.insertion_search(FIG4)
    assert res.weighted_aoi <= opt.rr_weighted_aoi(FIG4)
    assert res.weighted_aoi == pytest.approx(an.weighted_aoi(res.schedule, FIG4), rel=1e-15)
    capped = opt.insertion_search(FIG4, max_cycle=2)
    assert capped.schedule == opt.ROUND_ROBIN and capped.evaluations == 1
    with pytest.raises(opt.SearchError):
        opt.insertion_search(FIG4, max_cycle=1)


def test_insertion_candidates_are_distinct_cycles():
    cands = list(opt._insertions("12"))
    assert sorted(cands) == ["112", "122"]
    assert all(c == canonical_rotation(c) for c in opt._insertions("12122"))


@pytest.mark.parametrize("seed", range(5))
def test_insertion_matches_search_without_drops(seed):
    import random
    rnd = random.Random(seed)
    sc = an.Scenario.of(rnd.uniform(0.5, 3), rnd.uniform(0, 4), 0.0, rnd.uniform(0.1, 0.9),
                        rnd.uniform(0.5, 3), rnd.uniform(0, 4), 0.0)
    ins = opt.insertion_search(sc).weighted_aoi
    near = opt.near_optimal_search(sc, 200).weighted_aoi
    assert ins == pytest.approx(near, rel=1e-9)


def test_brute_force_limits():
    assert opt.brute_force(FIG4, 2).schedule == opt.ROUND_ROBIN
    with pytest.raises(opt.SearchError):
        opt.brute_force(FIG4, opt.BRUTE_FORCE_CAP + 1)
    with pytest.raises(opt.SearchError):
        opt.brute_force(FIG4, 1)


def test_brute_force_is_exhaustive():
    res = opt.brute_force(FIG4, 8)
    assert res.evaluations == len(list(all_cycles(8)))
    assert res.weighted_aoi == min(an.weighted_aoi(s, FIG4) for s in all_cycles(8))


def test_all_compositions_counted_by_brute_force():
    # cycles with u1 = 2, u = 6 correspond to compositions of 4 into 2 parts up to rotation
    got = {s.r for s in all_cycles(6) if s.u == 6 and s.u1 == 2}
    want = {min(_rotations(list(c))) for c in compositions(4, 2)}
    assert {min(_rotations(list(r))) for r in got} == want
