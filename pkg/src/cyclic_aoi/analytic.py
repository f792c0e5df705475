"""Exact mean AoI of a two-source cyclic schedule over a lossy channel.

Two routes are provided. ``aoi_general`` assembles the Markov-chain /
renewal-reward expression from the stationary distribution of the
(start, end) success-index chain and the per-transition time moments.
``aoi_closed_form`` evaluates the simplified expression driven by the
placement statistics ``r_tilde``. They must agree; the test-suite holds
them to 1e-10 relative.

Drop probabilities equal to zero are handled as limits (``0.0 ** 0 == 1``),
so there is no special code path for the drop-free case.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .schedule import CyclicSchedule, dual, r_tilde_excess

RHO_GUARD = 1e-15


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class SourceParams:
    mean_service: float
    var_service: float
    drop_prob: float
    weight: float

    def __post_init__(self):
        if not self.mean_service > 0:
            raise ScenarioError(f"mean_service must be > 0, got {self.mean_service}")
        if not self.var_service >= 0:
            raise ScenarioError(f"var_service must be >= 0, got {self.var_service}")
        if not 0 <= self.drop_prob < 1:
            raise ScenarioError(f"drop_prob must lie in [0, 1), got {self.drop_prob}")
        if not self.weight > 0:
            raise ScenarioError(f"weight must be > 0, got {self.weight}")

    @property
    def second_moment(self) -> float:
        return self.var_service + self.mean_service**2


@dataclass(frozen=True)
class Scenario:
    src1: SourceParams
    src2: SourceParams

    def __post_init__(self):
        if abs(self.src1.weight + self.src2.weight - 1.0) > 1e-12:
            raise ScenarioError(
                f"weights must sum to 1, got {self.src1.weight} + {self.src2.weight}"
            )

    @classmethod
    def of(cls, s1, v1, p, w1, s2, v2, q, w2=None) -> "Scenario":
        """Shorthand constructor in the usual (s, v, drop, weight) order."""
        if w2 is None:
            w2 = 1.0 - w1
        return cls(SourceParams(s1, v1, p, w1), SourceParams(s2, v2, q, w2))

    def source(self, k: int) -> SourceParams:
        if k == 1:
            return self.src1
        if k == 2:
            return self.src2
        raise ScenarioError(f"source must be 1 or 2, got {k}")

    def swapped(self) -> "Scenario":
        return Scenario(self.src2, self.src1)


@dataclass(frozen=True)
class DerivedQuantities:
    a: Fraction
    s: float
    v: float
    s_hat: float
    v_hat: float
    rho: float
    m_bar: float
    m_tilde: float


@dataclass(frozen=True)
class AoiBreakdown:
    """Closed-form AoI split as ``total = f - g + h``.

    ``f`` is the part depending on the schedule only through ``a``; ``g`` and
    ``h`` carry the placement dependence, with ``h >= g`` always.
    """

    f: float
    g: float
    h: float
    total: float

    @property
    def correction(self) -> float:
        return self.h - self.g


def _check_p(p: float) -> None:
    if not 0 <= p < 1:
        raise ScenarioError(f"drop probability must lie in [0, 1), got {p}")


def _oriented(s: CyclicSchedule, sc: Scenario, source: int):
    """Schedule and (own, other) params seen from ``source``."""
    if source == 1:
        return s, sc.src1, sc.src2
    if source == 2:
        return dual(s), sc.src2, sc.src1
    raise ScenarioError(f"source must be 1 or 2, got {source}")


# ---------------------------------------------------------------------------
# Markov chain on (i, j) success-index pairs
# ---------------------------------------------------------------------------

def transition_prob(i: int, j: int, u1: int, p: float) -> float:
    """Probability that, after a success at instance ``i``, the next success is at ``j``."""
    _check_p(p)
    if not (1 <= i <= u1 and 1 <= j <= u1):
        raise IndexError(f"indices ({i}, {j}) outside [1, {u1}]")
    k = j - i - 1 if j > i else j + u1 - i - 1
    return (1 - p) * p**k / (1 - p**u1)


def _success_offsets(u1: int, p: float) -> np.ndarray:
    """P(next success is n instances later), n = 1..u1."""
    n = np.arange(1, u1 + 1)
    return (1 - p) * np.power(p, n - 1) / (1 - p**u1)


def transition_matrix(u1: int, p: float) -> np.ndarray:
    """Row-stochastic matrix on states (i, j), flattened as (i-1)*u1 + (j-1).

    State (k, l) moves to (l, j) with probability p_{l,j}.
    """
    _check_p(p)
    small = np.array([[transition_prob(i, j, u1, p) for j in range(1, u1 + 1)] for i in range(1, u1 + 1)])
    P = np.zeros((u1 * u1, u1 * u1))
    for k in range(u1):
        for l in range(u1):
            P[k * u1 + l, l * u1:(l + 1) * u1] = small[l]
    return P


def stationary(u1: int, p: float) -> np.ndarray:
    """Stationary law of the (i, j) chain as a u1 x u1 matrix: p_{i,j} / u1."""
    _check_p(p)
    small = np.array([[transition_prob(i, j, u1, p) for j in range(1, u1 + 1)] for i in range(1, u1 + 1)])
    return small / u1


def stationary_power_iteration(u1: int, p: float, tol: float = 1e-14, max_iter: int = 100_000) -> np.ndarray:
    P = transition_matrix(u1, p)
    if not np.allclose(P.sum(axis=1), 1.0, rtol=0, atol=1e-13):
        raise RuntimeError("transition matrix is not row-stochastic")
    pi = np.full(u1 * u1, 1.0 / (u1 * u1))
    for _ in range(max_iter):
        nxt = pi @ P
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt.reshape(u1, u1)
        pi = nxt
    raise RuntimeError(f"power iteration did not converge in {max_iter} steps")


def geom_round_moments(u1: int, p: float) -> tuple[float, float]:
    """E[M], E[M^2] for M, the number of whole failed rounds before a success.

    P(M = m) = (1 - rho) rho**m, rho = p**u1.
    """
    _check_p(p)
    rho = p**u1
    if rho < RHO_GUARD:
        return 0.0, 0.0
    return rho / (1 - rho), rho * (1 + rho) / (1 - rho) ** 2


def slot_counts(s: CyclicSchedule, i: int, j: int) -> tuple[int, int]:
    """Source-1 and source-2 slots from just after instance ``i`` through instance ``j``."""
    if not (1 <= i <= s.u1 and 1 <= j <= s.u1):
        raise IndexError(f"indices ({i}, {j}) outside [1, {s.u1}]")
    n1 = (j - i - 1) % s.u1 + 1
    gamma = s.r + s.r
    n2 = sum(gamma[i - 1:i - 1 + n1])
    return n1, n2


def z_moments(s: CyclicSchedule, sc: Scenario, i: int, j: int) -> tuple[float, float]:
    """Mean and second moment of the partial-round duration ending at instance ``j``.

    Service times in different slots are taken as independent.
    """
    n1, n2 = slot_counts(s, i, j)
    x, y = sc.src1, sc.src2
    z_bar = n1 * x.mean_service + n2 * y.mean_service
    z_tilde = n1 * x.var_service + n2 * y.var_service + z_bar**2
    return z_bar, z_tilde


def derived(s: CyclicSchedule, sc: Scenario, source: int = 1) -> DerivedQuantities:
    sch, me, other = _oriented(s, sc, source)
    a = Fraction(sch.u2, sch.u1)
    m_bar, m_tilde = geom_round_moments(sch.u1, me.drop_prob)
    return DerivedQuantities(
        a=a,
        s=float(a) * other.mean_service + me.mean_service,
        v=float(a) * other.var_service + me.var_service,
        s_hat=sch.u1 * me.mean_service + sch.u2 * other.mean_service,
        v_hat=sch.u1 * me.var_service + sch.u2 * other.var_service,
        rho=me.drop_prob**sch.u1,
        m_bar=m_bar,
        m_tilde=m_tilde,
    )


def aggregate_sums(s: CyclicSchedule, sc: Scenario, source: int = 1) -> tuple[float, float]:
    """Direct sum over states of pi * z_bar and pi * z_tilde."""
    sch, me, _ = _oriented(s, sc, source)
    local = sc if source == 1 else sc.swapped()
    pi = stationary(sch.u1, me.drop_prob)
    spz = spzz = 0.0
    for i in range(1, sch.u1 + 1):
        for j in range(1, sch.u1 + 1):
            zb, zt = z_moments(sch, local, i, j)
            spz += pi[i - 1, j - 1] * zb
            spzz += pi[i - 1, j - 1] * zt
    return spz, spzz


def aggregate_sums_closed(s: CyclicSchedule, sc: Scenario, source: int = 1) -> tuple[float, float]:
    """The same two sums via the symmetric simplification (window statistics of r)."""
    sch, me, other = _oriented(s, sc, source)
    d = derived(s, sc, source)
    p, u1 = me.drop_prob, sch.u1
    n = np.arange(1, u1 + 1)
    pw = np.power(p, n - 1)
    k = (1 - p) / (1 - p**u1)
    spz = d.s * k * float(np.sum(n * pw))
    excess = r_tilde_excess(sch.r)
    spzz = k * float(np.sum((n * d.v + n**2 * d.s**2) * pw)) \
        + other.mean_service**2 * k / u1 * float(np.sum(excess * pw))
    return spz, spzz


# ---------------------------------------------------------------------------
# Mean AoI
# ---------------------------------------------------------------------------

def aoi_general(s: CyclicSchedule, sc: Scenario, source: int = 1) -> float:
    """Mean AoI via stationary distribution and renewal-reward ratio."""
    _, me, _ = _oriented(s, sc, source)
    d = derived(s, sc, source)
    spz, spzz = aggregate_sums(s, sc, source)
    s1 = me.mean_service
    num = d.m_tilde * d.s_hat**2 + d.m_bar * (2 * s1 * d.s_hat + d.v_hat) + spzz
    den = d.m_bar * d.s_hat + spz
    return num / (2 * den) + (d.m_bar * d.s_hat + s1) * spz / den


def ratio_term(me: SourceParams, other: SourceParams, a: float) -> float:
    """The part of a source's AoI that depends on the schedule only through ``a``.

    ``a`` is the number of ``other`` slots per slot of ``me``. The full AoI
    adds a nonnegative placement correction, so this is also a lower bound.
    """
    p = me.drop_prob
    s_ = a * other.mean_service + me.mean_service
    v_ = a * other.var_service + me.var_service
    return (1 + p) / (2 * (1 - p)) * s_ + v_ / (2 * s_) + me.mean_service


def aoi_closed_form(s: CyclicSchedule, sc: Scenario, source: int = 1) -> AoiBreakdown:
    sch, me, other = _oriented(s, sc, source)
    p, u1 = me.drop_prob, sch.u1
    a = sch.u2 / u1
    s_ = a * other.mean_service + me.mean_service
    f = ratio_term(me, other, a)

    n = np.arange(1, u1 + 1)
    pw = np.power(p, n - 1)
    scale = other.mean_service**2 * (1 - p) ** 2 / (2 * s_ * (1 - p**u1))
    g = a**2 * scale * float(np.sum(n**2 * pw))
    corr = scale / u1 * float(np.sum(r_tilde_excess(sch.r) * pw))
    return AoiBreakdown(f=f, g=g, h=g + corr, total=f + corr)


def aoi(s: CyclicSchedule, sc: Scenario, source: int = 1) -> float:
    return aoi_closed_form(s, sc, source).total


def weighted_aoi(s: CyclicSchedule, sc: Scenario) -> float:
    return sc.src1.weight * aoi(s, sc, 1) + sc.src2.weight * aoi(s, sc, 2)


def pgaw_aoi(p1: float, sc: Scenario, source: int = 1) -> float:
    """Mean AoI under probabilistic generate-at-will (each slot is source 1 w.p. ``p1``).

    Successive successes of a source delimit i.i.d. intervals: a geometric
    number of "other" slots followed by one successful slot of the source.
    """
    if not 0 < p1 < 1:
        raise ScenarioError(f"p1 must lie in (0, 1), got {p1}")
    me, other = (sc.src1, sc.src2) if source == 1 else (sc.src2, sc.src1)
    share = p1 if source == 1 else 1 - p1
    p = me.drop_prob
    alpha = share * (1 - p)
    w_fail, w_other = share * p / (1 - alpha), (1 - share) / (1 - alpha)
    o1 = w_fail * me.mean_service + w_other * other.mean_service
    o2 = w_fail * me.second_moment + w_other * other.second_moment
    n1 = (1 - alpha) / alpha
    n2 = (1 - alpha) * (2 - alpha) / alpha**2
    t1 = n1 * o1 + me.mean_service
    t2 = n1 * (o2 - o1**2) + n2 * o1**2 + 2 * n1 * o1 * me.mean_service + me.second_moment
    return me.mean_service + t2 / (2 * t1)


def pgaw_weighted_aoi(p1: float, sc: Scenario) -> float:
    return sc.src1.weight * pgaw_aoi(p1, sc, 1) + sc.src2.weight * pgaw_aoi(p1, sc, 2)
