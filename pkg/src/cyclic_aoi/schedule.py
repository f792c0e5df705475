"""Cyclic two-source schedules and placement-vector combinatorics.

A cycle is stored as ``(u, u1, r)``: ``u`` slots per cycle, ``u1`` of them
belong to source 1, and ``r[k]`` counts the source-2 slots between the k-th
and (k+1)-th source-1 slot (cyclically). Placement indices are 1-based in
the public helpers that take an index ``i``; ``r`` itself is a 0-based tuple.

Text form: a string over ``'1'`` and ``'2'``, e.g. ``"12122"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import numpy as np

SOURCE1 = "1"
SOURCE2 = "2"


class ScheduleError(ValueError):
    """Raised for infeasible or malformed schedules."""


@dataclass(frozen=True)
class CyclicSchedule:
    u: int
    u1: int
    r: tuple[int, ...]

    def __post_init__(self):
        if type(self.r) is not tuple:
            object.__setattr__(self, "r", tuple(int(x) for x in self.r))
        if not (self.u > self.u1 >= 1):
            raise ScheduleError(f"infeasible cycle: need u > u1 >= 1, got u={self.u}, u1={self.u1}")
        if len(self.r) != self.u1:
            raise ScheduleError(f"placement vector has length {len(self.r)}, expected u1={self.u1}")
        if min(self.r) < 0:
            raise ScheduleError("placement entries must be nonnegative")
        if sum(self.r) != self.u - self.u1:
            raise ScheduleError(f"sum(r)={sum(self.r)} does not equal u - u1 = {self.u - self.u1}")

    @classmethod
    def from_placement(cls, r: Sequence[int]) -> "CyclicSchedule":
        r = tuple(int(x) for x in r)
        return cls(len(r) + sum(r), len(r), r)

    @classmethod
    def parse(cls, text: str) -> "CyclicSchedule":
        return from_slots(text)

    @property
    def u2(self) -> int:
        return self.u - self.u1

    @property
    def a(self) -> Fraction:
        """Ratio of source-2 to source-1 slots."""
        return Fraction(self.u2, self.u1)

    def slots(self) -> str:
        return to_slots(self)

    def canonical(self) -> "CyclicSchedule":
        return from_slots(canonical_rotation(self.slots()))

    def same_cycle(self, other: "CyclicSchedule") -> bool:
        """Equality up to cyclic rotation."""
        return canonical_rotation(self.slots()) == canonical_rotation(other.slots())

    def repeat(self, k: int) -> "CyclicSchedule":
        return CyclicSchedule(k * self.u, k * self.u1, self.r * k)

    def __str__(self) -> str:
        return self.slots()


def _normalize_labels(labels: Iterable) -> str:
    if isinstance(labels, str) and not labels.strip("12"):
        return labels
    out = []
    for x in labels:
        t = str(x).strip().upper().lstrip("S")
        if t not in (SOURCE1, SOURCE2):
            raise ScheduleError(f"unknown slot label {x!r}; expected '1' or '2'")
        out.append(t)
    return "".join(out)


def from_slots(labels: Iterable) -> CyclicSchedule:
    """Build a schedule from a slot sequence such as ``"12122"``.

    The first source-1 slot anchors ``r[0]``. Labels may be a string or any
    iterable of ``1``/``2`` (``"S1"``/``"S2"`` are accepted too).
    """
    seq = _normalize_labels(labels)
    if SOURCE1 not in seq or SOURCE2 not in seq:
        raise ScheduleError(f"schedule {seq!r} must contain both '1' and '2'")
    start = seq.index(SOURCE1)
    rot = seq[start:] + seq[:start]
    r = [len(block) for block in rot.split(SOURCE1)[1:]]
    return CyclicSchedule(len(seq), len(r), tuple(r))


def to_slots(s: CyclicSchedule) -> str:
    return "".join(SOURCE1 + SOURCE2 * k for k in s.r)


def canonical_rotation(seq: str) -> str:
    """Lexicographically minimal rotation of a slot string."""
    return min(seq[k:] + seq[:k] for k in range(len(seq)))


def dual(s: CyclicSchedule) -> CyclicSchedule:
    """The same cycle described from source 2's point of view.

    Anchored at the first source-2 slot, as ``from_slots`` would do on the
    relabelled sequence.
    """
    r = np.asarray(s.r, dtype=np.int64)
    is1 = np.zeros(s.u, dtype=bool)
    is1[np.arange(s.u1) + np.concatenate(([0], np.cumsum(r)[:-1]))] = True
    pos2 = np.flatnonzero(~is1)
    gaps = np.diff(np.append(pos2, pos2[0] + s.u)) - 1
    return CyclicSchedule(s.u, s.u2, tuple(gaps.tolist()))


def r_tilde(s: CyclicSchedule, i: int) -> int:
    """Sum over all cyclic windows of ``i`` consecutive placement entries of the squared window sum."""
    if not 1 <= i <= s.u1:
        raise ScheduleError(f"window length {i} outside [1, {s.u1}]")
    gamma = s.r + s.r
    return sum(sum(gamma[j:j + i]) ** 2 for j in range(s.u1))


def r_tilde_all(r: Sequence[int]) -> np.ndarray:
    """``r_tilde`` for every window length 1..len(r), as an int array (exact)."""
    r = np.asarray(r, dtype=np.int64)
    n = len(r)
    prefix = np.concatenate(([0], np.cumsum(np.concatenate((r, r)))))
    out = np.empty(n, dtype=np.int64)
    for i in range(1, n + 1):
        w = prefix[i:i + n] - prefix[:n]
        out[i - 1] = int(np.dot(w, w))
    return out


_EXACT_LIMIT = 256
_FFT_SAFE = 2**40  # sum of squares below which rounded float FFT products are exact


def _cyclic_autocorr(e: np.ndarray) -> np.ndarray:
    """Exact ``sum_j e[j] * e[(j + i) % n]`` for i = 1..n (int64 input, |result| < 2**62).

    Short vectors are correlated directly. Long ones go through a padded FFT
    and are rounded; when the values are too large for that to be exact they
    are split as ``e = h * 2**k + l`` and the cross term is recovered from
    the autocorrelation of ``h + l``.
    """
    n = len(e)
    if n <= _EXACT_LIMIT:
        return np.correlate(np.concatenate((e[1:], e)), e, mode="valid")
    peak = int(np.max(np.abs(e)))
    if int(np.dot(e, e)) < _FFT_SAFE or peak <= 1:
        m = 1 << (2 * n - 1).bit_length()
        f = np.fft.rfft(e.astype(float), m)
        lin = np.rint(np.fft.irfft(f.real**2 + f.imag**2, m)[:n]).astype(np.int64)
        return np.append(lin[1:] + lin[:0:-1], lin[0])
    k = peak.bit_length() // 2
    h = e >> k
    low = e - (h << k)
    ah, al = _cyclic_autocorr(h), _cyclic_autocorr(low)
    cross = _cyclic_autocorr(h + low) - ah - al
    return (ah << (2 * k)) + (cross << k) + al


def r_tilde_excess(r: Sequence[int]) -> np.ndarray:
    """``r_tilde(i) - u1 * a**2 * i**2`` for i = 1..u1, as floats.

    Computed from the deviations of the placement prefix sums from the
    straight line ``j * a``; this avoids cancelling two large numbers. With
    ``e[j] = u1 * P[j] - j * u2`` (integers, periodic in ``j``) the excess is
    ``sum_j (e[j+i] - e[j])**2 / u1**2``. Long vectors use an FFT
    autocorrelation that is rounded back to exact integers.
    """
    r = np.asarray(r, dtype=np.int64)
    n = len(r)
    u2 = int(r.sum())
    prefix = np.concatenate(([0], np.cumsum(r)[:-1]))
    e = n * prefix - np.arange(n, dtype=np.int64) * u2
    e = e - int(round(e.mean()))  # shift-invariant; keeps magnitudes small
    sq = int(np.dot(e, e))
    if sq >= 2**62:
        auto = np.array([int(np.dot(e.astype(object), np.roll(e, -i).astype(object)))
                         for i in range(1, n + 1)], dtype=object)
    else:
        auto = _cyclic_autocorr(e)
    num = 2 * sq - 2 * auto
    return np.asarray(num, dtype=float) / float(n * n)


def reduce_coprime(u1: int, u2: int) -> tuple[int, int]:
    if u1 < 1 or u2 < 1:
        raise ScheduleError("slot counts must be positive")
    g = gcd(u1, u2)
    return u1 // g, u2 // g


def compositions(total: int, parts: int):
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def all_cycles(max_u: int, min_u: int = 2):
    """Every rotation-canonical two-source cycle with ``min_u <= u <= max_u``."""
    for u in range(max(2, min_u), max_u + 1):
        for bits in range(1, 2**u - 1):
            seq = "".join(SOURCE2 if (bits >> (u - 1 - k)) & 1 else SOURCE1 for k in range(u))
            if canonical_rotation(seq) == seq:
                yield from_slots(seq)
