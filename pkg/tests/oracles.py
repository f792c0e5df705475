"""Independent reference computations used only by the tests."""

from __future__ import annotations


def per_slot_aoi(slots: str, means: dict, variances: dict, drops: dict, who: str) -> float:
    """Mean age of source ``who`` by summing expected area slot by slot.

    During slot m the age starts at A_m and grows linearly for the slot's
    length L_m, so the expected area is E[A_m] E[L_m] + E[L_m^2] / 2 (A_m only
    depends on earlier slots). E[A_m] is found by walking backwards over the
    earlier ``who`` slots: the n-th most recent one is the freshest delivery
    with probability (1 - p) p^n, in which case the age at the start of m is
    the total length from the start of that slot up to m.
    """
    u = len(slots)
    p = drops[who]
    area = 0.0
    for m in range(u):
        acc, n, mean_age = 0.0, 0, 0.0
        j = m
        while True:
            j -= 1
            c = slots[j % u]
            acc += means[c]
            if c == who:
                w = (1 - p) * p**n
                mean_age += w * acc
                n += 1
                if p == 0 or p**n < 1e-18:
                    break
        c = slots[m]
        area += mean_age * means[c] + (variances[c] + means[c] ** 2) / 2
    return area / sum(means[c] for c in slots)
