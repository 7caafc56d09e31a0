"""Brute-force reference implementations used as independent test oracles.

Nothing here imports the package under test.
"""

from __future__ import annotations

import itertools
from math import comb


def users_of(H: int, r: int) -> list[frozenset[int]]:
    """Relay sets of users 1..K, lexicographic over r-subsets of [1:H]."""
    return [frozenset(c) for c in itertools.combinations(range(1, H + 1), r)]


def common(users: list[frozenset[int]], W) -> frozenset[int]:
    out = frozenset(range(1, max(max(u) for u in users) + 1))
    for w in W:
        out &= users[w - 1]
    return out


def relevant_count(H: int, r: int, g: int, k: int) -> tuple[int, int]:
    """(number of (g-1)-sets W with R_{k u W} nonempty, how many of them contain k)."""
    users = users_of(H, r)
    K = len(users)
    total = with_k = 0
    for W in itertools.combinations(range(1, K + 1), g - 1):
        if common(users, W) and common(users, (k, *W)):
            total += 1
            with_k += k in W
    return total, with_k


def zg_brute(H: int, r: int, g: int) -> list[tuple[int, ...]]:
    users = users_of(H, r)
    K = len(users)
    return [W for W in itertools.combinations(range(1, K + 1), g - 1) if common(users, W)]


def ki_closed(H: int, r: int, i: int) -> int:
    return comb(H - i, r - i)
