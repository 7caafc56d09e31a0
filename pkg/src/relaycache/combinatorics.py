"""Exact counting for combination networks.

Everything here is integer arithmetic; alternating sums are evaluated with
Python ints so there is no rounding anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .topology import NetworkTopology

UserSet = tuple[int, ...]


def binom(x: int, y: int) -> int:
    """Binomial coefficient, zero when ``x < 0``, ``y < 0`` or ``x < y``."""
    if x < 0 or y < 0 or x < y:
        return 0
    return comb(x, y)


@dataclass(frozen=True)
class NetParams:
    H: int
    r: int
    N: int
    B: int = 1

    def __post_init__(self):
        if self.H < 1 or self.r < 1:
            raise ValueError(f"H and r must be positive (got H={self.H}, r={self.r})")
        if self.r > self.H:
            raise ValueError(f"r={self.r} exceeds H={self.H}")
        if self.N < 1:
            raise ValueError(f"N must be positive (got {self.N})")
        if self.B < 1:
            raise ValueError(f"B must be positive (got {self.B})")

    @property
    def K(self) -> int:
        return binom(self.H, self.r)

    @property
    def K1(self) -> int:
        return k_i(self, 1)

    @property
    def K2(self) -> int:
        # zero when r = 1: no pair of relays shares a user
        return binom(self.H - 2, self.r - 2)


def k_i(params: NetParams, i: int) -> int:
    """Number of users attached to every relay of a fixed ``i``-subset."""
    if not 0 <= i <= params.r:
        raise ValueError(f"i={i} outside [0:{params.r}]")
    return binom(params.H - i, params.r - i)


def _k(params: NetParams, i: int) -> int:
    # K_i without the range check, for the alternating sums below
    return binom(params.H - i, params.r - i)


def _check_gain(params: NetParams, g: int) -> None:
    if not 1 <= g <= params.K1:
        raise ValueError(f"g={g} outside [1:{params.K1}]")


def s1(params: NetParams, g: int) -> int:
    """Number of coded subfiles a single user can end up holding for gain ``g``."""
    _check_gain(params, g)
    r = params.r
    return sum(
        binom(r, a) * binom(_k(params, a), g - 1) * (-1) ** (a - 1) for a in range(1, r + 1)
    )


def s2(params: NetParams, g: int) -> int:
    """Number of coded subfiles a single user caches for gain ``g``."""
    _check_gain(params, g)
    r = params.r
    return sum(
        binom(r, a) * binom(_k(params, a) - 1, g - 2) * (-1) ** (a - 1) for a in range(1, r + 1)
    )


def proposed_gains(params: NetParams) -> range:
    """Gains with a relay-assisted corner: ``[2 : min(K_2 + 1, K_1)]``, empty when r = 1."""
    if params.K2 < 1:
        return range(0)
    return range(2, min(params.K2 + 1, params.K1) + 1)


def max_common_relays(params: NetParams, g: int) -> int:
    """Largest ``|R_W|`` over ``W`` in ``Z_g``: max y in [1:r] with K_y >= g-1."""
    for y in range(params.r, 0, -1):
        if _k(params, y) >= g - 1:
            return y
    raise ValueError(f"no relay serves {g - 1} users (K_1={params.K1})")


def enumerate_zg(topology: NetworkTopology, g: int) -> list[UserSet]:
    """All ``(g-1)``-user sets that share at least one relay, in lexicographic order."""
    if not 1 <= g <= topology.params.K1 + 1:
        raise ValueError(f"g={g} outside [1:{topology.params.K1 + 1}]")
    # every such W lies inside some U_h, so enumerate per relay and deduplicate
    found: set[UserSet] = set()
    for users in topology.relay_users:
        found.update(combinations(users, g - 1))
    return sorted(found)


def relevant_sets(topology: NetworkTopology, g: int, k: int) -> list[UserSet]:
    """Members ``W`` of ``Z_g`` whose symbol user ``k`` ends up holding.

    These are the sets with ``k`` in ``W`` plus the sets for which ``{k} | W``
    still has a common relay; both cases reduce to ``R_{{k} | W}`` nonempty.
    """
    topology.check_user(k)
    if not 1 <= g <= topology.params.K1 + 1:
        raise ValueError(f"g={g} outside [1:{topology.params.K1 + 1}]")
    # R_{k u W} nonempty means W sits inside U_h for some relay h of user k
    found: set[UserSet] = set()
    for h in topology.H_of(k):
        found.update(combinations(topology.U(h), g - 1))
    return sorted(found)
