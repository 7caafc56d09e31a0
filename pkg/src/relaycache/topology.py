"""The (H, r) combination network and its adjacency queries."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .combinatorics import NetParams, UserSet


@dataclass(frozen=True)
class NetworkTopology:
    """Users are numbered by the lexicographic rank of their relay subset.

    ``user_relays[k - 1]`` is ``H_k`` and ``relay_users[h - 1]`` is ``U_h``;
    ids are 1-based throughout.
    """

    params: NetParams
    user_relays: tuple[tuple[int, ...], ...]
    relay_users: tuple[tuple[int, ...], ...]
    _rw_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def H(self) -> int:
        return self.params.H

    @property
    def K(self) -> int:
        return len(self.user_relays)

    @property
    def users(self) -> range:
        return range(1, self.K + 1)

    @property
    def relays(self) -> range:
        return range(1, self.H + 1)

    def check_user(self, k: int) -> None:
        if not 1 <= k <= self.K:
            raise ValueError(f"user {k} outside [1:{self.K}]")

    def U(self, h: int) -> tuple[int, ...]:
        return self.relay_users[h - 1]

    def H_of(self, k: int) -> tuple[int, ...]:
        return self.user_relays[k - 1]

    def common_relays(self, W: Iterable[int]) -> frozenset[int]:
        """``R_W``: relays connected to every user of ``W`` (all relays for ``W = {}``)."""
        key = frozenset(W)
        hit = self._rw_cache.get(key)
        if hit is None:
            out = set(self.relays)
            for k in key:
                self.check_user(k)
                out.intersection_update(self.H_of(k))
            hit = self._rw_cache[key] = frozenset(out)
        return hit

    def to_json(self) -> str:
        return json.dumps(
            {
                "H": self.params.H,
                "r": self.params.r,
                "relay_users": {str(h): list(self.U(h)) for h in self.relays},
                "user_relays": {str(k): list(self.H_of(k)) for k in self.users},
            },
            indent=2,
        )


def build_topology(
    params: NetParams, labeling: Sequence[Sequence[int]] | None = None
) -> NetworkTopology:
    """Build the network; ``labeling`` optionally overrides the user order.

    ``labeling[k - 1]`` must be the relay set of user ``k``; together the rows
    must list every r-subset of ``[1:H]`` exactly once.
    """
    if params.r > params.H:
        raise ValueError(f"r={params.r} exceeds H={params.H}")
    subsets = list(combinations(range(1, params.H + 1), params.r))
    if labeling is None:
        user_relays = tuple(subsets)
    else:
        user_relays = tuple(tuple(sorted(row)) for row in labeling)
        if sorted(user_relays) != subsets:
            raise ValueError("labeling must be a permutation of all r-subsets of [1:H]")
    relay_users = tuple(
        tuple(k for k, rel in enumerate(user_relays, start=1) if h in rel)
        for h in range(1, params.H + 1)
    )
    return NetworkTopology(params, user_relays, relay_users)


def user_set(members: Iterable[int]) -> UserSet:
    """Canonical sorted, duplicate-free user tuple."""
    return tuple(sorted(set(members)))
