"""Coded caching on combination networks with cache-aided relays and users."""

from .combinatorics import NetParams, binom, enumerate_zg, k_i, relevant_sets, s1, s2
from .schemes import SchemePoint, make_scheme
from .simulator import LoadPair, run_episode, run_mixture, worst_case_loads
from .topology import NetworkTopology, build_topology

__all__ = [
    "LoadPair",
    "NetParams",
    "NetworkTopology",
    "SchemePoint",
    "binom",
    "build_topology",
    "enumerate_zg",
    "k_i",
    "make_scheme",
    "relevant_sets",
    "run_episode",
    "run_mixture",
    "s1",
    "s2",
    "worst_case_loads",
]
