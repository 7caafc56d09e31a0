"""Stage a corner point step by step so tests can look inside caches and transcripts."""

from dataclasses import dataclass
from fractions import Fraction

from relaycache import NetParams, SchemePoint, build_topology
from relaycache.analysis import proposed_corners, zewail_corners
from relaycache.combinatorics import proposed_gains
from relaycache.schemes import CacheState, CornerScheme, Plan, TransmissionLog, build_transcript, make_scheme
from relaycache.simulator import make_files


@dataclass
class Staged:
    scheme: CornerScheme
    B: int
    files: object
    encoded: list
    cache: CacheState
    plan: Plan
    log: TransmissionLog
    demands: tuple


def stage(topo, point, demands=None, B=None, seed=0) -> Staged:
    scheme = make_scheme(topo, point)
    B = scheme.min_B if B is None else B
    demands = tuple(topo.users) if demands is None else tuple(demands)
    files = make_files(topo.params.N, B, seed)
    encoded = [scheme.encode(f) for f in files]
    cache = scheme.place(encoded, B)
    plan = scheme.plan(demands, B)
    log = build_transcript(scheme, plan, encoded, cache)
    return Staged(scheme, B, files, encoded, cache, plan, log, demands)


def all_corners(params: NetParams) -> list[SchemePoint]:
    """Every in-range corner parameter of every scheme, plus routing samples."""
    K1 = params.K1
    pts = [SchemePoint("zewail1", t2=t) for t in range(K1 + 1)]
    pts += [SchemePoint("zewail2", t1=t) for t in sorted({0, K1})]
    pts += [SchemePoint("wanita", g=g) for g in range(1, K1 + 1)]
    pts += [SchemePoint("proposed", g=g) for g in proposed_gains(params)]
    N, r = params.N, params.r
    for mr, mu in [(0, 0), (Fraction(N, r), 0), (0, N), (Fraction(N, 2 * r), Fraction(N, 2))]:
        pts.append(SchemePoint("routing", m_relay=Fraction(mr), m_user=Fraction(mu)))
    return pts


def net(H, r, N=None):
    p = NetParams(H, r, N if N is not None else NetParams(H, r, 1).K)
    return p, build_topology(p)


__all__ = ["Staged", "stage", "all_corners", "net", "proposed_corners", "zewail_corners"]
