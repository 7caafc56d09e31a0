"""Invariant suite behind ``relaycache verify``."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .analysis import formula_loads
from .combinatorics import NetParams, proposed_gains, relevant_sets, s1, s2
from .erasure import P, MdsCode, mds_decode, mds_encode
from .schemes import SchemePoint
from .simulator import distinct_demands, run_episode, worst_case_loads
from .topology import build_topology


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}" + (f"  -- {self.detail}" if self.detail else "")


def corner_points(params: NetParams) -> list[SchemePoint]:
    """Every corner-point parameter of every scheme, plus a few routing memories."""
    N, r, K1 = params.N, params.r, params.K1
    pts = [SchemePoint("zewail1", t2=t) for t in range(K1 + 1)]
    pts += [SchemePoint("zewail2", t1=t) for t in sorted({0, K1})]
    pts += [SchemePoint("wanita", g=g) for g in range(1, K1 + 1)]
    pts += [SchemePoint("proposed", g=g) for g in proposed_gains(params)]
    for mr, mu in [(0, 0), (Fraction(N, r), 0), (0, N), (Fraction(N, 2 * r), Fraction(N, 2))]:
        pts.append(SchemePoint("routing", m_relay=Fraction(mr), m_user=Fraction(mu)))
    return pts


def check_inclusion_exclusion(max_H: int = 5) -> CheckResult:
    for H in range(1, max_H + 1):
        for r in range(1, H + 1):
            params = NetParams(H, r, 1)
            topo = build_topology(params)
            for g in range(1, params.K1 + 1):
                want1, want2 = s1(params, g), s2(params, g)
                for k in topo.users:
                    rel = relevant_sets(topo, g, k)
                    if len(rel) != want1 or sum(k in W for W in rel) != want2:
                        return CheckResult("inclusion-exclusion counts", False, f"H={H} r={r} g={g} k={k}")
    return CheckResult("inclusion-exclusion counts", True, f"all (H, r) with H <= {max_H}")


def check_mds(trials: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    for n, k in [(45, 36), (5, 3), (12, 8)]:
        code = MdsCode(n, k)
        src = [np.array([rng.randrange(P) for _ in range(4)]) for _ in range(k)]
        chunks = mds_encode(code, src)
        for _ in range(trials):
            pick = rng.sample(chunks, k)
            out = mds_decode(code, pick)
            if not all(np.array_equal(a, b) for a, b in zip(out, src)):
                return CheckResult("MDS any-k decoding", False, f"(n,k)=({n},{k}) subset {[c.index for c in pick]}")
    return CheckResult("MDS any-k decoding", True, f"{trials} subsets per code")


def check_corners(H: int, r: int, seed: int = 0) -> Iterator[CheckResult]:
    params = NetParams(H, r, NetParams(H, r, 1).K)
    topo = build_topology(params)
    d = distinct_demands(topo)
    for pt in corner_points(params):
        rep = run_episode(topo, pt, d, seed=seed)
        name = f"(H={H}, r={r}) {pt.describe()}"
        if not rep.ok:
            yield CheckResult(f"decode {name}", False, "; ".join(rep.failures[:2]))
            continue
        want = formula_loads(params, pt)
        ok = want == rep.loads
        detail = "" if ok else f"formula {want} vs measured {rep.loads}"
        yield CheckResult(f"decode + formula {name}", ok, detail)


def check_exhaustive(H: int, r: int, N: int, workers: int = 1) -> Iterator[CheckResult]:
    topo = build_topology(NetParams(H, r, N))
    K1 = topo.params.K1
    pts = [SchemePoint("wanita", g=g) for g in range(1, K1 + 1)]
    pts += [SchemePoint("zewail1", t2=t) for t in range(K1 + 1)]
    pts += [SchemePoint("zewail2", t1=t) for t in sorted({0, K1})]
    for pt in pts:
        worst = worst_case_loads(topo, pt, "exhaustive", workers=workers)
        dist = worst_case_loads(topo, pt, "distinct")
        yield CheckResult(
            f"exhaustive demands (H={H}, r={r}, N={N}) {pt.describe()}",
            worst == dist,
            "" if worst == dist else f"worst {worst} vs distinct {dist}",
        )


def first_v_message(tlog):
    for ms in tlog.server_to_relay.values():
        for m in ms:
            if m.family == "V":
                return m
    return None


def check_fault_injection() -> CheckResult:
    """Drop one multicast at the (5,3,10) g=3 point; decoding must fail by name."""
    topo = build_topology(NetParams(5, 3, 10))
    rep = run_episode(topo, SchemePoint("proposed", g=3), distinct_demands(topo), drop=first_v_message)
    return CheckResult("fault injection (dropped V message)", rep.ok, "; ".join(rep.failures[:1]))


def run_suite(
    exhaustive: tuple[int, int, int] | None = None,
    inject_fault: bool = False,
    networks=((3, 2), (4, 2), (5, 3)),
    workers: int = 1,
) -> list[CheckResult]:
    steps: list[Callable[[], Iterator[CheckResult] | CheckResult]] = [
        check_inclusion_exclusion,
        check_mds,
        *[(lambda H=H, r=r: check_corners(H, r)) for H, r in networks],
    ]
    if exhaustive is not None:
        steps.append(lambda: check_exhaustive(*exhaustive, workers=workers))
    if inject_fault:
        steps.append(check_fault_injection)
    out: list[CheckResult] = []
    for step in steps:
        res = step()
        out.extend([res] if isinstance(res, CheckResult) else list(res))
    return out

