"""End-to-end episodes: payloads, placement, delivery, decoding and exact loads."""

from __future__ import annotations

import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .erasure import P
from .schemes import (
    CornerScheme,
    DecodeError,
    SchemeError,
    SchemePoint,
    build_transcript,
    decode_user,
    make_scheme,
)
from .topology import NetworkTopology

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LoadPair:
    s_to_r: Fraction
    r_to_u: Fraction

    def __post_init__(self):
        if self.s_to_r < 0 or self.r_to_u < 0:
            raise ValueError(f"negative load {self}")

    def max(self, other: "LoadPair") -> "LoadPair":
        return LoadPair(max(self.s_to_r, other.s_to_r), max(self.r_to_u, other.r_to_u))


def frac_text(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass
class EpisodeReport:
    point: str
    m_relay: Fraction
    m_user: Fraction
    demands: tuple[int, ...]
    seed: int
    B: int
    relay_loads: dict[int, Fraction]
    link_loads: dict[tuple[int, int], Fraction]
    decode_ok: dict[int, bool]
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def s_to_r(self) -> Fraction:
        return max(self.relay_loads.values(), default=Fraction(0))

    @property
    def r_to_u(self) -> Fraction:
        return max(self.link_loads.values(), default=Fraction(0))

    @property
    def loads(self) -> LoadPair:
        return LoadPair(self.s_to_r, self.r_to_u)

    @property
    def ok(self) -> bool:
        return all(self.decode_ok.values())

    def to_dict(self) -> dict:
        def pair(x):
            return {"exact": frac_text(x), "float": float(x)}

        return {
            "point": self.point,
            "M_relay": pair(self.m_relay),
            "M_user": pair(self.m_user),
            "B": self.B,
            "seed": self.seed,
            "demands": list(self.demands),
            "R_s_to_r": pair(self.s_to_r),
            "R_r_to_u": pair(self.r_to_u),
            "relay_loads": {str(h): frac_text(v) for h, v in self.relay_loads.items()},
            "link_loads": {f"{h}->{k}": frac_text(v) for (h, k), v in self.link_loads.items()},
            "decode_ok": all(self.decode_ok.values()),
            "failures": self.failures,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _check_demands(topology: NetworkTopology, demands: Sequence[int]) -> tuple[int, ...]:
    N = topology.params.N
    if len(demands) != topology.K:
        raise ValueError(f"need {topology.K} demands, got {len(demands)}")
    if any(not 1 <= d <= N for d in demands):
        raise ValueError(f"demands must lie in [1:{N}]")
    return tuple(int(d) for d in demands)


@dataclass
class _Segment:
    """Raw outcome of one corner scheme on one file segment (lengths in units)."""

    relay_units: dict[int, int]
    link_units: dict[tuple[int, int], int]
    decoded: dict[int, np.ndarray | None]
    failures: list[str]


def _run_segment(scheme: CornerScheme, files: np.ndarray, demands, drop=None) -> _Segment:
    B = files.shape[1]
    scheme.check_B(B)
    encoded = [scheme.encode(f) for f in files]
    cache = scheme.place(encoded, B)
    cache.check_budget()
    plan = scheme.plan(demands, B)
    tlog = build_transcript(scheme, plan, encoded, cache)
    if drop is not None:
        victim = drop(tlog)
        if victim is not None:
            log.info("dropping %s", victim.label())
            tlog.drop(victim)
    relay_units = {h: sum(m.length for m in ms) for h, ms in tlog.server_to_relay.items()}
    link_units = {hk: sum(m.length for m in ms) for hk, ms in tlog.relay_to_user.items()}
    decoded, failures = {}, []
    for k in scheme.topology.users:
        try:
            decoded[k] = decode_user(scheme, cache, tlog, k, demands[k - 1], plan)
        except DecodeError as err:
            decoded[k] = None
            failures.append(str(err))
    return _Segment(relay_units, link_units, decoded, failures)


def make_files(N: int, B: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, P, size=(N, B), dtype=np.int64)


def run_episode(
    topology: NetworkTopology,
    point: SchemePoint,
    demands: Sequence[int],
    seed: int = 0,
    B: int | None = None,
    drop=None,
) -> EpisodeReport:
    """Place, deliver and decode one demand vector for a single corner point.

    ``drop`` is an optional fault injector: called with the transcript, it
    returns a message to delete before decoding.
    """
    return run_mixture(topology, [(Fraction(1), point)], demands, seed=seed, B=B, drop=drop)


def mixture_min_B(schemes: Sequence[tuple[Fraction, CornerScheme]]) -> int:
    return lcm(*(w.denominator * s.min_B for w, s in schemes if w > 0))


def run_mixture(
    topology: NetworkTopology,
    mixture: Sequence[tuple[Fraction, SchemePoint]],
    demands: Sequence[int],
    seed: int = 0,
    B: int | None = None,
    drop=None,
) -> EpisodeReport:
    """Memory sharing: every file is cut into segments of relative size ``w`` and
    each segment is served by its own corner scheme."""
    demands = _check_demands(topology, demands)
    weights = [Fraction(w) for w, _ in mixture]
    if any(w < 0 for w in weights) or sum(weights) != 1:
        raise ValueError(f"mixture weights must be non-negative and sum to 1, got {weights}")
    schemes = [(w, make_scheme(topology, pt)) for w, (_, pt) in zip(weights, mixture) if w > 0]
    need = mixture_min_B(schemes)
    if B is None:
        B = need
    elif B % need:
        raise SchemeError(f"B={B} is not a multiple of the minimal valid size {need}")
    files = make_files(topology.params.N, B, seed)

    relay_units = {h: 0 for h in topology.relays}
    link_units = {(h, k): 0 for h in topology.relays for k in topology.U(h)}
    parts: dict[int, list] = {k: [] for k in topology.users}
    failures: list[str] = []
    start = 0
    for w, scheme in schemes:
        stop = start + int(w * B)
        seg = _run_segment(scheme, files[:, start:stop], demands, drop)
        for h, v in seg.relay_units.items():
            relay_units[h] += v
        for hk, v in seg.link_units.items():
            link_units[hk] += v
        for k, v in seg.decoded.items():
            parts[k].append(v)
        failures.extend(seg.failures)
        start = stop

    decode_ok = {}
    for k in topology.users:
        got = parts[k]
        decode_ok[k] = all(p is not None for p in got) and np.array_equal(
            np.concatenate(got), files[demands[k - 1] - 1]
        )
        if not decode_ok[k] and all(p is not None for p in got):
            failures.append(f"user {k}: decoded payload differs from file {demands[k - 1]}")

    m_relay = sum((w * s.m_relay for w, s in schemes), Fraction(0))
    m_user = sum((w * s.m_user for w, s in schemes), Fraction(0))
    if len(schemes) == 1:
        label = schemes[0][1].point.describe()
    else:
        label = " + ".join(f"{frac_text(w)}*{s.point.describe()}" for w, s in schemes)
    report = EpisodeReport(
        point=label,
        m_relay=m_relay,
        m_user=m_user,
        demands=demands,
        seed=seed,
        B=B,
        relay_loads={h: Fraction(v, B) for h, v in relay_units.items()},
        link_loads={hk: Fraction(v, B) for hk, v in link_units.items()},
        decode_ok=decode_ok,
        failures=failures,
    )
    if len(schemes) == 1:
        report.notes.extend(_known_discrepancies(topology, schemes[0][1], report))
    return report


def _known_discrepancies(topology, scheme: CornerScheme, report: EpisodeReport) -> list[str]:
    # local import: analysis depends on this module
    from .analysis import printed_proposed_r_to_u

    if scheme.point.scheme != "proposed":
        return []
    params = topology.params
    notes = []
    printed = printed_proposed_r_to_u(params, scheme.point.g)
    if printed != report.r_to_u:
        notes.append(
            f"printed R_r_to_u expression gives {frac_text(printed)}; transcript gives "
            f"{frac_text(report.r_to_u)} (side-information sets sharing three or more relays)"
        )
    if (params.H, params.r, params.N, scheme.point.g) == (5, 3, 10, 3):
        notes.append(
            "reference worked example lists R_r_to_u = 41/72 at this point; closed form and "
            f"transcript both give {frac_text(report.r_to_u)}"
        )
    return notes


def distinct_demands(topology: NetworkTopology) -> tuple[int, ...]:
    if topology.params.N < topology.K:
        raise ValueError(f"distinct demands need N >= K (N={topology.params.N}, K={topology.K})")
    return tuple(topology.users)


def _episode_loads(args) -> tuple[LoadPair, bool]:
    topology, point, d, seed = args
    rep = run_episode(topology, point, d, seed=seed)
    return rep.loads, rep.ok


def worst_case_loads(
    topology: NetworkTopology,
    point: SchemePoint,
    policy: str = "distinct",
    seed: int = 0,
    workers: int = 1,
) -> LoadPair:
    """Max-link loads under the worst demand vector.

    ``distinct`` runs ``d_k = k``; ``exhaustive`` tries all ``N**K`` vectors
    and takes the component-wise maximum. Decode failures raise.
    """
    if policy == "distinct":
        rep = run_episode(topology, point, distinct_demands(topology), seed=seed)
        if not rep.ok:
            raise DecodeError(0, "; ".join(rep.failures))
        return rep.loads
    if policy != "exhaustive":
        raise ValueError(f"unknown demand policy {policy!r}")
    N, K = topology.params.N, topology.K
    jobs = [(topology, point, d, seed) for d in itertools.product(range(1, N + 1), repeat=K)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_episode_loads, jobs, chunksize=8))
    else:
        results = [_episode_loads(j) for j in jobs]
    worst = LoadPair(Fraction(0), Fraction(0))
    for loads, ok in results:
        if not ok:
            raise DecodeError(0, f"exhaustive sweep hit a decode failure at {point.describe()}")
        worst = worst.max(loads)
    return worst
