"""Placement and delivery for every corner-point scheme.

Files are sequences of field elements. Each scheme cuts a file into *chunks*
(coded symbols) and every stored or transmitted object is a ``PieceLabel``: a
set of element ranges inside one chunk of one file. Multicast messages are the
bitwise XOR of equal-length pieces.

A scheme produces a symbolic ``Plan`` for a demand vector; ``build_transcript``
attaches payloads, and ``decode_user`` peels XORs with whatever the user
already knows and finally MDS-decodes its file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .combinatorics import (
    UserSet,
    binom,
    enumerate_zg,
    max_common_relays,
    proposed_gains,
    relevant_sets,
    s1,
    s2,
)
from .erasure import Chunk, MdsCode, mds_decode, mds_encode
from .topology import NetworkTopology

SCHEMES = ("routing", "zewail1", "zewail2", "wanita", "proposed")

Range = tuple[int, int]
ChunkKey = tuple


class SchemeError(ValueError):
    """Invalid scheme parameters or an impossible construction."""


class DecodeError(RuntimeError):
    def __init__(self, user: int, missing: str, detail: str = ""):
        self.user = user
        self.missing = missing
        super().__init__(f"user {user} cannot decode: missing {missing}" + (f" ({detail})" if detail else ""))


def _fmt_set(W: Iterable[int]) -> str:
    return "{" + ",".join(map(str, W)) + "}"


def chunk_name(file: int, chunk: ChunkKey) -> str:
    kind = chunk[0]
    if kind == "f":
        return f"f_{{{file},{_fmt_set(chunk[1])}}}"
    if kind == "s":
        return f"s^{chunk[1]}_{file}"
    return f"u_{file}"


@dataclass(frozen=True)
class PieceLabel:
    """Element ranges of one chunk; ``part`` says which split produced them."""

    file: int
    chunk: ChunkKey
    part: str
    ranges: tuple[Range, ...]

    @property
    def length(self) -> int:
        return sum(b - a for a, b in self.ranges)

    def __str__(self) -> str:
        return f"{chunk_name(self.file, self.chunk)}[{self.part}]"


@dataclass(frozen=True)
class SchemePoint:
    scheme: str
    g: int | None = None
    t1: int | None = None
    t2: int | None = None
    m_relay: Fraction | None = None
    m_user: Fraction | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise SchemeError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")

    def describe(self) -> str:
        if self.scheme in ("wanita", "proposed"):
            return f"{self.scheme}(g={self.g})"
        if self.scheme == "zewail1":
            return f"zewail1(t2={self.t2})"
        if self.scheme == "zewail2":
            return f"zewail2(t1={self.t1})"
        return f"routing(m_relay={self.m_relay},m_user={self.m_user})"

    def params_text(self) -> str:
        return self.describe()[len(self.scheme) + 1 : -1]


# ---------------------------------------------------------------------------
# transcript / cache containers


@dataclass(eq=False)
class Message:
    family: str  # "W", "w", "V" (server multicasts), "own", "side", "cached", "route"
    relay: int
    recipients: tuple[int, ...]
    pieces: tuple[PieceLabel, ...]
    payload: np.ndarray | None = None
    from_server: bool = True

    @property
    def length(self) -> int:
        return self.pieces[0].length

    def label(self) -> str:
        if self.family in ("W", "w", "V"):
            return f"{self.family}^{self.relay}_{_fmt_set(self.recipients)}"
        return f"{self.family}@{self.relay}->{_fmt_set(self.recipients)}"

    def to_dict(self) -> dict:
        return {
            "relay": self.relay,
            "recipients": list(self.recipients),
            "family": self.family,
            "from_server": self.from_server,
            "labels": [str(p) for p in self.pieces],
            "length": self.length,
        }


@dataclass
class Plan:
    """Symbolic delivery: server multicasts and relay-originated unicasts."""

    server: list[Message] = field(default_factory=list)
    relay: list[Message] = field(default_factory=list)

    def multicast(self, family: str, relay: int, recipients: Sequence[int], pieces: Sequence[PieceLabel]):
        lengths = {p.length for p in pieces}
        if len(lengths) != 1:
            raise SchemeError(
                f"{family}^{relay}_{_fmt_set(recipients)} mixes lengths {sorted(lengths)}"
            )
        if lengths.pop() == 0:
            return
        self.server.append(Message(family, relay, tuple(recipients), tuple(pieces)))

    def unicast(self, family: str, relay: int, user: int, piece: PieceLabel):
        if piece.length:
            self.relay.append(Message(family, relay, (user,), (piece,), from_server=False))


@dataclass
class TransmissionLog:
    server_to_relay: dict[int, list[Message]]
    relay_to_user: dict[tuple[int, int], list[Message]]

    def to_dict(self) -> dict:
        return {
            "server_to_relay": {str(h): [m.to_dict() for m in ms] for h, ms in self.server_to_relay.items()},
            "relay_to_user": {
                f"{h}->{k}": [m.to_dict() for m in ms] for (h, k), ms in self.relay_to_user.items()
            },
        }

    def drop(self, message: Message) -> None:
        """Remove a message everywhere it appears (fault injection)."""
        for ms in self.server_to_relay.values():
            ms[:] = [m for m in ms if m is not message]
        for ms in self.relay_to_user.values():
            ms[:] = [m for m in ms if m is not message]


@dataclass
class CacheState:
    point: SchemePoint
    B: int
    m_relay: Fraction
    m_user: Fraction
    relay_caches: dict[int, list[tuple[PieceLabel, np.ndarray]]]
    user_caches: dict[int, list[tuple[PieceLabel, np.ndarray]]]

    def relay_fill(self, h: int) -> int:
        return sum(p.length for p, _ in self.relay_caches[h])

    def user_fill(self, k: int) -> int:
        return sum(p.length for p, _ in self.user_caches[k])

    def check_budget(self) -> None:
        want_r, want_u = self.m_relay * self.B, self.m_user * self.B
        for h, _ in self.relay_caches.items():
            if self.relay_fill(h) != want_r:
                raise SchemeError(f"relay {h} stores {self.relay_fill(h)} units, budget {want_r}")
        for k in self.user_caches:
            if self.user_fill(k) != want_u:
                raise SchemeError(f"user {k} stores {self.user_fill(k)} units, budget {want_u}")


def _piece_payload(encoded: dict[ChunkKey, np.ndarray], piece: PieceLabel) -> np.ndarray:
    arr = encoded[piece.chunk]
    return np.concatenate([arr[a:b] for a, b in piece.ranges])


def _xor(arrays: Iterable[np.ndarray]) -> np.ndarray:
    arrays = list(arrays)
    out = arrays[0].copy()
    for a in arrays[1:]:
        np.bitwise_xor(out, a, out=out)
    return out


# ---------------------------------------------------------------------------
# schemes


def _split(length: int, parts: int) -> list[Range]:
    if length % parts:
        raise SchemeError(f"cannot split {length} units into {parts} equal parts")
    step = length // parts
    return [(j * step, (j + 1) * step) for j in range(parts)]


def _cut(ranges: Sequence[Range], parts: int) -> list[tuple[Range, ...]]:
    """Cut a concatenation of ranges into ``parts`` equal consecutive pieces."""
    total = sum(b - a for a, b in ranges)
    if total % parts:
        raise SchemeError(f"cannot split {total} units into {parts} equal parts")
    step = total // parts
    out: list[tuple[Range, ...]] = []
    cur: list[Range] = []
    need = step
    for a, b in ranges:
        while a < b:
            take = min(need, b - a)
            if take:
                cur.append((a, a + take))
            a += take
            need -= take
            if need == 0:
                out.append(tuple(cur))
                cur, need = [], step
    while len(out) < parts:  # only reachable when step == 0
        out.append(tuple(cur))
        cur = []
    return out


class CornerScheme:
    """Common machinery; subclasses define chunks, placement and delivery."""

    name = ""

    def __init__(self, topology: NetworkTopology, point: SchemePoint):
        self.topology = topology
        self.params = topology.params
        self.point = point

    # -- parameters
    m_relay: Fraction
    m_user: Fraction

    def unit_fractions(self) -> list[Fraction]:
        """Every piece length as a fraction of B; B must make all integral."""
        raise NotImplementedError

    @property
    def min_B(self) -> int:
        return lcm(*(Fraction(f).denominator for f in self.unit_fractions()))

    def check_B(self, B: int) -> None:
        if B < 1 or B % self.min_B:
            raise SchemeError(f"B={B} is not a multiple of the minimal valid size {self.min_B}")

    # -- chunks
    def encode(self, payload: np.ndarray) -> dict[ChunkKey, np.ndarray]:
        raise NotImplementedError

    def chunk_lengths(self, B: int) -> dict[ChunkKey, int]:
        raise NotImplementedError

    # -- placement
    def relay_pieces(self, h: int, B: int) -> list[PieceLabel]:
        return []

    def user_pieces(self, k: int, B: int) -> list[PieceLabel]:
        return []

    def place(self, encoded_files: Sequence[dict[ChunkKey, np.ndarray]], B: int) -> CacheState:
        relay = {
            h: [(p, _piece_payload(encoded_files[p.file - 1], p)) for p in self.relay_pieces(h, B)]
            for h in self.topology.relays
        }
        user = {
            k: [(p, _piece_payload(encoded_files[p.file - 1], p)) for p in self.user_pieces(k, B)]
            for k in self.topology.users
        }
        return CacheState(self.point, B, self.m_relay, self.m_user, relay, user)

    # -- delivery
    def plan(self, demands: Sequence[int], B: int) -> Plan:
        raise NotImplementedError

    # -- reconstruction
    def reassemble(self, k: int, d_k: int, known: "Knowledge", B: int) -> np.ndarray:
        raise NotImplementedError


class Knowledge:
    """What one node can read: per-chunk values with a known-mask."""

    def __init__(self, chunk_lengths: dict[ChunkKey, int]):
        self.chunk_lengths = chunk_lengths
        self.values: dict[tuple[int, ChunkKey], np.ndarray] = {}
        self.mask: dict[tuple[int, ChunkKey], np.ndarray] = {}

    def _slot(self, file: int, chunk: ChunkKey):
        key = (file, chunk)
        if key not in self.values:
            n = self.chunk_lengths[chunk]
            self.values[key] = np.zeros(n, dtype=np.int64)
            self.mask[key] = np.zeros(n, dtype=bool)
        return self.values[key], self.mask[key]

    def learn(self, piece: PieceLabel, payload: np.ndarray) -> None:
        vals, mask = self._slot(piece.file, piece.chunk)
        pos = 0
        for a, b in piece.ranges:
            vals[a:b] = payload[pos : pos + b - a]
            mask[a:b] = True
            pos += b - a

    def knows(self, piece: PieceLabel) -> bool:
        if piece.length == 0:
            return True
        _, mask = self._slot(piece.file, piece.chunk)
        return all(mask[a:b].all() for a, b in piece.ranges)

    def read(self, piece: PieceLabel) -> np.ndarray:
        vals, _ = self._slot(piece.file, piece.chunk)
        return np.concatenate([vals[a:b] for a, b in piece.ranges])

    def chunk(self, file: int, chunk: ChunkKey) -> np.ndarray | None:
        vals, mask = self._slot(file, chunk)
        return vals if mask.all() else None


class RoutingScheme(CornerScheme):
    """Uncoded routing baseline.

    Users cache a leading ``M_user/N`` segment of every file. The rest is
    (H, r)-MDS coded so the r relays of any user hold disjoint information;
    relay ``h`` caches the first ``M_relay*B/N`` units of symbol ``h`` of every
    file and the server supplies the remainder of each demanded symbol.
    """

    name = "routing"

    def __init__(self, topology, point):
        super().__init__(topology, point)
        N, r = self.params.N, self.params.r
        if point.m_relay is None or point.m_user is None:
            raise SchemeError("routing needs m_relay and m_user")
        self.m_relay, self.m_user = Fraction(point.m_relay), Fraction(point.m_user)
        if not (0 <= self.m_relay <= N and 0 <= self.m_user <= N):
            raise SchemeError(f"memories must lie in [0, {N}]")
        if r * self.m_relay + self.m_user > N:
            raise SchemeError(
                f"r*m_relay + m_user = {r * self.m_relay + self.m_user} exceeds N={N}"
            )
        self.user_frac = self.m_user / N
        self.sym_frac = (1 - self.user_frac) / r
        self.relay_frac = self.m_relay / N
        self.code = MdsCode(self.params.H, r)

    def unit_fractions(self):
        return [self.user_frac, self.sym_frac, self.relay_frac]

    def chunk_lengths(self, B):
        out = {("u",): int(self.user_frac * B)}
        out.update({("s", h): int(self.sym_frac * B) for h in self.topology.relays})
        return out

    def encode(self, payload):
        B = len(payload)
        u = int(self.user_frac * B)
        rest = payload[u:]
        out = {("u",): payload[:u].copy()}
        L = len(rest) // self.params.r
        if L == 0:
            out.update({("s", h): np.zeros(0, dtype=np.int64) for h in self.topology.relays})
            return out
        chunks = mds_encode(self.code, [rest[j * L : (j + 1) * L] for j in range(self.params.r)])
        out.update({("s", c.index): c.payload for c in chunks})
        return out

    def relay_pieces(self, h, B):
        n = int(self.relay_frac * B)
        if n == 0:
            return []
        return [PieceLabel(i, ("s", h), "relay", ((0, n),)) for i in range(1, self.params.N + 1)]

    def user_pieces(self, k, B):
        n = int(self.user_frac * B)
        if n == 0:
            return []
        return [PieceLabel(i, ("u",), "whole", ((0, n),)) for i in range(1, self.params.N + 1)]

    def plan(self, demands, B):
        plan = Plan()
        cached = int(self.relay_frac * B)
        total = int(self.sym_frac * B)
        for h in self.topology.relays:
            by_file: dict[int, list[int]] = {}
            for k in self.topology.U(h):
                by_file.setdefault(demands[k - 1], []).append(k)
                plan.unicast("cached", h, k, PieceLabel(demands[k - 1], ("s", h), "relay", ((0, cached),)))
            for i, users in sorted(by_file.items()):
                plan.multicast("route", h, users, [PieceLabel(i, ("s", h), "rest", ((cached, total),))])
        return plan

    def reassemble(self, k, d_k, known, B):
        u = known.chunk(d_k, ("u",))
        if u is None:
            raise DecodeError(k, chunk_name(d_k, ("u",)))
        syms = []
        for h in self.topology.H_of(k):
            s = known.chunk(d_k, ("s", h))
            if s is None:
                raise DecodeError(k, chunk_name(d_k, ("s", h)))
            syms.append(Chunk(h, s))
        if len(syms[0].payload) == 0:
            return u.copy()
        rest = mds_decode(self.code, syms)
        return np.concatenate([u, *rest])


class _PrecodedScheme(CornerScheme):
    """Shared (H, r) MDS precoding: symbol ``s^h_i`` of length B/r per relay."""

    def __init__(self, topology, point):
        super().__init__(topology, point)
        self.code = MdsCode(self.params.H, self.params.r)

    def chunk_lengths(self, B):
        return {("s", h): B // self.params.r for h in self.topology.relays}

    def encode(self, payload):
        r = self.params.r
        L = len(payload) // r
        chunks = mds_encode(self.code, [payload[j * L : (j + 1) * L] for j in range(r)])
        return {("s", c.index): c.payload for c in chunks}

    def reassemble(self, k, d_k, known, B):
        syms = []
        for h in self.topology.H_of(k):
            s = known.chunk(d_k, ("s", h))
            if s is None:
                raise DecodeError(k, chunk_name(d_k, ("s", h)))
            syms.append(Chunk(h, s))
        return np.concatenate(mds_decode(self.code, syms))


class ZewailGroup1(_PrecodedScheme):
    """No relay memory; each relay runs an independent MAN-style scheme on its symbols."""

    name = "zewail1"

    def __init__(self, topology, point):
        super().__init__(topology, point)
        K1 = self.params.K1
        t2 = point.t2
        if t2 is None or not 0 <= t2 <= K1:
            raise SchemeError(f"t2={t2} outside [0:{K1}]")
        self.t2 = t2
        self.m_relay = Fraction(0)
        self.m_user = Fraction(self.params.N * t2, K1)
        self.n_sub = binom(K1, t2)
        # sub-piece index of each t2-subset of U_h, per relay
        self._sub = {
            h: {W: j for j, W in enumerate(combinations(topology.U(h), t2))} for h in topology.relays
        }

    def unit_fractions(self):
        return [Fraction(1, self.params.r * self.n_sub)]

    def _piece(self, i: int, h: int, W: UserSet, B: int) -> PieceLabel:
        L = B // (self.params.r * self.n_sub)
        j = self._sub[h][W]
        return PieceLabel(i, ("s", h), f"sub:{_fmt_set(W)}", ((j * L, (j + 1) * L),))

    def user_pieces(self, k, B):
        out = []
        for i in range(1, self.params.N + 1):
            for h in self.topology.H_of(k):
                for W in self._sub[h]:
                    if k in W:
                        out.append(self._piece(i, h, W, B))
        return out

    def plan(self, demands, B):
        plan = Plan()
        for h in self.topology.relays:
            for J in combinations(self.topology.U(h), self.t2 + 1):
                pieces = [
                    self._piece(demands[k - 1], h, tuple(x for x in J if x != k), B) for k in J
                ]
                plan.multicast("w", h, J, pieces)
        return plan


class ZewailGroup2(_PrecodedScheme):
    """Relays hold their whole MDS symbol of every file; the server is silent."""

    name = "zewail2"

    def __init__(self, topology, point):
        super().__init__(topology, point)
        K1 = self.params.K1
        if point.t1 not in (0, K1):
            raise SchemeError(f"t1={point.t1} must be 0 or K1={K1}")
        self.t1 = point.t1
        self.m_relay = Fraction(self.params.N, self.params.r)
        self.m_user = Fraction(self.params.N * self.t1, K1)

    def unit_fractions(self):
        return [Fraction(1, self.params.r)]

    def _whole(self, i, h, B):
        return PieceLabel(i, ("s", h), "whole", ((0, B // self.params.r),))

    def relay_pieces(self, h, B):
        return [self._whole(i, h, B) for i in range(1, self.params.N + 1)]

    def user_pieces(self, k, B):
        if self.t1 == 0:
            return []
        return [
            self._whole(i, h, B) for i in range(1, self.params.N + 1) for h in self.topology.H_of(k)
        ]

    def plan(self, demands, B):
        plan = Plan()
        if self.t1 == 0:
            for h in self.topology.relays:
                for k in self.topology.U(h):
                    plan.unicast("cached", h, k, self._whole(demands[k - 1], h, B))
        return plan


class _SubfileScheme(CornerScheme):
    """Files MDS-coded into one chunk ``f_{i,W}`` per ``W`` in ``Z_g``."""

    def __init__(self, topology, point):
        super().__init__(topology, point)
        self.g = point.g
        self.zg = enumerate_zg(topology, self.g)
        self.index = {W: j for j, W in enumerate(self.zg)}
        self.S1 = s1(self.params, self.g)
        self.S2 = s2(self.params, self.g)
        self.code = MdsCode(len(self.zg), self.S1)
        self._relevant: dict[int, list[UserSet]] = {}

    def chunk_lengths(self, B):
        c = B // self.S1
        return {("f", W): c for W in self.zg}

    def encode(self, payload):
        c = len(payload) // self.S1
        chunks = mds_encode(self.code, [payload[j * c : (j + 1) * c] for j in range(self.S1)])
        return {("f", self.zg[ch.index - 1]): ch.payload for ch in chunks}

    def relevant(self, k: int) -> list[UserSet]:
        if k not in self._relevant:
            self._relevant[k] = relevant_sets(self.topology, self.g, k)
        return self._relevant[k]

    def reassemble(self, k, d_k, known, B):
        chunks = []
        for W in self.relevant(k):
            vals = known.chunk(d_k, ("f", W))
            if vals is None:
                raise DecodeError(k, chunk_name(d_k, ("f", W)))
            chunks.append(Chunk(self.index[W] + 1, vals))
        return np.concatenate(mds_decode(self.code, chunks))

    def _gain_sets(self, h: int) -> Iterable[UserSet]:
        return combinations(self.topology.U(h), self.g)


class EndUserScheme(_SubfileScheme):
    """Asymmetric coded placement with no relay memory (gain ``g``)."""

    name = "wanita"

    def __init__(self, topology, point):
        K1 = topology.params.K1
        if point.g is None or not 1 <= point.g <= K1:
            raise SchemeError(f"g={point.g} outside [1:{K1}]")
        super().__init__(topology, point)
        self.m_relay = Fraction(0)
        self.m_user = Fraction(self.params.N * self.S2, self.S1)

    def unit_fractions(self):
        ys = {len(self.topology.common_relays(J)) for J in enumerate_zg(self.topology, self.g + 1)}
        return [Fraction(1, self.S1)] + [Fraction(1, self.S1 * y) for y in ys]

    def user_pieces(self, k, B):
        c = B // self.S1
        return [
            PieceLabel(i, ("f", W), "whole", ((0, c),))
            for i in range(1, self.params.N + 1)
            for W in self.zg
            if k in W
        ]

    def plan(self, demands, B):
        plan = Plan()
        c = B // self.S1
        for h in self.topology.relays:
            for J in self._gain_sets(h):
                RJ = sorted(self.topology.common_relays(J))
                a, b = _split(c, len(RJ))[RJ.index(h)]
                pieces = [
                    PieceLabel(demands[k - 1], ("f", tuple(x for x in J if x != k)), f"split:{h}", ((a, b),))
                    for k in J
                ]
                plan.multicast("W", h, J, pieces)
        return plan


class ProposedScheme(_SubfileScheme):
    """Relays cache slices of each coded subfile and act as side information.

    Every ``f_{i,W}`` is split into one slice per relay in ``R_W`` (length
    ``B/(maxY*S1)``) plus a user part holding the remainder. Delivery first
    pushes relay slices to users (own file plus side information), then the
    server multicasts XORs of what is still unknown.
    """

    name = "proposed"

    def __init__(self, topology, point):
        params = topology.params
        gains = proposed_gains(params)
        if not gains:
            raise SchemeError(f"no proposed corner for H={params.H}, r={params.r} (needs r >= 2 and K1 >= 2)")
        if point.g not in gains:
            raise SchemeError(f"g={point.g} outside [2:{gains.stop - 1}]")
        super().__init__(topology, point)
        N, g = params.N, self.g
        self.max_y = max_common_relays(params, g)
        self.m_relay = Fraction(N * binom(params.K1, g - 1), self.max_y * self.S1)
        self.m_user = Fraction(N * self.S2, self.S1) - Fraction(
            N * binom(params.K1 - 1, g - 2) * params.r, self.max_y * self.S1
        )
        if max(len(topology.common_relays(W)) for W in self.zg) != self.max_y:
            raise SchemeError("max |R_W| over Z_g disagrees with the K_y count")

    def unit_fractions(self):
        ys = {len(self.topology.common_relays(J)) for J in enumerate_zg(self.topology, self.g + 1)}
        base = Fraction(1, self.S1)
        out = [base, base / self.max_y]
        out += [base * Fraction(self.max_y - y, self.max_y * y) for y in ys]
        return out

    def _layout(self, W: UserSet, B: int) -> tuple[dict[int, Range], Range]:
        c = B // self.S1
        rho = c // self.max_y
        RW = sorted(self.topology.common_relays(W))
        parts = {h: (j * rho, (j + 1) * rho) for j, h in enumerate(RW)}
        return parts, (len(RW) * rho, c)

    def relay_part(self, i: int, W: UserSet, h: int, B: int) -> PieceLabel:
        parts, _ = self._layout(W, B)
        return PieceLabel(i, ("f", W), f"relay:{h}", (parts[h],))

    def relay_pieces(self, h, B):
        return [
            self.relay_part(i, W, h, B)
            for i in range(1, self.params.N + 1)
            for W in combinations(self.topology.U(h), self.g - 1)
        ]

    def user_pieces(self, k, B):
        out = []
        for W in self.zg:
            if k not in W:
                continue
            _, (a, b) = self._layout(W, B)
            if b > a:
                out.extend(PieceLabel(i, ("f", W), "user", ((a, b),)) for i in range(1, self.params.N + 1))
        return out

    def unknown_piece(self, i: int, k: int, W: UserSet, h: int, B: int) -> PieceLabel:
        """Slice ``h`` of what user ``k`` still misses of ``f_{i,W}`` after step 1."""
        topo = self.topology
        parts, user = self._layout(W, B)
        near = topo.common_relays((k, *W))
        missing = [parts[x] for x in sorted(parts) if x not in near] + [user]
        missing = [rg for rg in missing if rg[1] > rg[0]]
        pieces = _cut(missing, len(near))
        return PieceLabel(i, ("f", W), f"G:k={k}:h={h}", pieces[sorted(near).index(h)])

    def plan(self, demands, B):
        topo, g = self.topology, self.g
        plan = Plan()
        # step 1: relay slices of the demanded file, then side information
        for h in topo.relays:
            Uh = set(topo.U(h))
            outside = [x for x in topo.users if x not in Uh]
            subsets = list(combinations(topo.U(h), g - 1))
            for k in topo.U(h):
                sent: set[PieceLabel] = set()

                def push(family, piece):
                    if piece not in sent:
                        sent.add(piece)
                        plan.unicast(family, h, k, piece)

                for W in subsets:
                    push("own", self.relay_part(demands[k - 1], W, h, B))
                for W in subsets:
                    if k not in W or len(topo.common_relays(W)) <= 1:
                        continue
                    for kk in outside:
                        if topo.common_relays((kk, *W)):
                            push("side", self.relay_part(demands[kk - 1], W, h, B))
        # step 2: XOR multicasts of the still-unknown slices
        for h in topo.relays:
            for J in self._gain_sets(h):
                pieces = [
                    self.unknown_piece(demands[k - 1], k, tuple(x for x in J if x != k), h, B) for k in J
                ]
                plan.multicast("V", h, J, pieces)
        return plan


_REGISTRY = {
    "routing": RoutingScheme,
    "zewail1": ZewailGroup1,
    "zewail2": ZewailGroup2,
    "wanita": EndUserScheme,
    "proposed": ProposedScheme,
}


def make_scheme(topology: NetworkTopology, point: SchemePoint) -> CornerScheme:
    return _REGISTRY[point.scheme](topology, point)


def routing_scheme(topology, m_relay, m_user) -> RoutingScheme:
    return RoutingScheme(topology, SchemePoint("routing", m_relay=Fraction(m_relay), m_user=Fraction(m_user)))


def zewail_group1(topology, t2: int) -> ZewailGroup1:
    return ZewailGroup1(topology, SchemePoint("zewail1", t2=t2))


def zewail_group2(topology, t1: int) -> ZewailGroup2:
    return ZewailGroup2(topology, SchemePoint("zewail2", t1=t1))


def wanita_end_user(topology, g: int) -> EndUserScheme:
    return EndUserScheme(topology, SchemePoint("wanita", g=g))


def proposed_corner(topology, g: int) -> ProposedScheme:
    return ProposedScheme(topology, SchemePoint("proposed", g=g))


def corner_memories(topology: NetworkTopology, point: SchemePoint) -> tuple[Fraction, Fraction]:
    s = make_scheme(topology, point)
    return s.m_relay, s.m_user


# ---------------------------------------------------------------------------
# transcript assembly and decoding


def build_transcript(
    scheme: CornerScheme,
    plan: Plan,
    encoded_files: Sequence[dict[ChunkKey, np.ndarray]],
    cache: CacheState,
) -> TransmissionLog:
    """Attach payloads to a plan and route every message over its links."""
    topo = scheme.topology
    s2r: dict[int, list[Message]] = {h: [] for h in topo.relays}
    r2u: dict[tuple[int, int], list[Message]] = {(h, k): [] for h in topo.relays for k in topo.U(h)}
    relay_has = {h: {p for p, _ in cache.relay_caches[h]} for h in topo.relays}

    def payload(p: PieceLabel) -> np.ndarray:
        return _piece_payload(encoded_files[p.file - 1], p)

    for m in plan.relay:
        (p,) = m.pieces
        if p not in relay_has[m.relay]:
            raise SchemeError(f"relay {m.relay} sends {p} which it does not cache")
        m.payload = payload(p)
    for m in plan.server:
        m.payload = _xor(payload(p) for p in m.pieces)
        s2r[m.relay].append(m)

    # per link: relay-originated unicasts first, then forwarded multicasts
    for m in plan.relay:
        r2u[(m.relay, m.recipients[0])].append(m)
    for m in plan.server:
        for k in m.recipients:
            if (m.relay, k) not in r2u:
                raise SchemeError(f"relay {m.relay} is not connected to user {k}")
            r2u[(m.relay, k)].append(m)
    return TransmissionLog(s2r, r2u)


def decode_user(
    scheme: CornerScheme,
    cache: CacheState,
    log: TransmissionLog,
    k: int,
    d_k: int,
    plan: Plan | None = None,
) -> np.ndarray:
    """Reconstruct ``F_{d_k}`` from user ``k``'s cache and its incoming links.

    When ``plan`` is given, a failure names the first intended piece of the
    demanded file that the user never managed to recover.
    """
    B = cache.B
    known = Knowledge(scheme.chunk_lengths(B))
    for p, data in cache.user_caches[k]:
        known.learn(p, data)
    pending = [m for h in scheme.topology.H_of(k) for m in log.relay_to_user.get((h, k), [])]
    progress = True
    while progress and pending:
        progress = False
        rest = []
        for m in pending:
            unknown = [p for p in m.pieces if not known.knows(p)]
            if not unknown:
                continue
            if len(unknown) > 1:
                rest.append(m)
                continue
            target = unknown[0]
            value = m.payload.copy()
            for p in m.pieces:
                if p is not target:
                    np.bitwise_xor(value, known.read(p), out=value)
            known.learn(target, value)
            progress = True
        pending = rest
    try:
        return scheme.reassemble(k, d_k, known, B)
    except DecodeError as err:
        if plan is not None:
            for m in [*plan.relay, *plan.server]:
                if k not in m.recipients:
                    continue
                for p in m.pieces:
                    if p.file == d_k and not known.knows(p):
                        got = any(m is x for x in pending)
                        where = f"{m.label()} not resolved" if got else f"{m.label()} not received"
                        raise DecodeError(k, str(p), where) from err
        raise
