"""Closed-form loads, memory-sharing envelopes and the dominance sweep.

All quantities are ``Fraction``s. The envelope is an exact linear program
over corner-point mixtures, solved with a small two-phase simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .combinatorics import NetParams, binom, max_common_relays, proposed_gains, s1, s2
from .schemes import SchemeError, SchemePoint
from .simulator import LoadPair, frac_text


def _K(params: NetParams, i: int) -> int:
    return binom(params.H - i, params.r - i)


# ---------------------------------------------------------------------------
# closed forms


def routing_load(params: NetParams, m_relay: Fraction, m_user: Fraction) -> Fraction:
    N = params.N
    return params.K * max(1 - (params.r * Fraction(m_relay) + Fraction(m_user)) / N, Fraction(0)) / params.H


def _proposed_memories(params: NetParams, g: int) -> tuple[Fraction, Fraction]:
    N, K1, r = params.N, params.K1, params.r
    y = max_common_relays(params, g)
    S1, S2 = s1(params, g), s2(params, g)
    m_relay = Fraction(N * binom(K1, g - 1), y * S1)
    m_user = Fraction(N * S2, S1) - Fraction(N * binom(K1 - 1, g - 2) * r, y * S1)
    return m_relay, m_user


def formula_memories(params: NetParams, point: SchemePoint) -> tuple[Fraction, Fraction]:
    N, K1, r = params.N, params.K1, params.r
    s = point.scheme
    if s == "routing":
        return Fraction(point.m_relay), Fraction(point.m_user)
    if s == "zewail1":
        _require(0 <= point.t2 <= K1, f"t2={point.t2} outside [0:{K1}]")
        return Fraction(0), Fraction(N * point.t2, K1)
    if s == "zewail2":
        _require(point.t1 in (0, K1), f"t1={point.t1} must be 0 or {K1}")
        return Fraction(N, r), Fraction(N * point.t1, K1)
    if s == "wanita":
        _require(1 <= point.g <= K1, f"g={point.g} outside [1:{K1}]")
        return Fraction(0), Fraction(N * s2(params, point.g), s1(params, point.g))
    gains = proposed_gains(params)
    _require(point.g in gains, f"g={point.g} outside {_range_text(gains)}")
    return _proposed_memories(params, point.g)


def _range_text(gains: range) -> str:
    return f"[{gains.start}:{gains.stop - 1}]" if gains else "the empty range (no proposed corner)"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise SchemeError(msg)


def side_info_units(params: NetParams, g: int) -> int:
    """Side-information slices one relay pushes to one user in the proposed scheme.

    Groups the ``(g-1)``-sets ``W`` (containing the user, inside the relay's
    user set) by their exact common-relay set ``Y``; each contributes the
    number of users outside the relay that reach another relay of ``Y``.
    """
    r = params.r
    total = 0
    for y in range(2, max_common_relays(params, g) + 1):
        exact = sum(
            (-1) ** (j - y) * binom(r - y, j - y) * binom(_K(params, j) - 1, g - 2) for j in range(y, r + 1)
        )
        reach = sum(
            (-1) ** (j - 1) * binom(y - 1, j) * (_K(params, j) - _K(params, j + 1)) for j in range(1, y)
        )
        total += binom(r - 1, y - 1) * exact * reach
    return total


def printed_proposed_r_to_u(params: NetParams, g: int) -> Fraction:
    """The relay-to-user load expression as usually stated for the proposed scheme.

    It counts ``K_1 - K_2`` side-information receivers per shared set. That is
    exact whenever every set shares at most two relays, and can undercount
    once some set shares three or more (``side_info_units`` is the exact count).
    """
    N, r = params.N, params.r
    _, m_user = _proposed_memories(params, g)
    corr = sum(
        binom(r - 1, b - 1) * binom(_K(params, b) - 1, g - 2) * (params.K1 - params.K2) * (-1) ** b
        for b in range(2, r + 1)
    )
    return (1 - m_user / N) / r + Fraction(corr, max_common_relays(params, g) * s1(params, g))


def formula_loads(params: NetParams, point: SchemePoint) -> LoadPair:
    N, r, K, H = params.N, params.r, params.K, params.H
    m_relay, m_user = formula_memories(params, point)
    s = point.scheme
    if s == "routing":
        if r * m_relay + m_user > N:
            raise SchemeError("routing needs r*m_relay + m_user <= N")
        return LoadPair(routing_load(params, m_relay, m_user), (1 - m_user / N) / r)
    if s == "zewail1":
        return LoadPair(K * (1 - m_user / N) / (H * (point.t2 + 1)), (1 - m_user / N) / r)
    if s == "zewail2":
        return LoadPair(Fraction(0), (1 - m_user / N) / r)
    if s == "wanita":
        return LoadPair(K * (1 - m_user / N) / (H * point.g), (1 - m_user / N) / r)
    g = point.g
    s_to_r = routing_load(params, m_relay, m_user) / g
    side = Fraction(side_info_units(params, g), max_common_relays(params, g) * s1(params, g))
    return LoadPair(s_to_r, (1 - m_user / N) / r + side)


# ---------------------------------------------------------------------------
# corner sets


@dataclass(frozen=True)
class CornerPoint:
    point: SchemePoint
    m_relay: Fraction
    m_user: Fraction
    loads: LoadPair

    @property
    def scheme(self) -> str:
        return self.point.scheme

    def describe(self) -> str:
        return self.point.describe()


def corner(params: NetParams, point: SchemePoint) -> CornerPoint:
    mr, mu = formula_memories(params, point)
    return CornerPoint(point, mr, mu, formula_loads(params, point))


def zewail_corners(params: NetParams) -> list[CornerPoint]:
    K1 = params.K1
    pts = [SchemePoint("zewail1", t2=t) for t in range(K1 + 1)]
    pts += [SchemePoint("zewail2", t1=0), SchemePoint("zewail2", t1=K1)]
    return [corner(params, p) for p in pts]


def proposed_corners(params: NetParams) -> list[CornerPoint]:
    """Corners of the proposed family.

    Includes the full-user-cache point ``(0, N)`` with zero load, which the
    end-user family reaches only in the limit.
    """
    K1 = params.K1
    pts = [SchemePoint("wanita", g=g) for g in range(1, K1 + 1)]
    pts.append(SchemePoint("zewail1", t2=K1))
    pts += [SchemePoint("proposed", g=g) for g in proposed_gains(params)]
    pts += [SchemePoint("zewail2", t1=0), SchemePoint("zewail2", t1=K1)]
    return [corner(params, p) for p in pts]


def family_corners(params: NetParams, family: str) -> list[CornerPoint]:
    if family == "zewail":
        return zewail_corners(params)
    if family == "proposed":
        return proposed_corners(params)
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# exact simplex


class Infeasible(ValueError):
    pass


class Unbounded(ValueError):
    pass


def _pivot(T: list[list[Fraction]], row: int, col: int) -> None:
    pr = T[row]
    pv = pr[col]
    if pv != 1:
        T[row] = pr = [v / pv for v in pr]
    for i, other in enumerate(T):
        if i != row and other[col] != 0:
            f = other[col]
            T[i] = [a - f * b for a, b in zip(other, pr)]


def _run(T, basis, cost, allowed) -> None:
    m, ncol = len(T), len(T[0]) - 1
    while True:
        enter = None
        for j in range(ncol):
            if not allowed[j]:
                continue
            z = cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(m) if T[i][j])
            if z < 0:
                enter = j
                break  # Bland: lowest index
        if enter is None:
            return
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise Unbounded("objective unbounded below")
        _pivot(T, best[1], enter)
        basis[best[1]] = enter


def solve_lp(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
) -> tuple[Fraction, list[Fraction]]:
    """Minimise ``c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``."""
    n = len(c)
    m1, m2 = len(A_ub), len(A_eq)
    m = m1 + m2
    width = n + m1 + m  # structural, slack, artificial
    T: list[list[Fraction]] = []
    for i in range(m):
        row = [Fraction(0)] * (width + 1)
        if i < m1:
            coeffs, rhs = A_ub[i], Fraction(b_ub[i])
            row[n + i] = Fraction(1)
        else:
            coeffs, rhs = A_eq[i - m1], Fraction(b_eq[i - m1])
        for j, v in enumerate(coeffs):
            row[j] = Fraction(v)
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        row[n + m1 + i] = Fraction(1)
        row[-1] = rhs
        T.append(row)
    basis = [n + m1 + i for i in range(m)]

    phase1 = [Fraction(0)] * (n + m1) + [Fraction(1)] * m
    _run(T, basis, phase1, [True] * width)
    if sum(T[i][-1] for i in range(m) if basis[i] >= n + m1) != 0:
        raise Infeasible("no feasible mixture")
    # drive zero-level artificials out of the basis; drop redundant rows
    for i in reversed(range(m)):
        if basis[i] >= n + m1:
            col = next((j for j in range(n + m1) if T[i][j] != 0), None)
            if col is None:
                del T[i], basis[i]
            else:
                _pivot(T, i, col)
                basis[i] = col
    cost = [Fraction(v) for v in c] + [Fraction(0)] * (m1 + m)
    _run(T, basis, cost, [True] * (n + m1) + [False] * m)
    x = [Fraction(0)] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = T[i][-1]
    return sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0)), x


# ---------------------------------------------------------------------------
# envelopes


@dataclass(frozen=True)
class EnvelopeQuery:
    m_relay: Fraction
    m_user: Fraction
    objective: str = "s_to_r"


@dataclass(frozen=True)
class EnvelopeResult:
    query: EnvelopeQuery
    weights: tuple[Fraction, ...]
    corners: tuple[CornerPoint, ...]
    loads: LoadPair

    @property
    def value(self) -> Fraction:
        return getattr(self.loads, self.query.objective)

    def mixture(self) -> list[tuple[Fraction, CornerPoint]]:
        return [(w, c) for w, c in zip(self.weights, self.corners) if w]

    def describe(self) -> str:
        return " + ".join(f"{frac_text(w)}*{c.describe()}" for w, c in self.mixture())


def envelope_minimize(
    points: Sequence[CornerPoint], query: EnvelopeQuery, tie_break: bool = True
) -> EnvelopeResult:
    """Cheapest corner mixture that fits in the target memories.

    Among optimal mixtures the lexicographically smallest weight vector (in
    the order of ``points``) is returned.
    """
    if query.m_relay < 0 or query.m_user < 0:
        raise Infeasible(f"negative memory target ({query.m_relay}, {query.m_user})")
    if query.objective not in ("s_to_r", "r_to_u"):
        raise ValueError(f"unknown objective {query.objective!r}")
    n = len(points)
    c = [getattr(p.loads, query.objective) for p in points]
    A_ub = [[p.m_relay for p in points], [p.m_user for p in points]]
    b_ub = [query.m_relay, query.m_user]
    A_eq = [[1] * n]
    b_eq = [1]
    value, x = solve_lp(c, A_ub, b_ub, A_eq, b_eq)
    if tie_break:
        A_eq = A_eq + [c]
        b_eq = b_eq + [value]
        for j in range(n):
            e = [0] * n
            e[j] = 1
            if x[j] == 0:
                # x satisfies every constraint so far, so 0 is already the minimum; pin it
                A_eq = A_eq + [e]
                b_eq = b_eq + [0]
                continue
            xj, x = solve_lp(e, A_ub, b_ub, A_eq, b_eq)
            A_eq = A_eq + [e]
            b_eq = b_eq + [xj]
    loads = LoadPair(
        sum((w * p.loads.s_to_r for w, p in zip(x, points)), Fraction(0)),
        sum((w * p.loads.r_to_u for w, p in zip(x, points)), Fraction(0)),
    )
    return EnvelopeResult(query, tuple(x), tuple(points), loads)


def envelope(params: NetParams, family: str, m_relay, m_user) -> EnvelopeResult:
    return envelope_minimize(family_corners(params, family), EnvelopeQuery(Fraction(m_relay), Fraction(m_user)))


# ---------------------------------------------------------------------------
# sweeps


def memory_grid(params: NetParams, n: int = 20) -> list[tuple[Fraction, Fraction]]:
    """``n x n`` evenly spaced points over ``[0, N/r] x [0, N]``, endpoints included."""
    if n == 0:
        return []
    if n == 1:
        return [(Fraction(0), Fraction(0))]
    N, r = params.N, params.r
    return [(Fraction(i * N, r * (n - 1)), Fraction(j * N, n - 1)) for i in range(n) for j in range(n)]


def corner_anchors(params: NetParams) -> list[tuple[Fraction, Fraction]]:
    """Memory pairs of every corner of both families that fall inside the sweep box."""
    box_r, box_u = Fraction(params.N, params.r), Fraction(params.N)
    pts = {(c.m_relay, c.m_user) for f in ("proposed", "zewail") for c in family_corners(params, f)}
    return sorted(p for p in pts if 0 <= p[0] <= box_r and 0 <= p[1] <= box_u)


def default_grid(params: NetParams, n: int = 20) -> list[tuple[Fraction, Fraction]]:
    """The ``n x n`` grid followed by any corner memories not already on it."""
    grid = memory_grid(params, n)
    seen = set(grid)
    return grid + [p for p in corner_anchors(params) if p not in seen]


@dataclass(frozen=True)
class SweepRecord:
    m_relay: Fraction
    m_user: Fraction
    proposed: EnvelopeResult
    zewail: EnvelopeResult

    @property
    def holds(self) -> bool:
        return self.proposed.loads.s_to_r <= self.zewail.loads.s_to_r


def theorem1_sweep(
    params: NetParams, grid: Iterable[tuple[Fraction, Fraction]] | None = None
) -> list[SweepRecord]:
    """Compare the proposed and baseline envelopes on the server-to-relay load."""
    grid = default_grid(params) if grid is None else grid
    prop, zew = proposed_corners(params), zewail_corners(params)
    out = []
    for mr, mu in grid:
        q = EnvelopeQuery(Fraction(mr), Fraction(mu))
        out.append(SweepRecord(q.m_relay, q.m_user, envelope_minimize(prop, q), envelope_minimize(zew, q)))
    return out
