from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from harness import all_corners, net, stage
from relaycache import SchemePoint, run_episode
from relaycache.combinatorics import max_common_relays, s1
from relaycache.schemes import DecodeError, Knowledge, SchemeError, corner_memories, decode_user, make_scheme
from relaycache.simulator import distinct_demands

SMALL = [(3, 2), (4, 2), (5, 3), (6, 2), (6, 5), (6, 6), (4, 1), (4, 4)]


def corner_cases(networks):
    for H, r in networks:
        p, _ = net(H, r)
        for pt in all_corners(p):
            yield pytest.param(H, r, pt, id=f"H{H}r{r}-{pt.describe()}")


@pytest.mark.parametrize("H,r,pt", list(corner_cases(SMALL)))
def test_corner_decodes_and_fills_cache_exactly(H, r, pt):
    p, topo = net(H, r)
    st = stage(topo, pt)
    st.cache.check_budget()
    assert (st.cache.m_relay, st.cache.m_user) == corner_memories(topo, pt)
    for k in topo.users:
        out = decode_user(st.scheme, st.cache, st.log, k, st.demands[k - 1], st.plan)
        assert np.array_equal(out, st.files[st.demands[k - 1] - 1])


@pytest.mark.parametrize("H,r", [(6, 3), (6, 4)])
def test_larger_networks_decode(H, r):
    p, topo = net(H, r)
    for pt in all_corners(p):
        rep = run_episode(topo, pt, distinct_demands(topo))
        assert rep.ok, (pt.describe(), rep.failures[:1])


@pytest.mark.parametrize("H,r", [(3, 2), (4, 2), (5, 3), (6, 3)])
def test_proposed_piece_partition(H, r):
    p, topo = net(H, r)
    for g in range(2, p.K2 + 2):
        if g > p.K1:
            break
        sch = make_scheme(topo, SchemePoint("proposed", g=g))
        B = sch.min_B
        c = B // s1(p, g)
        for W in sch.zg:
            parts, user = sch._layout(W, B)
            assert len(parts) == len(topo.common_relays(W))
            spans = sorted([*parts.values(), user])
            assert spans[0][0] == 0 and spans[-1][1] == c
            assert all(a[1] == b[0] for a, b in zip(spans, spans[1:]))
            assert all(b >= a for a, b in spans)


@pytest.mark.parametrize("H,r,pt", list(corner_cases([(3, 2), (4, 2), (5, 3)])))
def test_xor_messages_well_formed(H, r, pt):
    p, topo = net(H, r)
    st = stage(topo, pt)
    for m in st.plan.server:
        assert len({q.length for q in m.pieces}) == 1
        assert len(m.recipients) <= p.K1
    for k in topo.users:
        d = st.demands[k - 1]
        kn = Knowledge(st.scheme.chunk_lengths(st.B))
        for q, v in st.cache.user_caches[k]:
            kn.learn(q, v)
        incoming = [m for h in topo.H_of(k) for m in st.log.relay_to_user[(h, k)]]
        for m in incoming:
            if not m.from_server:
                kn.learn(m.pieces[0], m.payload)
        for m in incoming:
            if m.from_server:
                unknown = [q for q in m.pieces if not kn.knows(q)]
                assert all(q.file == d for q in unknown), (k, m.label())
                assert len(unknown) <= 1


@pytest.mark.parametrize("H,r,pt", list(corner_cases([(3, 2), (4, 2), (5, 3)])))
def test_server_loads_symmetric(H, r, pt):
    p, topo = net(H, r)
    rep = run_episode(topo, pt, distinct_demands(topo))
    assert len(set(rep.relay_loads.values())) == 1


def test_example_placement_of_user_one():
    p, topo = net(5, 3, 10)
    st = stage(topo, SchemePoint("proposed", g=3))
    assert st.B == 72
    held = Counter(q.chunk[1] for q, _ in st.cache.user_caches[1])
    assert held == {(1, 6): 10, (1, 9): 10, (1, 10): 10}
    assert all(q.length == 1 for q, _ in st.cache.user_caches[1])
    relay_part = st.scheme.relay_part(1, (1, 2), 1, st.B)
    assert relay_part.length == 1


def test_example_multicasts():
    p, topo = net(5, 3, 10)
    st = stage(topo, SchemePoint("proposed", g=3))
    by_label = {m.label(): m for m in st.plan.server}
    assert "V^1_{1,2,3}" not in by_label
    assert by_label["V^1_{1,2,4}"].length == st.B // 72
    m = by_label["V^2_{1,2,7}"]
    assert {(q.file, q.chunk[1]) for q in m.pieces} == {(1, (2, 7)), (2, (1, 7)), (7, (1, 2))}
    # user 1 learns the relay-1 slice of f_{d_7,{1,2}} and the relay-3 slice of f_{d_2,{1,7}} first
    side = {(q.file, q.chunk[1], q.part) for x in st.plan.relay if x.recipients == (1,) for q in x.pieces}
    assert (7, (1, 2), "relay:1") in side
    assert (2, (1, 7), "relay:3") in side


def test_transcript_order_is_canonical():
    p, topo = net(5, 3, 10)
    a = stage(topo, SchemePoint("proposed", g=3))
    b = stage(topo, SchemePoint("proposed", g=3), seed=5)
    keys = [(m.relay, m.recipients) for m in a.plan.server]
    assert keys == sorted(keys)
    assert a.log.to_dict() == b.log.to_dict()


def test_gain_never_exceeds_k1():
    for H, r in [(4, 2), (5, 3)]:
        p, topo = net(H, r)
        for pt in all_corners(p):
            st = stage(topo, pt)
            assert max((len(m.recipients) for m in st.plan.server), default=0) <= p.K1


def test_unit_fractions_give_integral_split():
    p, topo = net(5, 3, 10)
    for g in (2, 3, 4):
        sch = make_scheme(topo, SchemePoint("proposed", g=g))
        assert all((f * sch.min_B).denominator == 1 for f in sch.unit_fractions())
        assert sch.min_B % (s1(p, g) * max_common_relays(p, g)) == 0
        sch.check_B(3 * sch.min_B)
        with pytest.raises(SchemeError):
            sch.check_B(sch.min_B + 1)


@pytest.mark.parametrize(
    "pt",
    [
        SchemePoint("proposed", g=1),
        SchemePoint("proposed", g=5),
        SchemePoint("wanita", g=0),
        SchemePoint("wanita", g=7),
        SchemePoint("zewail1", t2=7),
        SchemePoint("zewail2", t1=3),
        SchemePoint("routing", m_relay=Fraction(3), m_user=Fraction(2)),
    ],
)
def test_out_of_range_parameters(pt):
    p, topo = net(5, 3, 10)
    with pytest.raises(SchemeError):
        make_scheme(topo, pt)


def test_no_proposed_corner_when_r_equals_h():
    p, topo = net(3, 3)
    with pytest.raises(SchemeError):
        make_scheme(topo, SchemePoint("proposed", g=2))


def test_dropped_multicast_names_missing_piece():
    p, topo = net(5, 3, 10)
    st = stage(topo, SchemePoint("proposed", g=3))
    victim = next(m for m in st.log.server_to_relay[1] if m.family == "V")
    st.log.drop(victim)
    k = victim.recipients[0]
    with pytest.raises(DecodeError) as info:
        decode_user(st.scheme, st.cache, st.log, k, st.demands[k - 1], st.plan)
    assert "G:k=" in str(info.value) and victim.label() in str(info.value)


def test_example_message_counts():
    p, topo = net(5, 3, 10)
    st = stage(topo, SchemePoint("proposed", g=3))
    for h in topo.relays:
        assert [m.family for m in st.log.server_to_relay[h]] == ["V"] * 16
    for (h, k), msgs in st.log.relay_to_user.items():
        assert Counter(m.family for m in msgs) == {"own": 15, "side": 12, "V": 8}, (h, k)
        assert {m.length for m in msgs} == {st.B // 72}
