import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harness import all_corners, net, stage
from relaycache import LoadPair, SchemePoint, run_episode, run_mixture, worst_case_loads
from relaycache.schemes import SchemeError
from relaycache.simulator import distinct_demands

EX_POINT = SchemePoint("proposed", g=3)


def test_example_point_loads():
    p, topo = net(5, 3, 10)
    rep = run_episode(topo, EX_POINT, distinct_demands(topo))
    assert rep.ok
    assert (rep.m_relay, rep.m_user) == (Fraction(25, 12), Fraction(5, 12))
    assert rep.loads == LoadPair(Fraction(2, 9), Fraction(35, 72))
    assert any("41/72" in n for n in rep.notes)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 2**31))
def test_loads_do_not_depend_on_payload(a, b):
    p, topo = net(5, 3, 10)
    d = distinct_demands(topo)
    ra, rb = run_episode(topo, EX_POINT, d, seed=a), run_episode(topo, EX_POINT, d, seed=b)
    assert ra.ok and rb.ok
    assert ra.relay_loads == rb.relay_loads and ra.link_loads == rb.link_loads


@pytest.mark.parametrize("H,r", [(4, 2), (5, 3)])
def test_conservation(H, r):
    p, topo = net(H, r)
    for pt in all_corners(p):
        s = stage(topo, pt)
        for k in topo.users:
            d = s.demands[k - 1]
            cached = sum(q.length for q, _ in s.cache.user_caches[k] if q.file == d)
            incoming = [m for h in topo.H_of(k) for m in s.log.relay_to_user[(h, k)]]
            total = sum(m.length for m in incoming)
            own = sum(m.length for m in incoming if any(q.file == d for q in m.pieces))
            assert total + cached >= s.B
            if pt.scheme in ("proposed", "wanita"):
                # own-file units: nothing redundant reaches the user
                assert own + cached == s.B, (pt.describe(), k)


@pytest.mark.parametrize("pt", [SchemePoint("wanita", g=2), SchemePoint("zewail1", t2=1), SchemePoint("zewail2", t1=0)])
def test_exhaustive_matches_distinct(pt):
    p, topo = net(3, 2, 3)
    assert worst_case_loads(topo, pt, "exhaustive") == worst_case_loads(topo, pt, "distinct")


def test_exhaustive_parallel_equals_serial():
    p, topo = net(3, 2, 3)
    pt = SchemePoint("zewail1", t2=1)
    assert worst_case_loads(topo, pt, "exhaustive", workers=2) == worst_case_loads(topo, pt, "exhaustive")


def test_duplicate_demands_still_decode():
    p, topo = net(5, 3, 10)
    for pt in all_corners(p):
        assert run_episode(topo, pt, [1] * topo.K).ok, pt.describe()
        assert run_episode(topo, pt, [1 + k % 3 for k in range(topo.K)]).ok, pt.describe()


def test_mixture_loads_are_weighted_sums():
    p, topo = net(5, 3, 10)
    d = distinct_demands(topo)
    a, b = SchemePoint("zewail1", t2=1), SchemePoint("zewail2", t1=0)
    ra, rb = run_episode(topo, a, d), run_episode(topo, b, d)
    w = Fraction(5, 8)
    mix = run_mixture(topo, [(1 - w, a), (w, b)], d)
    assert mix.ok
    assert mix.m_user == (1 - w) * ra.m_user + w * rb.m_user
    assert mix.s_to_r == (1 - w) * ra.s_to_r + w * rb.s_to_r


def test_block_size_validation():
    p, topo = net(5, 3, 10)
    d = distinct_demands(topo)
    rep = run_episode(topo, EX_POINT, d, B=144)
    assert rep.ok and rep.B == 144 and rep.s_to_r == Fraction(2, 9)
    with pytest.raises(SchemeError):
        run_episode(topo, EX_POINT, d, B=100)


@pytest.mark.parametrize(
    "demands", [[1] * 9, [0] + [1] * 9, [11] + [1] * 9]
)
def test_bad_demands(demands):
    p, topo = net(5, 3, 10)
    with pytest.raises(ValueError):
        run_episode(topo, EX_POINT, demands)


def test_bad_mixture_weights():
    p, topo = net(5, 3, 10)
    with pytest.raises(ValueError):
        run_mixture(topo, [(Fraction(1, 2), EX_POINT)], distinct_demands(topo))


def test_distinct_needs_enough_files():
    p, topo = net(5, 3, 4)
    with pytest.raises(ValueError):
        distinct_demands(topo)


def test_report_json():
    p, topo = net(5, 3, 10)
    doc = json.loads(run_episode(topo, EX_POINT, distinct_demands(topo), seed=7).to_json())
    assert doc["R_s_to_r"] == {"exact": "2/9", "float": pytest.approx(2 / 9)}
    assert doc["seed"] == 7 and doc["B"] == 72 and doc["decode_ok"] is True
    assert doc["link_loads"]["1->1"] == "35/72"
