"""Compare the usual relay-to-user load expression of the proposed corners with measured transcripts.

The usual expression counts K_1 - K_2 side-information receivers per shared set.
It is exact while every (g-1)-set shares at most two relays and can undercount
beyond that.
"""

from relaycache import NetParams, SchemePoint, build_topology, run_episode
from relaycache.analysis import formula_loads, printed_proposed_r_to_u
from relaycache.combinatorics import max_common_relays, proposed_gains
from relaycache.simulator import distinct_demands, frac_text


def main():
    print(f"{'H':>2} {'r':>2} {'g':>2} {'maxY':>4} {'usual':>8} {'exact':>8} {'measured':>8}")
    for H, r in [(3, 2), (4, 2), (5, 2), (4, 3), (5, 3), (6, 3), (5, 4), (6, 4)]:
        params = NetParams(H, r, NetParams(H, r, 1).K)
        topo = build_topology(params)
        d = distinct_demands(topo)
        for g in proposed_gains(params):
            pt = SchemePoint("proposed", g=g)
            rep = run_episode(topo, pt, d)
            usual = printed_proposed_r_to_u(params, g)
            exact = formula_loads(params, pt).r_to_u
            flag = "" if usual == rep.r_to_u else "  <- differs"
            print(
                f"{H:>2} {r:>2} {g:>2} {max_common_relays(params, g):>4} "
                f"{frac_text(usual):>8} {frac_text(exact):>8} {frac_text(rep.r_to_u):>8}{flag}"
            )


if __name__ == "__main__":
    main()
