"""Run the H=5, r=3, N=10 worked point end to end and compare with the baseline envelope."""

import argparse
from fractions import Fraction

from relaycache import NetParams, SchemePoint, build_topology, run_episode
from relaycache.analysis import envelope
from relaycache.simulator import distinct_demands, frac_text, run_mixture


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = NetParams(5, 3, 10)
    topo = build_topology(params)
    d = distinct_demands(topo)

    ours = run_episode(topo, SchemePoint("proposed", g=3), d, seed=args.seed)
    base = envelope(params, "zewail", Fraction(25, 12), Fraction(5, 12))
    base_run = run_mixture(topo, [(w, c.point) for w, c in base.mixture()], d, seed=args.seed)

    print(f"memories: M_relay={frac_text(ours.m_relay)}  M_user={frac_text(ours.m_user)}")
    print(f"{'scheme':<44} {'R_s_to_r':>9} {'R_r_to_u':>9}  B    decoded")
    for name, rep in [(ours.point, ours), (base.describe(), base_run)]:
        print(f"{name:<44} {frac_text(rep.s_to_r):>9} {frac_text(rep.r_to_u):>9}  {rep.B:<4} {rep.ok}")
    print(f"server-to-relay ratio: {frac_text(ours.s_to_r / base_run.s_to_r)}")
    for note in ours.notes:
        print("note:", note)


if __name__ == "__main__":
    main()
