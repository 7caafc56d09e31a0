"""Dominance sweep of the proposed envelope over the baseline on several networks."""

import argparse
import time

from relaycache import NetParams
from relaycache.analysis import default_grid, theorem1_sweep
from relaycache.simulator import frac_text


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=20, help="grid points per axis")
    ap.add_argument("--networks", default="5,3,10;4,2,6;6,3,20", help="H,r,N triples separated by ';'")
    args = ap.parse_args()

    for spec in args.networks.split(";"):
        H, r, N = map(int, spec.split(","))
        params = NetParams(H, r, N)
        start = time.perf_counter()
        recs = theorem1_sweep(params, default_grid(params, args.points))
        bad = [rec for rec in recs if not rec.holds]
        # largest relative saving on the server links
        best = max(
            (rec for rec in recs if rec.zewail.value > 0),
            key=lambda rec: 1 - rec.proposed.value / rec.zewail.value,
            default=None,
        )
        print(f"(H={H}, r={r}, N={N}): {len(recs)} points, {len(bad)} violations, {time.perf_counter() - start:.1f}s")
        if best is not None:
            print(
                f"  largest saving at M_relay={frac_text(best.m_relay)}, M_user={frac_text(best.m_user)}: "
                f"{frac_text(best.proposed.value)} vs {frac_text(best.zewail.value)}"
            )
        for rec in bad[:5]:
            print(f"  violation at ({frac_text(rec.m_relay)}, {frac_text(rec.m_user)})")


if __name__ == "__main__":
    main()
