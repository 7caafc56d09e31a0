"""Both envelopes versus M_user at a fixed M_relay, as CSV (one row per scheme and grid point).

Example:
    python3 scripts/fig2_sweep.py --H 5 --r 3 --N 10 --m-relay 1 --points 41 --out fig2.csv
"""

import argparse
import sys

from relaycache import NetParams
from relaycache.cli import ENVELOPE_COLUMNS, _csv, _envelope_rows, fig2_grid, rational


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--H", type=int, default=5)
    ap.add_argument("--r", type=int, default=3)
    ap.add_argument("--N", type=int, default=10)
    ap.add_argument("--m-relay", type=rational, default=rational("1"))
    ap.add_argument("--points", type=int, default=41)
    ap.add_argument("--out")
    args = ap.parse_args()

    params = NetParams(args.H, args.r, args.N)
    text = _csv(ENVELOPE_COLUMNS, _envelope_rows(params, fig2_grid(params, args.m_relay, args.points)))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
