"""Command-line front end: ``simulate``, ``sweep``, ``verify`` and ``topology``.

Exit codes: 0 ok, 1 verification or decode failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import analysis, checks
from .combinatorics import NetParams, binom
from .schemes import SCHEMES, SchemeError, SchemePoint, build_transcript, make_scheme
from .simulator import (
    EpisodeReport,
    distinct_demands,
    frac_text,
    make_files,
    run_episode,
    run_mixture,
    worst_case_loads,
)
from .topology import build_topology

SIM_COLUMNS = [
    "H", "r", "N", "scheme", "params", "M_relay", "M_user",
    "R_s_to_r_num", "R_s_to_r_den", "R_r_to_u_num", "R_r_to_u_den", "decode_ok",
    "R_s_to_r_float", "R_r_to_u_float",
]
ENVELOPE_COLUMNS = [
    "M_relay", "M_user", "scheme", "R_s_to_r", "R_s_to_r_float", "R_r_to_u", "R_r_to_u_float", "mixture",
]


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r} (use p/q)") from None


@dataclass
class RunConfig:
    command: str
    params: NetParams
    scheme: str | None = None
    g: int | None = None
    t1: int | None = None
    t2: int | None = None
    m_relay: Fraction | None = None
    m_user: Fraction | None = None
    demands: str = "distinct"
    seed: int = 0
    B: int | None = None
    out: str | None = None
    fmt: str = "json"

    def point(self) -> SchemePoint:
        if self.scheme is None:
            raise UsageError("--scheme is required")
        need = {"wanita": "g", "proposed": "g", "zewail1": "t2", "zewail2": "t1"}.get(self.scheme)
        if need and getattr(self, need) is None:
            raise UsageError(f"--scheme {self.scheme} requires --{need}")
        if self.scheme == "routing" and (self.m_relay is None or self.m_user is None):
            raise UsageError("--scheme routing requires --m-relay and --m-user")
        return SchemePoint(self.scheme, g=self.g, t1=self.t1, t2=self.t2, m_relay=self.m_relay, m_user=self.m_user)


def _net_args(p: argparse.ArgumentParser, H=5, r=3) -> None:
    p.add_argument("--H", type=int, default=H, help="number of relays")
    p.add_argument("--r", type=int, default=r, help="relays per user")
    p.add_argument("--N", type=int, default=None, help="number of files (default K)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaycache", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one episode and report exact loads")
    _net_args(sim)
    sim.add_argument("--B", type=int, default=None, help="file size in field elements (default: minimal valid)")
    sim.add_argument("--scheme", choices=SCHEMES)
    sim.add_argument("--envelope", choices=("zewail", "proposed"), help="simulate the optimal corner mixture")
    sim.add_argument("--g", type=int)
    sim.add_argument("--t1", type=int)
    sim.add_argument("--t2", type=int)
    sim.add_argument("--m-relay", type=rational, dest="m_relay")
    sim.add_argument("--m-user", type=rational, dest="m_user")
    sim.add_argument("--demands", default="distinct", help="distinct | exhaustive | explicit:d1,d2,...")
    sim.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    sim.add_argument("--transcript", default=None, help="also dump the transcript JSON here")

    sw = sub.add_parser("sweep", help="envelope loads versus user memory (CSV)")
    _net_args(sw)
    sw.add_argument("--mode", choices=("fig2", "theorem1", "corners"), default="fig2")
    sw.add_argument("--m-relay", type=rational, dest="m_relay", default=Fraction(1))
    sw.add_argument("--points", type=int, default=None, help="grid points per axis (default 41 for fig2, 20 otherwise)")

    ver = sub.add_parser("verify", help="run the invariant suite")
    _net_args(ver, H=3, r=2)
    ver.add_argument("--exhaustive-demands", action="store_true")
    ver.add_argument("--inject-fault", action="store_true", help="drop one V message; the suite must fail")
    ver.add_argument("--workers", type=int, default=1)

    top = sub.add_parser("topology", help="dump the network adjacency as JSON")
    _net_args(top)
    return parser


def _params(args) -> NetParams:
    try:
        K = binom(args.H, args.r)
        return NetParams(args.H, args.r, args.N if args.N is not None else max(K, 1))
    except ValueError as err:
        raise UsageError(str(err)) from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sim_row(params: NetParams, rep: EpisodeReport, scheme: str, ptext: str) -> list:
    return [
        params.H, params.r, params.N, scheme, ptext, frac_text(rep.m_relay), frac_text(rep.m_user),
        rep.s_to_r.numerator, rep.s_to_r.denominator, rep.r_to_u.numerator, rep.r_to_u.denominator,
        int(rep.ok), f"{float(rep.s_to_r):.6f}", f"{float(rep.r_to_u):.6f}",
    ]


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _parse_demands(spec: str, topo) -> str | tuple[int, ...]:
    if spec in ("distinct", "exhaustive"):
        if spec == "distinct" and topo.params.N < topo.K:
            raise UsageError(f"distinct demands need N >= K ({topo.params.N} < {topo.K})")
        return spec
    if spec.startswith("explicit:"):
        try:
            d = tuple(int(x) for x in spec[len("explicit:"):].split(","))
        except ValueError:
            raise UsageError(f"bad demand list {spec!r}") from None
        if len(d) != topo.K or any(not 1 <= x <= topo.params.N for x in d):
            raise UsageError(f"need {topo.K} demands in [1:{topo.params.N}]")
        return d
    raise UsageError(f"unknown demand policy {spec!r}")


def cmd_simulate(args) -> int:
    params = _params(args)
    topo = build_topology(params)
    cfg = RunConfig("simulate", params, args.scheme, args.g, args.t1, args.t2, args.m_relay, args.m_user,
                    args.demands, args.seed, args.B, args.out, args.fmt)
    demands = _parse_demands(cfg.demands, topo)

    if args.envelope:
        if cfg.m_relay is None or cfg.m_user is None:
            raise UsageError("--envelope requires --m-relay and --m-user")
        res = analysis.envelope(params, args.envelope, cfg.m_relay, cfg.m_user)
        mixture = [(w, c.point) for w, c in res.mixture()]
        label, ptext = args.envelope, res.describe()
    else:
        point = cfg.point()
        try:
            make_scheme(topo, point)
        except (SchemeError, ValueError) as err:
            raise UsageError(str(err)) from None
        mixture = [(Fraction(1), point)]
        label, ptext = point.scheme, point.params_text()

    if demands == "exhaustive":
        if len(mixture) != 1:
            raise UsageError("--demands exhaustive works on single corner points")
        worst = worst_case_loads(topo, mixture[0][1], "exhaustive", seed=cfg.seed)
        payload = {
            "point": mixture[0][1].describe(),
            "policy": "exhaustive",
            "episodes": params.N ** topo.K,
            "R_s_to_r": {"exact": frac_text(worst.s_to_r), "float": float(worst.s_to_r)},
            "R_r_to_u": {"exact": frac_text(worst.r_to_u), "float": float(worst.r_to_u)},
        }
        _emit(json.dumps(payload, indent=2) + "\n", cfg.out)
        return 0

    d = distinct_demands(topo) if demands == "distinct" else demands
    try:
        rep = run_mixture(topo, mixture, d, seed=cfg.seed, B=cfg.B)
    except (SchemeError, ValueError) as err:
        raise UsageError(str(err)) from None
    if args.transcript and len(mixture) == 1:
        _dump_transcript(topo, mixture[0][1], d, rep.B, cfg.seed, args.transcript)
    if cfg.fmt == "json":
        body = rep.to_dict()
        if len(mixture) == 1:
            want = analysis.formula_loads(params, mixture[0][1])
            body["formula"] = {"R_s_to_r": frac_text(want.s_to_r), "R_r_to_u": frac_text(want.r_to_u)}
        _emit(json.dumps(body, indent=2) + "\n", cfg.out)
    else:
        _emit(_csv(SIM_COLUMNS, [_sim_row(params, rep, label, ptext)]), cfg.out)
    for f in rep.failures:
        print(f"decode failure: {f}", file=sys.stderr)
    return 0 if rep.ok else 1


def _dump_transcript(topo, point, demands, B, seed, path) -> None:
    scheme = make_scheme(topo, point)
    encoded = [scheme.encode(f) for f in make_files(topo.params.N, B, seed)]
    cache = scheme.place(encoded, B)
    tlog = build_transcript(scheme, scheme.plan(demands, B), encoded, cache)
    with open(path, "w") as fh:
        json.dump({"point": point.describe(), "B": B, **tlog.to_dict()}, fh, indent=1)


def _envelope_rows(params: NetParams, grid, families=("proposed", "zewail")) -> list[list]:
    corners = {f: analysis.family_corners(params, f) for f in families}
    rows = []
    for mr, mu in grid:
        q = analysis.EnvelopeQuery(Fraction(mr), Fraction(mu))
        for f in families:
            res = analysis.envelope_minimize(corners[f], q)
            L = res.loads
            rows.append([
                frac_text(q.m_relay), frac_text(q.m_user), f,
                frac_text(L.s_to_r), f"{float(L.s_to_r):.6f}",
                frac_text(L.r_to_u), f"{float(L.r_to_u):.6f}", res.describe(),
            ])
    return rows


def fig2_grid(params: NetParams, m_relay: Fraction, points: int) -> list[tuple[Fraction, Fraction]]:
    if points <= 0:
        return []
    if points == 1:
        return [(m_relay, Fraction(0))]
    return [(m_relay, Fraction(j * params.N, points - 1)) for j in range(points)]


def cmd_sweep(args) -> int:
    params = _params(args)
    if args.mode == "corners":
        topo = build_topology(params)
        d = distinct_demands(topo) if params.N >= topo.K else tuple(1 + (k - 1) % params.N for k in topo.users)
        rows = []
        for pt in checks.corner_points(params):
            rep = run_episode(topo, pt, d, seed=args.seed)
            rows.append(_sim_row(params, rep, pt.scheme, pt.params_text()))
        _emit(_csv(SIM_COLUMNS, rows), args.out)
        return 0 if all(r[11] for r in rows) else 1
    if args.points is None:
        args.points = 41 if args.mode == "fig2" else 20
    if args.mode == "fig2":
        grid = fig2_grid(params, args.m_relay, args.points)
    else:
        grid = analysis.default_grid(params, args.points) if args.points > 0 else []
    rows = _envelope_rows(params, grid)
    _emit(_csv(ENVELOPE_COLUMNS, rows), args.out)
    # proposed row precedes the baseline row at every grid point
    dominated = all(Fraction(a[3]) <= Fraction(b[3]) for a, b in zip(rows[::2], rows[1::2]))
    if not dominated:
        print("proposed envelope exceeds the baseline at some grid point", file=sys.stderr)
    return 0 if dominated else 1


def cmd_verify(args) -> int:
    exhaustive = None
    if args.exhaustive_demands:
        params = _params(args)
        exhaustive = (params.H, params.r, params.N)
    results = checks.run_suite(exhaustive=exhaustive, inject_fault=args.inject_fault, workers=args.workers)
    text = "\n".join(r.line() for r in results) + "\n"
    n_bad = sum(not r.ok for r in results)
    text += f"{len(results) - n_bad}/{len(results)} checks passed\n"
    _emit(text, args.out)
    return 0 if n_bad == 0 else 1


def cmd_topology(args) -> int:
    _emit(build_topology(_params(args)).to_json() + "\n", args.out)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handler = {"simulate": cmd_simulate, "sweep": cmd_sweep, "verify": cmd_verify, "topology": cmd_topology}
    try:
        return handler[args.command](args)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
