"""Command-line front end.

Exit codes: 0 success, 1 verification mismatch, 2 usage or input error,
3 search budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from . import constructions as C
from .netcore import BoxDomain, NetError
from .plot import plot_regions_svg
from .regions import (
    DEFAULT_MAX_CELLS,
    DEFAULT_MAX_NODES,
    RegionBudgetExceeded,
    count_regions_1d,
    count_regions_exact,
    enumerate_cells,
    estimate_regions_grid,
    merge_cells,
)
from .serialize import NetFormatError, dumps_net, load_net, parse_rational, save_net
from .ternarize import IntegerNetProfile, ternarize_net

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

CSV_COLUMNS = ["n0", "n", "L", "bound", "cell_count", "region_count",
               "distinct_affine_count", "elapsed_ms"]


def parse_domain(spec: Optional[str], dim: int) -> BoxDomain:
    """``unit``, ``lo,hi`` (applied to every axis) or ``lo,hi x lo,hi x ...``.

    Endpoints are integers, ``p/q`` fractions, ``inf`` or ``-inf``.
    """
    if spec is None or spec.strip().lower() == "unit":
        return BoxDomain.unit(dim)
    parts = [p.strip() for p in spec.split("x")]
    if len(parts) == 1:
        parts = parts * dim
    if len(parts) != dim:
        raise NetFormatError(f"domain {spec!r} has {len(parts)} intervals, net has {dim} inputs")
    lo, hi = [], []
    for part in parts:
        ends = [e.strip() for e in part.split(",")]
        if len(ends) != 2:
            raise NetFormatError(f"interval {part!r} must be 'lo,hi'")
        vals = [None if e.lower() in ("inf", "+inf", "-inf") else parse_rational(e) for e in ends]
        if ends[0].lower() in ("inf", "+inf") or ends[1].lower() == "-inf":
            raise NetFormatError(f"interval {part!r} is empty")
        lo.append(vals[0])
        hi.append(vals[1])
    return BoxDomain(tuple(lo), tuple(hi))


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2)
    (out or sys.stdout).write(text + "\n")


def _build(args) -> int:
    if args.kind == "montufar":
        net = C.build_montufar(args.n0, args.n, args.L)
    elif args.kind == "ternary":
        net = C.build_ternary(args.n0, args.n, args.L)
    else:
        net = C.build_sawtooth(args.p)
    if args.out:
        save_net(net, args.out)
    else:
        sys.stdout.write(dumps_net(net) + "\n")
    return EXIT_OK


def _count(args) -> int:
    net = load_net(args.net)
    domain = parse_domain(args.domain, net.input_dim)
    if args.grid is not None:
        _emit({"method": "grid", "resolution": args.grid,
               "distinct_affine_seen": estimate_regions_grid(net, domain, args.grid)})
        return EXIT_OK
    if args.oracle1d:
        report = count_regions_1d(net, domain)
    else:
        report = count_regions_exact(net, domain, **_budget(args))
    _emit(report.to_json())
    return EXIT_OK


def _regions(args) -> int:
    net = load_net(args.net)
    domain = parse_domain(args.domain, net.input_dim)
    cells = enumerate_cells(net, domain, **_budget(args))
    groups = merge_cells(cells, domain)
    region_of = {i: r for r, members in enumerate(groups) for i in members}
    payload = {
        "domain": domain.to_json(),
        "cell_count": len(cells),
        "region_count": len(groups),
        "cells": [dict(c.to_json(), region=region_of[i]) for i, c in enumerate(cells)],
    }
    if args.dump:
        Path(args.dump).write_text(json.dumps(payload, indent=2) + "\n")
        _emit({"cell_count": len(cells), "region_count": len(groups), "dump": args.dump})
    else:
        _emit(payload)
    return EXIT_OK


def _ternarize(args) -> int:
    net = load_net(args.inp)
    profile = IntegerNetProfile(args.M, net) if args.M else IntegerNetProfile.tight(net)
    out, stats = ternarize_net(profile, sharing=args.share, strict_bias=args.strict_bias)
    save_net(out, args.out)
    _emit(stats.to_json())
    return EXIT_OK


def _parse_instances(args) -> List[tuple]:
    if args.instances:
        result = []
        for item in args.instances:
            vals = [int(v) for v in item.split(",")]
            if len(vals) != 3:
                raise NetFormatError(f"instance {item!r} must be n0,n,L")
            result.append(tuple(vals))
        return result
    if None in (args.n0, args.n, args.L):
        raise NetFormatError("verify needs --n0/--n/--L or --instances")
    return [(args.n0, args.n, args.L)]


def _verify(args) -> int:
    build = C.build_ternary if args.ternary else C.build_montufar
    bound = C.lower_bound_ternary if args.ternary else C.lower_bound_montufar
    rows = []
    ok = True
    for n0, n, L in _parse_instances(args):
        net = build(n0, n, L)
        domain = parse_domain(args.domain, n0)
        report = count_regions_exact(net, domain, **_budget(args))
        b = bound(n0, n, L)
        row = {"n0": n0, "n": n, "L": L, "bound": b, **report.to_json(),
               "verified": report.region_count == b}
        ok &= row["verified"]
        rows.append(row)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        _emit(rows[0] if len(rows) == 1 else rows)
    return EXIT_OK if ok else EXIT_MISMATCH


def _bound(args) -> int:
    if args.tradeoff:
        _emit(C.bound_tradeoff_report(args.n0, args.n, args.L).to_json())
    elif args.ternary:
        print(C.lower_bound_ternary(args.n0, args.n, args.L))
    else:
        print(C.lower_bound_montufar(args.n0, args.n, args.L))
    return EXIT_OK


def _plot(args) -> int:
    net = load_net(args.net)
    domain = parse_domain(args.domain, net.input_dim)
    cells = enumerate_cells(net, domain, **_budget(args))
    svg = plot_regions_svg(cells, domain, size=args.size, precision=args.precision)
    Path(args.out).write_text(svg)
    _emit({"out": args.out, "polygons": svg.count('class="region"')})
    return EXIT_OK


def _budget_args(p) -> None:
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
    p.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)


def _budget(args) -> dict:
    return {"workers": args.workers, "max_nodes": args.max_nodes, "max_cells": args.max_cells}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ternary-regions",
        description="Exact linear-region counting for standard and ternary ReLU networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a witness network and print it as JSON")
    p.add_argument("kind", choices=["montufar", "ternary", "sawtooth"])
    p.add_argument("--n0", type=int, default=1)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--L", type=int, default=3)
    p.add_argument("--p", type=int, default=2, help="sawtooth pieces")
    p.add_argument("--out")
    p.set_defaults(func=_build)

    p = sub.add_parser("count", help="count linear regions of a network")
    p.add_argument("--net", required=True)
    p.add_argument("--domain", default="unit")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="LP cell enumeration (default)")
    mode.add_argument("--oracle1d", action="store_true", help="1-D breakpoint propagation")
    mode.add_argument("--grid", type=int, metavar="N", help="lattice estimate at resolution N")
    _budget_args(p)
    p.set_defaults(func=_count)

    p = sub.add_parser("regions", help="list every activation cell")
    p.add_argument("--net", required=True)
    p.add_argument("--domain", default="unit")
    p.add_argument("--dump", help="write the cell list to this file")
    _budget_args(p)
    p.set_defaults(func=_regions)

    p = sub.add_parser("ternarize", help="compile an integer-weight net to a ternary one")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--M", type=int, help="weight bound (default: largest |weight|)")
    p.add_argument("--share", action="store_true", help="share fan-out copies per source node")
    p.add_argument("--strict-bias", action="store_true", help="expand biases into +-1 edges")
    p.set_defaults(func=_ternarize)

    p = sub.add_parser("verify", help="build, count, and compare with the closed-form bound")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--montufar", action="store_true")
    which.add_argument("--ternary", action="store_true")
    p.add_argument("--n0", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--instances", nargs="+", metavar="N0,N,L")
    p.add_argument("--domain", default="unit")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _budget_args(p)
    p.set_defaults(func=_verify)

    p = sub.add_parser("bound", help="evaluate a closed-form lower bound")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--montufar", action="store_true")
    which.add_argument("--ternary", action="store_true")
    which.add_argument("--tradeoff", action="store_true")
    p.add_argument("--n0", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.set_defaults(func=_bound)

    p = sub.add_parser("plot", help="render the regions of a 2-input net as SVG")
    p.add_argument("--net", required=True)
    p.add_argument("--domain", default="unit")
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=480)
    p.add_argument("--precision", type=int, default=9)
    _budget_args(p)
    p.set_defaults(func=_plot)
    return parser


def _glue_domain(argv: List[str]) -> List[str]:
    # argparse takes "-1,1" for an option; rewrite to "--domain=-1,1"
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--domain" and i + 1 < len(argv):
            out.append(f"--domain={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_domain(argv))
    try:
        return args.func(args)
    except RegionBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (NetError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
