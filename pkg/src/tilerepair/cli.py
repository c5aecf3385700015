"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 repair finished but
left reported exclusions (unfilled gaps or disconnected units).
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .arrangement import TilingError, doctor
from .finalize import OrphanPolicy, QueenConversion
from .io import DataError, dumps_adjacency, read_units, write_adjacency, write_report, write_units
from .model import sort_key
from .pipeline import (
    AdjacencyGraph,
    Region,
    RepairOptions,
    adjacency_graph,
    quick_repair,
    smart_repair,
    smart_repair_region_aware,
)
from .synth import Perturbation, generate_grid, generate_voronoi, perturb, strip_gap

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_EXCLUSIONS = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1)")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return v


def _nonneg(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tilerepair", description="Repair gaps and overlaps in polygonal tilings.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("repair", help="full repair (overlaps, gaps, orphans)")
    r.add_argument("input", nargs="?", default="-")
    r.add_argument("-o", "--output", default="-")
    r.add_argument("--regions", help="GeoJSON of enclosing regions for nested repair")
    g = r.add_mutually_exclusive_group()
    g.add_argument("--fill-gaps-threshold", type=_fraction, default=0.1)
    g.add_argument("--no-fill-gaps", action="store_true")
    r.add_argument("--orphan-threshold", type=_fraction, default=0.0001)
    r.add_argument("--min-rook-length", type=_positive, help="convert shorter rook contacts to point contacts")
    r.add_argument("--snap-tolerance", type=_nonneg)
    r.add_argument("--no-boundary-pockets", action="store_true", help="do not fill pockets along the outer boundary")
    r.add_argument("--keep-holed-gaps", action="store_true", help="report gaps with holes instead of cutting them")
    r.add_argument("--report", help="write a JSON report here")
    r.add_argument("--adjacency", help="write the adjacency CSV here")
    r.add_argument("--id-field")

    q = sub.add_parser("quick-repair", help="baseline pairwise overlay repair")
    q.add_argument("input", nargs="?", default="-")
    q.add_argument("-o", "--output", default="-")
    q.add_argument("--snap-tolerance", type=_nonneg)
    q.add_argument("--id-field")

    d = sub.add_parser("doctor", help="count gaps and overlaps")
    d.add_argument("input", nargs="?", default="-")
    d.add_argument("--hull", action="store_true", help="count uncovered area inside the convex hull")
    d.add_argument("--json", action="store_true")
    d.add_argument("--id-field")

    a = sub.add_parser("adjacency", help="rook/queen adjacency CSV of a clean tiling")
    a.add_argument("input", nargs="?", default="-")
    a.add_argument("-o", "--output", default="-")
    a.add_argument("--id-field")

    gen = sub.add_parser("gen", help="generate synthetic tilings")
    gsub = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    gg = gsub.add_parser("grid")
    gg.add_argument("nx", type=int)
    gg.add_argument("ny", type=int)
    gg.add_argument("--cell", type=_positive, default=1.0)
    gv = gsub.add_parser("voronoi")
    gv.add_argument("n", type=int)
    gv.add_argument("--bbox", type=float, nargs=4, default=[0.0, 0.0, 1.0, 1.0], metavar=("X0", "Y0", "X1", "Y1"))
    gs = gsub.add_parser("strip-gap")
    gs.add_argument("--left", type=int, default=8)
    gs.add_argument("--right", type=int, default=7)
    gs.add_argument("--width", type=_positive, default=0.2)
    for s in (gg, gv, gs):
        s.add_argument("--perturb", type=_nonneg, default=0.0, metavar="EPS")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--mode", choices=["uniform", "gaussian"], default="uniform")
        s.add_argument("-o", "--output", default="-")

    c = sub.add_parser("compare", help="diff the adjacency graphs of two tilings")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--kind", choices=["rook", "queen"], default="rook")
    c.add_argument("--id-field")
    return p


def _repair(args) -> int:
    units = read_units(args.input, args.id_field)
    qc = QueenConversion(args.min_rook_length) if args.min_rook_length else None
    opts = RepairOptions(
        fill_gaps=not args.no_fill_gaps,
        gap_area_threshold=args.fill_gaps_threshold,
        orphan_policy=OrphanPolicy(args.orphan_threshold),
        queen_conversion=qc,
        snap_tolerance=args.snap_tolerance,
        fill_boundary_pockets=not args.no_boundary_pockets,
        split_holed_gaps=not args.keep_holed_gaps,
    )
    if args.regions:
        regions = [Region(u.id, u.geometry) for u in read_units(args.regions, args.id_field)]
        res = smart_repair_region_aware(units, regions, opts)
    else:
        res = smart_repair(units, opts)
    write_units(res.units, args.output)
    if args.report:
        write_report(res.report, args.report)
    if args.adjacency:
        write_adjacency(res.graph, args.adjacency)
    if res.report.has_exclusions:
        print(
            f"repair left {len(res.report.unfilled_gaps)} unfilled gaps and "
            f"{len(res.report.disconnected_units)} disconnected units",
            file=sys.stderr,
        )
        return EXIT_EXCLUSIONS
    return EXIT_OK


def _graph_of(path: str, id_field) -> AdjacencyGraph:
    return adjacency_graph(read_units(path, id_field))


def _compare(args) -> int:
    ga, gb = _graph_of(args.a, args.id_field), _graph_of(args.b, args.id_field)
    pick = AdjacencyGraph.rook_pairs if args.kind == "rook" else AdjacencyGraph.queen_pairs
    pa, pb = pick(ga), pick(gb)

    def rows(pairs):
        return sorted((tuple(sorted(p, key=sort_key)) for p in pairs), key=lambda t: tuple(map(sort_key, t)))

    print(f"{len(pa & pb)} common, {len(pa - pb)} only in a, {len(pb - pa)} only in b")
    for x, y in rows(pa - pb):
        print(f"-{x},{y}")
    for x, y in rows(pb - pa):
        print(f"+{x},{y}")
    return EXIT_OK


def _gen(args) -> int:
    if args.kind == "grid":
        if args.nx < 1 or args.ny < 1:
            raise DataError("grid dimensions must be at least 1")
        units, _ = generate_grid(args.nx, args.ny, args.cell)
    elif args.kind == "voronoi":
        if args.n < 1:
            raise DataError("need at least one site")
        units, _ = generate_voronoi(args.n, args.seed, tuple(args.bbox))
    else:
        units = strip_gap(args.left, args.right, width=args.width)
    if args.perturb > 0:
        units = perturb(units, Perturbation(args.perturb, args.seed, args.mode))
    write_units(units, args.output)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "repair":
            return _repair(args)
        if args.command == "quick-repair":
            units = read_units(args.input, args.id_field)
            write_units(quick_repair(units, args.snap_tolerance), args.output)
            return EXIT_OK
        if args.command == "doctor":
            units = read_units(args.input, args.id_field)
            rep = doctor([u.geometry for u in units], [u.id for u in units], extent="hull" if args.hull else None)
            print(json.dumps(rep.to_dict(), sort_keys=True, default=str) if args.json else rep.summary())
            return EXIT_OK
        if args.command == "adjacency":
            write_adjacency(_graph_of(args.input, args.id_field), args.output)
            return EXIT_OK
        if args.command == "gen":
            return _gen(args)
        if args.command == "compare":
            return _compare(args)
    except (DataError, TilingError, OSError) as exc:
        print(f"tilerepair: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_USAGE


__all__ = ["main", "build_parser", "dumps_adjacency"]
