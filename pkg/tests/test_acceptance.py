"""End-to-end acceptance checks, one test per criterion."""
import hashlib
import itertools
import math
import time

import numpy as np
import pytest
import shapely
from scipy.sparse.csgraph import dijkstra
from shapely.geometry import LineString, Polygon, box

from conftest import non_adjacent_pairs, record_criterion, smv_oracle
from tilerepair.arrangement import doctor, noded_union, polygonize
from tilerepair.finalize import QueenConversion, rook_to_queen, short_rook_contacts
from tilerepair.gaps import fill_gap, fill_triangle_incenter
from tilerepair.geometry import path_length, signed_area
from tilerepair.io import dumps_units
from tilerepair.model import Gap
from tilerepair.paths import PolygonRouter
from tilerepair.pipeline import (
    Region,
    RepairOptions,
    adjacency_graph,
    quick_repair,
    smart_repair,
    smart_repair_region_aware,
)
from tilerepair.synth import (
    Perturbation,
    generate_grid,
    generate_voronoi,
    perturb,
    random_simple_polygon,
    random_simplified_gap,
    region_toy,
    strip_gap,
)
from tilerepair.visibility import pair_distance, strongly_mutually_visible

SEEDS = range(20)
GRID_QUEEN = QueenConversion(0.01)


def polygonized_area(geoms):
    return math.fsum(p.area for p in polygonize(noded_union(geoms)))


def out_area(units):
    return math.fsum(u.geometry.area for u in units)


def digest(units):
    return hashlib.sha256(dumps_units(units).encode()).hexdigest()


def run_everything():
    """All pipeline runs used by the criteria, with their inputs."""
    runs = {"voronoi": [], "grid": [], "toy": []}
    vgrid, truth = generate_grid(10, 10)
    for s in SEEDS:
        clean, _ = generate_voronoi(100, s)
        noisy = perturb(clean, Perturbation(1e-4, s))
        t0 = time.perf_counter()
        res = smart_repair(noisy)
        runs["voronoi"].append((noisy, res, time.perf_counter() - t0))
    for s in SEEDS:
        noisy = perturb(vgrid, Perturbation(0.001, s))
        raw = smart_repair(noisy)
        res = smart_repair(noisy, RepairOptions(queen_conversion=GRID_QUEEN))
        runs["grid"].append((noisy, raw, res))
    units = strip_gap()
    runs["strip"] = (units, quick_repair(units), smart_repair(units))
    for s in range(5):
        precincts, counties = region_toy(0.02, s)
        res = smart_repair_region_aware(precincts, [Region(c, g) for c, g in counties])
        runs["toy"].append((precincts, counties, res))
    runs["truth"] = truth
    return runs


@pytest.fixture(scope="module")
def runs():
    return run_everything()


def gap_instances(count, mmin, mmax, max_vertices, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    while len(out) < count:
        m = int(rng.integers(mmin, mmax + 1))
        out.append(random_simplified_gap(rng, m, max_vertices=max_vertices))
    return out


def test_criterion_1_clean_output(runs):
    bad, worst_t = [], 0.0
    for s, (noisy, res, dt) in zip(SEEDS, runs["voronoi"]):
        geoms = [u.geometry for u in res.units]
        reps = [doctor(geoms), doctor(geoms, extent="hull")]
        worst_t = max(worst_t, dt)
        dirty = any(r.overlap_count or r.gap_count for r in reps)
        if dirty or res.report.unfilled_gaps or dt >= 60:
            bad.append(s)
    ok = record_criterion(1, not bad, f"{len(SEEDS) - len(bad)}/{len(SEEDS)} Voronoi repairs clean inside the hull, max {worst_t:.2f}s")
    assert ok, bad


def test_criterion_2_grid_adjacency(runs):
    truth = runs["truth"]
    exact, spurious_raw = 0, []
    for noisy, raw, res in runs["grid"]:
        rook = res.graph.rook_pairs()
        exact += rook == truth
        spurious_raw.append(len(raw.graph.rook_pairs() - truth))
    ok = record_criterion(
        2,
        exact == len(SEEDS),
        f"{exact}/{len(SEEDS)} grids give 180/180 edges and 0 spurious "
        f"(short-contact conversion at 0.01; without it {min(spurious_raw)}-{max(spurious_raw)} corner contacts)",
    )
    assert ok


def test_criterion_3_strip_gap(runs):
    units, quick, smart = runs["strip"]
    span = {u.id: (u.attributes["y0"], u.attributes["y1"]) for u in units}
    side = {u.id: u.attributes["side"] for u in units}
    qdeg = max(adjacency_graph(quick).rook_degree(u.id) for u in units)
    g = smart.graph
    wrong = []
    for e in g.edges:
        if e.kind != "rook" or side[e.a] == side[e.b]:
            continue
        (a0, a1), (b0, b1) = span[e.a], span[e.b]
        if min(a1, b1) - max(a0, b0) <= 0:
            wrong.append((e.a, e.b))
    top, bottom = {"L7", "R6"}, {"L0", "R0"}
    poles = [(a, b) for a in top for b in bottom if frozenset((a, b)) in g.rook_pairs() | g.queen_pairs()]
    ok = record_criterion(
        3,
        qdeg >= 14 and not wrong and not poles,
        f"quick_repair hub degree {qdeg}; smart_repair cross-gap rooks outside span {len(wrong)}, "
        f"north-south contacts {len(poles)}",
    )
    assert ok


def closest_visible_pair(ring, arcs):
    n = len(ring)
    pts = lambda s, e: [ring[k % n] for k in range(s, s + (e - s) % n + 1)]
    cands = sorted((pair_distance(pts(*arcs[i]), pts(*arcs[j])), i, j) for i, j in non_adjacent_pairs(arcs))
    for _, i, j in cands:
        if strongly_mutually_visible(ring, arcs[i], arcs[j]):
            return i, j
    return None


def test_criterion_4_closest_pair_becomes_adjacent():
    instances = gap_instances(200, 4, 8, 40, 2024)
    fails = 0
    for ring, subs in instances:
        arcs = [(s.start, s.end) for s in subs]
        pair = closest_visible_pair(ring, arcs)
        res = fill_gap(Gap(tuple(ring), tuple(subs)))
        if pair is None or res.unfilled:
            fails += 1
            continue
        got = {}
        for r, o in res.regions:
            got.setdefault(o, []).append(Polygon(r))
        a, b = (shapely.union_all(got.get(subs[k].owner, [Polygon()])) for k in pair)
        if not a.boundary.intersection(b.boundary).length > 0:
            fails += 1
    ok = record_criterion(4, fails == 0, f"{len(instances) - fails}/{len(instances)} gaps join the closest visible pair")
    assert ok


def test_criterion_5_smv_oracle():
    instances = gap_instances(200, 4, 6, 12, 77)
    agree = disagree = marginal = 0
    for ring, subs in instances:
        arcs = [(s.start, s.end) for s in subs]
        for i, j in non_adjacent_pairs(arcs):
            verdict, marg = smv_oracle(ring, arcs[i], arcs[j])
            if marg:
                marginal += 1
                continue
            if strongly_mutually_visible(ring, arcs[i], arcs[j]) == verdict:
                agree += 1
            else:
                disagree += 1
    total = agree + disagree + marginal
    ok = record_criterion(
        5,
        disagree == 0 and marginal < 0.05 * total,
        f"{agree}/{agree + disagree} non-marginal pairs agree over {len(instances)} gaps; "
        f"{marginal} marginal ({100 * marginal / total:.1f}%)",
    )
    assert ok


def test_criterion_6_existence_and_single_crossing():
    instances = gap_instances(200, 4, 8, 40, 606)
    none_visible = quad_fail = crossings = bridges = 0
    for ring, subs in instances:
        arcs = [(s.start, s.end) for s in subs]
        vis = [strongly_mutually_visible(ring, arcs[i], arcs[j]) for i, j in non_adjacent_pairs(arcs)]
        none_visible += not any(vis)
        quad_fail += len(arcs) == 4 and not all(vis)
        for br in fill_gap(Gap(tuple(ring), tuple(subs))).bridges:
            bridges += 1
            inter = LineString(br["beta1"]).intersection(LineString(br["beta2"]))
            crossings += inter.geom_type != "Point"
    ok = record_criterion(
        6,
        none_visible == 0 and quad_fail == 0 and crossings == 0,
        f"{none_visible} gaps without a visible pair, {quad_fail} four-arc gaps with a hidden pair, "
        f"{crossings}/{bridges} bridges not crossing in one point",
    )
    assert ok


def visibility_dijkstra(ring):
    poly = Polygon(ring).buffer(1e-12, join_style="mitre")
    n = len(ring)
    w = np.zeros((n, n))
    for i, j in itertools.combinations(range(n), 2):
        if poly.covers(LineString([ring[i], ring[j]])):
            w[i, j] = w[j, i] = math.dist(ring[i], ring[j])
    return dijkstra(w, directed=False)


def test_criterion_7_shortest_paths():
    rng = np.random.Generator(np.random.PCG64(7))
    worst, vertex_fail, pairs = 0.0, 0, 0
    for _ in range(500):
        ring = random_simple_polygon(rng, int(rng.integers(3, 13)))
        router = PolygonRouter(ring)
        dist = visibility_dijkstra(ring)
        verts = set(ring)
        for a, b in itertools.combinations(range(len(ring)), 2):
            path = router.shortest_path(a, b)
            pairs += 1
            worst = max(worst, abs(path_length(path) - dist[a, b]) / dist[a, b])
            vertex_fail += not set(path) <= verts
    ok = record_criterion(
        7, worst <= 1e-9 and vertex_fail == 0, f"{pairs} vertex pairs on 500 polygons, worst rel. error {worst:.1e}"
    )
    assert ok


def test_criterion_8_conservation(runs):
    worst = 0.0

    def check(inp, res, extra=0.0):
        nonlocal worst
        unfilled = math.fsum(g["area"] for g in res.report.unfilled_gaps)
        want = polygonized_area([u.geometry for u in inp]) + res.report.pocket_area_filled + extra - unfilled
        worst = max(worst, abs(out_area(res.units) - want) / want)

    for noisy, res, _ in runs["voronoi"]:
        check(noisy, res)
    for noisy, raw, res in runs["grid"]:
        check(noisy, raw)
        check(noisy, res)
    units, _, smart = runs["strip"]
    check(units, smart)
    for precincts, counties, res in runs["toy"]:
        want = shapely.union_all([g for _, g in counties]).area
        worst = max(worst, abs(out_area(res.units) - want) / want)
    tri = sum(abs(signed_area(r)) for r, _ in fill_triangle_incenter([(0, 0), (4, 0), (0, 3)], "abc"))
    ok = record_criterion(8, worst <= 1e-9 and tri == 6.0, f"worst rel. area error {worst:.1e}; 3-4-5 split sums to {tri}")
    assert ok


def test_criterion_9_region_nesting(runs):
    bad = 0
    for precincts, counties, res in runs["toy"]:
        cover = shapely.union_all([g for _, g in counties])
        for u in res.units:
            bad += sum(g.covers(u.geometry) for _, g in counties) != 1
        diff = shapely.union_all([u.geometry for u in res.units]).symmetric_difference(cover).area
        bad += diff > 1e-9
        bad += bool(res.report.unfilled_gaps)
    ok = record_criterion(9, bad == 0, f"{len(runs['toy'])} toy runs, {bad} nesting violations")
    assert ok


def merged_case():
    return [box(0, 0, 1, 1), box(1, 0, 2, 1), box(0, 1, 0.99, 2), box(0.99, 1, 1.01, 2), box(1.01, 1, 2, 2)]


def test_criterion_10_rook_to_queen(runs):
    worst, leftover = 0.0, 0
    for noisy, raw, res in runs["grid"][:5]:
        geoms = [u.geometry for u in raw.units]
        out, _ = rook_to_queen(geoms, GRID_QUEEN)
        leftover += len(short_rook_contacts(out, GRID_QUEEN.length_threshold))
        a, b = math.fsum(g.area for g in geoms), math.fsum(g.area for g in out)
        worst = max(worst, abs(a - b) / a)
    out, rep = rook_to_queen(merged_case(), QueenConversion(0.015))
    points = {out[i].intersection(out[j]).wkb for i, j in [(3, 0), (3, 1), (0, 4), (1, 2)]}
    single = rep.hulls == 1 and rep.converted == 2 and len(points) == 1
    ok = record_criterion(
        10,
        leftover == 0 and worst <= 1e-9 and single,
        f"{leftover} short rooks left, worst rel. area change {worst:.1e}, merged disks give "
        f"{len(points)} contact point(s)",
    )
    assert ok


def test_criterion_11_determinism(runs):
    def fingerprint(r):
        parts = [digest(res.units) for _, res, _ in r["voronoi"]]
        parts += [digest(raw.units) + digest(res.units) for _, raw, res in r["grid"]]
        parts += [digest(r["strip"][1]), digest(r["strip"][2].units)]
        parts += [digest(res.units) for _, _, res in r["toy"]]
        return parts

    first, second = fingerprint(runs), fingerprint(run_everything())
    same = sum(a == b for a, b in zip(first, second))
    gaps = [repr(fill_gap(Gap(tuple(r), tuple(s))).regions) for r, s in gap_instances(50, 4, 8, 40, 11)]
    gaps2 = [repr(fill_gap(Gap(tuple(r), tuple(s))).regions) for r, s in gap_instances(50, 4, 8, 40, 11)]
    ok = record_criterion(
        11, same == len(first) and gaps == gaps2, f"{same}/{len(first)} repaired tilings bit-identical across two runs"
    )
    assert ok
