import numpy as np
import pytest
import shapely
from hypothesis import given, strategies as st
from shapely.geometry import Polygon, box

from conftest import SQUARE, rel_close
from tilerepair.gaps import (
    GapFiller,
    extract_sub_boundaries,
    fill_gap,
    fill_triangle_incenter,
    split_holes,
    sub_boundaries_from_units,
)
from tilerepair.geometry import signed_area
from tilerepair.model import EXTERIOR, Gap, SubBoundary
from tilerepair.synth import random_simplified_gap


def owner_map(ring, owners):
    n = len(ring)
    return {(ring[i], ring[(i + 1) % n]): o for i, o in enumerate(owners) if o is not None}


def by_owner(res):
    out = {}
    for ring, o in res.regions:
        out.setdefault(o, []).append(Polygon(ring))
    return {o: shapely.union_all(ps) for o, ps in out.items()}


def check_partition(ring, res):
    polys = [Polygon(r) for r, _ in res.regions]
    assert all(p.is_valid and p.area > 0 for p in polys)
    assert rel_close(sum(signed_area(r) for r, _ in res.regions), signed_area(ring), 1e-9)
    gap = Polygon(ring)
    assert shapely.union_all(polys).symmetric_difference(gap).area <= 1e-9 * gap.area
    for a in range(len(polys)):
        for b in range(a + 1, len(polys)):
            assert polys[a].intersection(polys[b]).area <= 1e-12 * gap.area


def test_incenter_regions_345():
    regions = fill_triangle_incenter([(0, 0), (4, 0), (0, 3)], ["a", "b", "c"])
    assert regions[0] == ([(0.0, 0.0), (4.0, 0.0), (1.0, 1.0)], "a")
    areas = [abs(signed_area(r)) for r, _ in regions]
    assert areas[0] == 2.0
    assert sum(areas) == 6.0


def test_incenter_equilateral_congruent():
    s = 3**0.5 / 2
    areas = [signed_area(r) for r, _ in fill_triangle_incenter([(0, 0), (1, 0), (0.5, s)], [0, 1, 2])]
    assert max(areas) - min(areas) < 1e-15


def test_two_sub_sliver():
    units = {"A": box(-1, 0, 0, 1), "B": Polygon([(0, 0), (1, 0), (1, 1), (0, 1), (0.1, 0.5)])}
    gap = Polygon([(0, 0), (0.1, 0.5), (0, 1)])
    _, subs = sub_boundaries_from_units(gap, units, 1e-12)
    assert sorted(s.owner for s in subs) == ["A", "B"]


def test_one_unit_on_two_arcs_gives_two_subs():
    subs = extract_sub_boundaries(SQUARE, lambda e: {0: "A", 1: "B", 2: "A", 3: "C"}[SQUARE.index(e[0])])
    assert [s.owner for s in subs] == ["A", "B", "A", "C"]
    assert all(isinstance(s, SubBoundary) for s in subs)


def test_single_owner_gets_whole_gap():
    res = GapFiller().fill(SQUARE, owner_map(SQUARE, ["A"] * 4))
    assert res.regions == [(tuple(SQUARE), "A")]


def test_two_subs_split_along_shortest_path():
    res = GapFiller().fill(SQUARE, owner_map(SQUARE, ["A", "A", "B", "B"]))
    got = by_owner(res)
    assert got["A"].equals(Polygon([(0, 0), (1, 0), (1, 1)]))
    assert got["B"].equals(Polygon([(1, 1), (0, 1), (0, 0)]))


def test_square_four_subs_bridges_lowest_pair():
    res = GapFiller().fill(SQUARE, owner_map(SQUARE, [0, 1, 2, 3]))
    check_partition(SQUARE, res)
    assert res.bridges[0]["pair"] == (0, 2)
    assert res.bridges[0]["crossing"] == (0.5, 0.5)
    got = by_owner(res)
    assert got[0].boundary.intersection(got[2].boundary).length > 0
    assert sum(g.area for g in got.values()) == pytest.approx(1.0, rel=1e-12)


def test_three_straight_subs_meet_at_incenter():
    s = 3**0.5 / 2
    tri = [(0.0, 0.0), (1.0, 0.0), (0.5, s)]
    res = GapFiller().fill(tri, owner_map(tri, ["a", "b", "c"]))
    assert len(res.regions) == 3
    check_partition(tri, res)


def test_exterior_single_unit():
    res = GapFiller().fill(SQUARE, owner_map(SQUARE, ["A", None, None, None]))
    assert res.regions == [(tuple(SQUARE), "A")]


def test_exterior_only_is_left():
    res = GapFiller().fill(SQUARE, {})
    assert res.regions == [] and res.unfilled[0][1] == "exterior-only"


def test_exterior_split_at_nearest_exterior_vertex():
    ring = [(-2.0, 0.0), (2.0, 0.0), (2.0, 4.0), (0.5, 1.2), (-2.0, 2.0)]
    res = GapFiller().fill(ring, owner_map(ring, ["A", "B", None, None, None]))
    check_partition(ring, res)
    got = by_owner(res)
    assert got["B"].equals(Polygon([(2, 0), (2, 4), (0.5, 1.2)]))
    assert got["A"].equals(Polygon([(-2, 0), (2, 0), (0.5, 1.2), (-2, 2)]))


def test_holed_gap_is_reported():
    gap = Gap(tuple(SQUARE), (SubBoundary(0, 0, "A"),), holes=1)
    res = fill_gap(gap)
    assert res.unfilled[0][1] == "not-simply-connected"


def test_split_holes_gives_simple_parts():
    donut = box(0, 0, 3, 3).difference(box(1, 1, 2, 2))
    parts = split_holes(shapely.geometry.polygon.orient(donut, 1.0))
    assert parts is not None and len(parts) >= 2
    assert all(not p.interiors and p.is_valid for p in parts)
    assert sum(p.area for p in parts) == pytest.approx(8.0, rel=1e-12)
    two = box(0, 0, 5, 3).difference(box(1, 1, 2, 2)).difference(box(3, 1, 4, 2))
    parts = split_holes(shapely.geometry.polygon.orient(two, 1.0))
    assert all(not p.interiors for p in parts)
    assert sum(p.area for p in parts) == pytest.approx(13.0, rel=1e-12)


@given(st.integers(0, 10_000), st.integers(3, 8))
def test_random_simplified_gaps_fill_exactly(seed, m):
    rng = np.random.Generator(np.random.PCG64(seed))
    ring, subs = random_simplified_gap(rng, m)
    res = fill_gap(Gap(tuple(ring), tuple(subs)))
    assert not res.unfilled
    check_partition(ring, res)
    assert res.max_depth <= max(m - 3, 0)
    got = by_owner(res)
    if m == 3:
        # the bisector cuts make every pair of units rook adjacent
        for k in range(m):
            a, b = subs[k].owner, subs[(k + 1) % m].owner
            assert got[a].boundary.intersection(got[b].boundary).length > 0
    else:
        a, b = res.bridges[0]["pair"]
        assert got[a].boundary.intersection(got[b].boundary).length > 0


@given(st.integers(0, 10_000), st.integers(4, 7))
def test_random_gaps_with_exterior_arcs(seed, m):
    rng = np.random.Generator(np.random.PCG64(seed))
    ring, subs = random_simplified_gap(rng, m)
    ext = int(rng.integers(0, m))
    subs = [SubBoundary(s.start, s.end, EXTERIOR if k == ext else s.owner) for k, s in enumerate(subs)]
    res = fill_gap(Gap(tuple(ring), tuple(subs)))
    assert not res.unfilled
    check_partition(ring, res)
    assert EXTERIOR not in by_owner(res)
