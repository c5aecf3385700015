import numpy as np
import pytest
import shapely
from hypothesis import given, strategies as st
from shapely.geometry import Point, Polygon, box

from conftest import rel_close
from tilerepair.arrangement import compute_owner_sets, doctor, noded_union, polygonize, representative_points
from tilerepair.synth import Perturbation, generate_grid, generate_voronoi, perturb

A = box(0, 0, 2, 2)
B = box(1, 1, 3, 3)


def test_shared_edge_counts():
    g = noded_union([box(0, 0, 1, 1), box(1, 0, 2, 1)])
    assert len(g.vertices) == 6
    assert len(g.edges) == 7


def test_single_square_unchanged():
    g = noded_union([box(0, 0, 1, 1)])
    assert g.vertices == {(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)}
    assert len(g.edges) == 4


def test_crossings_become_vertices():
    g = noded_union([A, B])
    assert {(2.0, 1.0), (1.0, 2.0)} <= g.vertices
    assert len(g.vertices) == 10


def test_two_overlapping_squares_faces_and_owners():
    pieces = polygonize(noded_union([A, B]))
    assert len(pieces) == 3
    owners = compute_owner_sets(pieces, [A, B])
    lens = [p for p, s in zip(pieces, owners) if s == {0, 1}]
    assert len(lens) == 1 and lens[0].equals(box(1, 1, 2, 2))
    assert sorted(p.area for p, s in zip(pieces, owners) if len(s) == 1) == [3.0, 3.0]
    for p, s in zip(pieces, owners):
        if s == {0}:
            assert p.equals(A.difference(B))


def test_disjoint_squares_two_faces():
    assert len(polygonize(noded_union([box(0, 0, 1, 1), box(2, 0, 3, 1)]))) == 2


def test_three_rectangles_seven_faces():
    units = [box(0, 0, 2, 2), box(1, 0, 3, 2), box(0.5, 1, 2.5, 3)]
    pieces = polygonize(noded_union(units))
    owners = compute_owner_sets(pieces, units)
    assert len(pieces) == 7
    assert sorted(len(s) for s in owners) == [1, 1, 1, 2, 2, 2, 3]


def test_order_zero_face():
    # a ring of four boxes around a hole
    units = [box(0, 0, 3, 1), box(2, 1, 3, 3), box(0, 2, 2, 3), box(0, 1, 1, 2)]
    pieces = polygonize(noded_union(units))
    owners = compute_owner_sets(pieces, units)
    holes = [p for p, s in zip(pieces, owners) if not s]
    assert len(holes) == 1 and holes[0].equals(box(1, 1, 2, 2))


def test_unit_holes_are_honoured():
    donut = box(0, 0, 3, 3).difference(box(1, 1, 2, 2))
    pieces = polygonize(noded_union([donut]))
    owners = compute_owner_sets(pieces, [donut])
    assert sorted(len(s) for s in owners) == [0, 1]


def test_representative_points_inside_thin_and_concave():
    u = Polygon([(0, 0), (10, 0), (10, 1), (1, 1), (1, 10), (0, 10)])
    sliver = Polygon([(0, 0), (1, 0), (1, 1e-7)])
    pts = representative_points([u, sliver])
    assert u.contains(pts[0]) and sliver.contains(pts[1])


def test_doctor_examples():
    rep = doctor([A, B])
    assert (rep.overlap_count, rep.gap_count) == (1, 0)
    assert rep.overlap_area == 1.0
    side = [box(0, 0, 1, 1), box(1.1, 0, 2.1, 1)]
    assert (doctor(side).overlap_count, doctor(side).gap_count) == (0, 0)
    rep = doctor(side, extent="hull")
    assert (rep.overlap_count, rep.gap_count) == (0, 1)
    assert rep.gap_area == pytest.approx(0.1, rel=1e-12)
    units, _ = generate_grid(5, 5)
    rep = doctor([u.geometry for u in units])
    assert (rep.overlap_count, rep.gap_count) == (0, 0)
    assert rep.summary() == "0 overlaps, 0 gaps"


def test_doctor_counts_connected_regions():
    # two overlap lenses sharing a unit count separately
    units = [box(0, 0, 3, 1), box(0.5, 0.5, 1, 2), box(2, 0.5, 2.5, 2)]
    rep = doctor(units)
    assert rep.overlap_count == 2
    assert rep.per_unit[0]["overlaps"] == 2


@given(st.integers(0, 5000), st.sampled_from([1e-3, 1e-2]))
def test_piece_properties_on_perturbed_voronoi(seed, eps):
    units, _ = generate_voronoi(12, seed)
    geoms = [u.geometry for u in perturb(units, Perturbation(eps, seed))]
    pieces = polygonize(noded_union(geoms))
    owners = compute_owner_sets(pieces, geoms)
    covered = [p for p, s in zip(pieces, owners) if s]
    union = shapely.union_all(geoms)
    assert rel_close(sum(p.area for p in covered), union.area, 1e-9)
    # refinement: each unit is the union of the pieces naming it
    for k, g in enumerate(geoms):
        mine = shapely.union_all([p for p, s in zip(pieces, owners) if k in s])
        assert mine.symmetric_difference(g).area <= 1e-9 * g.area
    # pieces are interior-disjoint: representative points lie in exactly one piece
    pts = representative_points(pieces)
    tree = shapely.STRtree(np.array(pieces, dtype=object))
    hits = tree.query(pts, predicate="within")
    assert np.bincount(hits[0], minlength=len(pieces)).tolist() == [1] * len(pieces)
    # renoding the pieces adds no vertices
    before = noded_union(geoms).vertices
    after = noded_union(pieces).vertices
    assert after <= before


def test_hull_extent_ignores_grid_slivers():
    # a 1e-10 dent in a 1x2 block is below the snap grid of the input
    dented = [box(0, 0, 1, 1), Polygon([(1, 0), (2, 0), (2, 1), (1.5, 1 - 1e-10), (1, 1)])]
    assert doctor(dented, extent="hull").gap_count == 0
    notch = [box(0, 0, 1, 1), Polygon([(1, 0), (2, 0), (2, 1), (1.5, 0.9), (1, 1)])]
    rep = doctor(notch, extent="hull")
    assert rep.gap_count == 1
    assert rel_close(rep.gap_area, 0.05, 1e-12)
