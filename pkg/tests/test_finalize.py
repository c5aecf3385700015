import math

import pytest
import shapely
from shapely.geometry import Point, box

from conftest import rel_close
from tilerepair.finalize import OrphanPolicy, QueenConversion, reconnect_orphans, rook_to_queen, short_rook_contacts
from tilerepair.synth import Perturbation, generate_grid, perturb
from tilerepair.pipeline import RepairOptions, smart_repair


def total_area(geoms):
    return math.fsum(g.area for g in geoms)


def test_tiny_sliver_moves_to_neighbour():
    sliver = box(3, 1, 3 + 2e-3, 1 + 2e-3)
    a = box(0, 0, 2, 2).union(sliver)
    b = box(2, 0, 4, 2).difference(sliver)
    assert sliver.area / box(0, 0, 2, 2).area == pytest.approx(1e-6)
    out, residual = reconnect_orphans([a, b])
    assert residual == []
    assert out[0].equals(box(0, 0, 2, 2))
    assert out[1].equals(box(2, 0, 4, 2))
    assert rel_close(total_area(out), total_area([a, b]), 1e-12)


def test_equal_components_are_reported():
    a = box(0, 0, 1, 1).union(box(2, 0, 3, 1))
    b = box(1, 0, 2, 1)
    out, residual = reconnect_orphans([a, b])
    assert residual == [0]
    assert out[0].equals(a) and out[1].equals(b)


def test_connected_units_untouched():
    units, _ = generate_grid(3, 3)
    geoms = [u.geometry for u in units]
    out, residual = reconnect_orphans(geoms, OrphanPolicy(0.5))
    assert residual == []
    assert all(o.equals(g) for o, g in zip(out, geoms))


def staggered():
    # the top row is shifted by 0.01, so unit 2 touches unit 1 along a 0.01 edge
    return [box(0, 0, 1, 1), box(1, 0, 2, 1), box(0, 1, 1.01, 2), box(1.01, 1, 2, 2)]


def test_single_short_contact_becomes_point():
    geoms = staggered()
    out, rep = rook_to_queen(geoms, QueenConversion(0.02))
    assert rep.converted == 1 and rep.hulls == 1
    assert short_rook_contacts(out, 0.02) == []
    assert rel_close(total_area(out), 4.0, 1e-9)
    touch = out[2].intersection(out[1])
    assert touch.geom_type == "Point"
    assert touch.equals(Point(1.005, 1.0))
    # every unit meets the others at that point
    for g in out:
        assert g.distance(touch) == 0
    # the long contacts survive
    assert out[0].boundary.intersection(out[2].boundary).length > 0.9
    for i in range(4):
        for j in range(i + 1, 4):
            assert out[i].intersection(out[j]).area < 1e-15


def test_no_short_contact_is_identity():
    geoms = staggered()
    out, rep = rook_to_queen(geoms, QueenConversion(0.005))
    assert rep.converted == 0
    assert all(o.equals(g) for o, g in zip(out, geoms))


def merged_case():
    return [
        box(0, 0, 1, 1),
        box(1, 0, 2, 1),
        box(0, 1, 0.99, 2),
        box(0.99, 1, 1.01, 2),
        box(1.01, 1, 2, 2),
    ]


def test_overlapping_disks_merge_into_one_point():
    out, rep = rook_to_queen(merged_case(), QueenConversion(0.015))
    assert rep.converted == 2 and rep.hulls == 1
    assert short_rook_contacts(out, 0.015) == []
    assert rel_close(total_area(out), 4.0, 1e-9)
    points = {out[i].intersection(out[j]).wkb for i, j in [(3, 0), (3, 1), (0, 4), (1, 2)]}
    assert len(points) == 1
    p = shapely.from_wkb(points.pop())
    assert p.geom_type == "Point"
    assert p.distance(Point(1.0, 1.0)) < 1e-3


def test_conversion_is_idempotent():
    out, _ = rook_to_queen(merged_case(), QueenConversion(0.015))
    again, rep = rook_to_queen(out, QueenConversion(0.015))
    assert rep.converted == 0
    assert all(a.equals(b) for a, b in zip(again, out))


def test_repaired_grid_conversion_conserves_area():
    units, _ = generate_grid(4, 4)
    res = smart_repair(perturb(units, Perturbation(0.002, 3)), RepairOptions())
    geoms = [u.geometry for u in res.units]
    out, rep = rook_to_queen(geoms, QueenConversion(0.02))
    assert short_rook_contacts(out, 0.02) == []
    assert rel_close(total_area(out), total_area(geoms), 1e-9)
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            assert out[i].intersection(out[j]).area <= 1e-12
