"""Repair gaps and overlaps in polygonal tilings and recover their adjacency."""
from ._kernels import BACKEND
from .arrangement import DiagnosticsReport, TilingError, doctor
from .finalize import OrphanPolicy, QueenConversion, reconnect_orphans, rook_to_queen
from .gaps import FillResult, GapFiller, fill_gap, fill_triangle_incenter
from .geometry import GeometryError, Orientation, Point, Ring, VertexClass, classify_vertex, orientation
from .io import DataError, read_units, write_adjacency, write_report, write_units
from .model import EXTERIOR, Gap, SubBoundary, Unit
from .paths import shortest_path
from .pipeline import (
    AdjacencyGraph,
    Region,
    RepairOptions,
    RepairReport,
    adjacency_graph,
    quick_repair,
    smart_repair,
    smart_repair_region_aware,
)
from .synth import Perturbation, generate_grid, generate_voronoi, perturb, strip_gap
from .visibility import strongly_mutually_visible

__all__ = [
    "BACKEND",
    "AdjacencyGraph",
    "DataError",
    "DiagnosticsReport",
    "EXTERIOR",
    "FillResult",
    "Gap",
    "GapFiller",
    "GeometryError",
    "Orientation",
    "OrphanPolicy",
    "Perturbation",
    "Point",
    "QueenConversion",
    "Region",
    "RepairOptions",
    "RepairReport",
    "Ring",
    "SubBoundary",
    "TilingError",
    "Unit",
    "VertexClass",
    "adjacency_graph",
    "classify_vertex",
    "doctor",
    "fill_gap",
    "fill_triangle_incenter",
    "generate_grid",
    "generate_voronoi",
    "orientation",
    "perturb",
    "quick_repair",
    "read_units",
    "reconnect_orphans",
    "rook_to_queen",
    "shortest_path",
    "smart_repair",
    "smart_repair_region_aware",
    "strip_gap",
    "strongly_mutually_visible",
    "write_adjacency",
    "write_report",
    "write_units",
]
