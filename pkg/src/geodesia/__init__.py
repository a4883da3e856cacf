"""Exact shortest paths and distance queries on convex polyhedral surfaces."""
from __future__ import annotations

__version__ = "0.1.0"

from .chen_han import DegeneracyError, build_ch_tree, geodesic_distance, shortest_vertex_paths
from .mesh import (SurfaceMesh, SurfacePoint, load_off, point_at_vertex, point_from_world, point_in_face,
                   point_on_edge, read_off, validate_convex)
from .queries import (EdgeQueryStructure, OnePointStructure, build_edge_structure, build_one_point,
                      one_point_query, two_point_query)
from .ridge import build_ridge_tree
from .star import build_star_unfolding, one_point_distance
from .sweep import SequenceTree, sweep_edge
from .tolerance import Tolerances
from .unfolding import EdgeSequence, GeodesicPath, realize_geodesic

__all__ = [
    "DegeneracyError", "EdgeQueryStructure", "EdgeSequence", "GeodesicPath", "OnePointStructure",
    "SequenceTree", "SurfaceMesh", "SurfacePoint", "Tolerances", "build_ch_tree", "build_edge_structure",
    "build_one_point", "build_ridge_tree", "build_star_unfolding", "geodesic_distance", "load_off",
    "one_point_distance", "one_point_query", "point_at_vertex", "point_from_world", "point_in_face",
    "point_on_edge", "read_off", "realize_geodesic", "shortest_vertex_paths", "sweep_edge", "two_point_query",
    "validate_convex",
]
