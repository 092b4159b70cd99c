"""几何模块"""

from occlusion_planner.geometry.distance import exact_distance, point_to_sight_line_distance
from occlusion_planner.geometry.polytope import (
    ConvexPolytope,
    OcclusionGeom,
    circumradius,
    polytope_from_vertices,
    transform,
)
from occlusion_planner.geometry.raycast import ray_cast, ray_cast_many

__all__ = [
    "ConvexPolytope",
    "OcclusionGeom",
    "circumradius",
    "exact_distance",
    "point_to_sight_line_distance",
    "polytope_from_vertices",
    "ray_cast",
    "ray_cast_many",
    "transform",
]
