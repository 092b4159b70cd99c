"""对偶避碰模块"""

from occlusion_planner.collision.dual import (
    CollisionConstraint,
    DualPair,
    EgoShape,
    check_dual,
    ego_halfspaces,
    linearized_collision_constraints,
    min_clearance,
    solve_dual,
    solve_duals,
)

__all__ = [
    "CollisionConstraint",
    "DualPair",
    "EgoShape",
    "check_dual",
    "ego_halfspaces",
    "linearized_collision_constraints",
    "min_clearance",
    "solve_dual",
    "solve_duals",
]
