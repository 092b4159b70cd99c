"""
规划器模块

遮挡感知规划器与三个对照规划器。
"""

from occlusion_planner.planners.base import (
    BasePlanner,
    OcclusionSlack,
    PlanDiagnostics,
    PlannerKind,
    PlanResult,
    WorldSnapshot,
    create_planner,
)
from occlusion_planner.planners.croa import CROAPlanner, tight_slacks
from occlusion_planner.planners.ompc import OMPCPlanner, disc_clearance, proxy_value_and_gradient
from occlusion_planner.planners.pathfollow import PathFollowPlanner
from occlusion_planner.planners.tracking import TrackingPlanner
from occlusion_planner.planners.waypoints import Waypoints, detour_waypoints, reference_waypoints, tracking_cost

__all__ = [
    "BasePlanner",
    "CROAPlanner",
    "OMPCPlanner",
    "OcclusionSlack",
    "PathFollowPlanner",
    "PlanDiagnostics",
    "PlanResult",
    "PlannerKind",
    "TrackingPlanner",
    "Waypoints",
    "WorldSnapshot",
    "create_planner",
    "disc_clearance",
    "proxy_value_and_gradient",
    "detour_waypoints",
    "reference_waypoints",
    "tracking_cost",
]
