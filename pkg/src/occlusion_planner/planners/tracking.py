"""
跟踪规划器

仅包含参考航点跟踪与多边形对偶避碰，不考虑目标可见性。
"""

from occlusion_planner.config.planner import PlannerConfig
from occlusion_planner.planners.base import PlannerKind
from occlusion_planner.planners.croa import CROAPlanner


class TrackingPlanner(CROAPlanner):
    """遮挡项全部移除（σ = 0，M = 0）的 CROA 规划器"""

    kind = PlannerKind.TRACKING
    uses_occlusion_samples = False

    def __init__(self, cfg: PlannerConfig) -> None:
        super().__init__(cfg.with_overrides({"penalty_occlusion": 0.0, "samples": 0}))
