"""
路径跟随规划器

以纯跟踪转向律沿指向目标的直线行驶，一步前瞻与障碍物的精确距离不足安全距离时刹停。
不做任何优化。
"""

import time

import numpy as np

from occlusion_planner.collision.dual import min_clearance
from occlusion_planner.dynamics.bicycle import Control, State, Trajectory, step
from occlusion_planner.planners.base import (
    BasePlanner,
    OcclusionSlack,
    PlanDiagnostics,
    PlannerKind,
    PlanResult,
    WorldSnapshot,
)
from occlusion_planner.planners.waypoints import TARGET_TOL
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)

MIN_LOOKAHEAD = 1.0


class PathFollowPlanner(BasePlanner):
    """
    纯跟踪路径跟随，遇障刹停

    前瞻点取指向目标均值直线上距离 ld = max(2·Δt·v_nom, 1 m) 处（不越过目标），
    转角 ψ = atan(2L·sin α / ld)，速度 min(v_nom, 剩余距离/Δt)。
    """

    kind = PlannerKind.PF

    def plan(self, world: WorldSnapshot, warm: PlanResult | None = None) -> PlanResult:
        started = time.perf_counter()
        cfg = self.cfg
        diagnostics = PlanDiagnostics()

        states = [world.robot]
        controls = []
        braked = False
        for _ in range(cfg.horizon):
            u = self.control_law(states[-1], world)
            nxt = step(states[-1], u, cfg.dt, cfg.wheelbase)
            if u.speed > 0 and min_clearance(world.ego, nxt, world.obstacles) < cfg.d0:
                u = cfg.bounds.clip(Control(0.0, u.steer))
                nxt = step(states[-1], u, cfg.dt, cfg.wheelbase)
                braked = True
            controls.append(u)
            states.append(nxt)

        if braked and world.obstacles:
            logger.debug(f"帧 {world.frame_index}: 前瞻距离不足安全距离，刹停")
        trajectory = Trajectory(states=tuple(states), controls=tuple(controls), dt=cfg.dt)
        occl_estimate = self.estimate_occlusion(world, states[-1].position)
        diagnostics.residuals["min_clearance"] = min(
            min_clearance(world.ego, s, world.obstacles) for s in states[1:]
        )
        diagnostics.solve_time = time.perf_counter() - started
        return PlanResult(
            trajectory=trajectory,
            slacks=OcclusionSlack.empty(),
            occl_estimate=occl_estimate,
            diagnostics=diagnostics,
        )

    def control_law(self, s: State, world: WorldSnapshot) -> Control:
        """纯跟踪控制，已到达目标时停车"""
        cfg = self.cfg
        delta = world.target.mean - s.position
        remaining = float(np.linalg.norm(delta))
        if remaining < TARGET_TOL:
            return cfg.bounds.clip(Control(0.0, 0.0))

        ld = min(max(2.0 * cfg.dt * cfg.nominal_speed, MIN_LOOKAHEAD), remaining)
        lookahead = s.position + ld * delta / remaining
        rel = lookahead - s.position
        alpha = float(np.arctan2(rel[1], rel[0])) - s.heading
        steer = float(np.arctan(2.0 * cfg.wheelbase * np.sin(alpha) / ld))
        speed = min(cfg.nominal_speed, remaining / cfg.dt)
        return cfg.bounds.clip(Control(speed, steer))
