"""
圆盘近似规划器

障碍物以圆盘近似（圆心 o_k，半径 R_k 加车体内切圆半径），避碰约束在参考轨迹处
线性化为半平面；遮挡代价为基于视线距离的光滑代理
Σ_k exp(−dist(p, μ, o_k)² / (2R_k²))，在展开点处一阶展开后进入终端线性代价。
"""

from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray

from occlusion_planner.collision.dual import CollisionConstraint, DualPair, EgoShape
from occlusion_planner.dynamics.bicycle import State, Trajectory
from occlusion_planner.geometry.polytope import GEOM_TOL, OcclusionGeom, rotation_matrix
from occlusion_planner.planners.base import PlannerKind, WorldSnapshot
from occlusion_planner.planners.horizon import OcclusionTerms
from occlusion_planner.planners.receding import HorizonContext, RecedingHorizonPlanner
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)


def disc_clearance(shape: EgoShape, s: State, geoms: Sequence[OcclusionGeom]) -> float:
    """车体中心到各障碍物圆盘的最小间距 ‖c − o_k‖ − R_k − r，无障碍物时为 inf"""
    if not geoms:
        return float("inf")
    c = shape.center_at(s)
    r = shape.inscribed_radius
    return min(float(np.linalg.norm(c - g.center)) - g.radius - r for g in geoms)


def proxy_value_and_gradient(
    p: NDArray[np.float64],
    mean: NDArray[np.float64],
    geoms: Sequence[OcclusionGeom],
) -> tuple[float, NDArray[np.float64]]:
    """
    距离遮挡代理及其关于 p 的梯度

    仅统计位于机器人与目标均值之间的障碍物；障碍物在视线上时单项取 1。
    """
    value = 0.0
    grad = np.zeros(2)
    d = p - mean
    n_sq = float(d @ d)
    if n_sq < GEOM_TOL**2:
        return value, grad

    for geom in geoms:
        a = geom.center - mean
        t = float((geom.center - p) @ (mean - p)) / n_sq
        if not 0.0 < t < 1.0:
            continue
        cross = float(a[0] * d[1] - a[1] * d[0])
        dist_sq = cross**2 / n_sq
        dcross = np.array([-a[1], a[0]])
        ddist_sq = 2.0 * cross * dcross / n_sq - 2.0 * cross**2 * d / n_sq**2
        term = float(np.exp(-dist_sq / (2.0 * geom.radius**2)))
        value += term
        grad += -term / (2.0 * geom.radius**2) * ddist_sq
    return value, grad


class OMPCPlanner(RecedingHorizonPlanner):
    """
    忽略障碍物形状的遮挡感知规划器

    障碍物较密时圆盘近似会封闭多边形之间实际可通行的窄缝。
    """

    kind = PlannerKind.OMPC

    def collision_constraints(
        self, world: WorldSnapshot, reference: Trajectory
    ) -> tuple[list[CollisionConstraint], list[DualPair]]:
        constraints = []
        r = world.ego.inscribed_radius
        offset = world.ego.center_offset
        for h in range(1, reference.horizon + 1):
            s_ref = reference.states[h]
            R_off = rotation_matrix(s_ref.heading) @ offset
            c_ref = s_ref.position + R_off
            for k, geom in enumerate(world.geoms):
                delta = c_ref - geom.center
                dist = float(np.linalg.norm(delta))
                if dist < GEOM_TOL:
                    # 圆心重合时沿参考航向推开
                    normal = rotation_matrix(s_ref.heading)[:, 0]
                else:
                    normal = delta / dist
                bound = geom.radius + r + self.cfg.d0 + float(normal @ (geom.center - R_off))
                constraints.append(
                    CollisionConstraint(
                        obstacle_index=k,
                        step=h,
                        normal=normal,
                        bound=bound,
                        reference_value=dist - geom.radius - r,
                    )
                )
        return constraints, []

    def occlusion_terms(
        self, ctx: HorizonContext, expansion: NDArray[np.float64]
    ) -> tuple[OcclusionTerms | None, NDArray[np.float64] | None]:
        if not ctx.world.geoms or self.cfg.penalty_occlusion <= 0:
            return None, None
        value, grad = proxy_value_and_gradient(expansion, ctx.world.target.mean, ctx.world.geoms)
        logger.debug(f"展开点处距离遮挡代理 {value:.4f}")
        if value == 0.0:
            return None, None
        return None, self.cfg.penalty_occlusion * grad

    def occlusion_penalty(self, ctx: HorizonContext, p: NDArray[np.float64]) -> float:
        if not ctx.world.geoms:
            return 0.0
        value, _ = proxy_value_and_gradient(p, ctx.world.target.mean, ctx.world.geoms)
        return self.cfg.penalty_occlusion * value
