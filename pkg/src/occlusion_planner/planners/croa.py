"""
遮挡感知规划器

在多边形对偶避碰约束下，最小化跟踪代价与终端遮挡概率的 ℓ1 松弛之和。
遮挡约束经凸-凹过程线性化，轨迹子问题与松弛子问题交替求解。
"""

import numpy as np
from numpy.typing import NDArray

from occlusion_planner.collision.dual import (
    CollisionConstraint,
    DualPair,
    linearized_collision_constraints,
    solve_duals,
)
from occlusion_planner.dynamics.bicycle import Trajectory
from occlusion_planner.geometry.polytope import GEOM_TOL
from occlusion_planner.occlusion.surrogate import build_surrogate_batch
from occlusion_planner.planners.base import OcclusionSlack, PlannerKind, WorldSnapshot
from occlusion_planner.planners.horizon import OcclusionTerms
from occlusion_planner.planners.receding import HorizonContext, RecedingHorizonPlanner
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)


def tight_slacks(
    p: NDArray[np.float64],
    samples: NDArray[np.float64],
    centers: NDArray[np.float64],
    radii: NDArray[np.float64],
    xi_floor: float,
    xi_cap: float,
) -> OcclusionSlack:
    """
    固定位置 p 时松弛子问题的闭式最优解

    ξᵢ = clamp(max_k R_k²‖p−gᵢ‖²/(‖o_k−gᵢ‖²·dist²), ε_ξ, cap)，仅对障碍物位于
    p 与 gᵢ 之间的 (i, k) 取最大；视线穿过 p 时取上限。wᵢ = max(ξᵢ − 1, 0)。
    """
    M = samples.shape[0]
    if centers.shape[0] == 0 or M == 0:
        xi = np.full(M, xi_floor)
        return OcclusionSlack(w=np.zeros(M), xi=xi)

    d = centers[None, :, :] - samples[:, None, :]
    rel = p[None, :] - samples
    cross = d[..., 0] * rel[:, None, 1] - d[..., 1] * rel[:, None, 0]
    pg_sq = np.einsum("ij,ij->i", rel, rel)
    og = np.linalg.norm(d, axis=2)

    seg_sq = pg_sq
    to_center = centers - p[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (-rel @ to_center.T) / seg_sq[:, None]
        # cross² = ‖o−g‖²·dist²
        ratio = radii[None, :] ** 2 * pg_sq[:, None] / cross**2
    gated = (t > 0.0) & (t < 1.0)
    on_line = np.abs(cross) < GEOM_TOL * np.maximum(og, GEOM_TOL)
    ratio = np.where(on_line, xi_cap, ratio)
    ratio = np.where(gated, ratio, -np.inf)

    xi = np.clip(ratio.max(axis=1), xi_floor, xi_cap)
    return OcclusionSlack(w=np.maximum(xi - 1.0, 0.0), xi=xi)


class CROAPlanner(RecedingHorizonPlanner):
    """
    遮挡感知滚动时域规划器

    Example:
        >>> planner = CROAPlanner(PlannerConfig())
        >>> result = planner.plan(world)
        >>> result.command
    """

    kind = PlannerKind.CROA

    def collision_constraints(
        self, world: WorldSnapshot, reference: Trajectory
    ) -> tuple[list[CollisionConstraint], list[DualPair]]:
        if not world.obstacles:
            return [], []
        duals = solve_duals(world.ego, reference, world.obstacles)
        constraints = linearized_collision_constraints(duals, reference, world.ego, world.obstacles, self.cfg.d0)
        return constraints, duals

    def _geometry_arrays(self, world: WorldSnapshot) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        if not world.geoms:
            return np.zeros((0, 2)), np.zeros(0)
        return np.array([g.center for g in world.geoms]), np.array([g.radius for g in world.geoms])

    def occlusion_terms(
        self, ctx: HorizonContext, expansion: NDArray[np.float64]
    ) -> tuple[OcclusionTerms | None, NDArray[np.float64] | None]:
        if ctx.samples is None or not ctx.world.geoms or self.cfg.penalty_occlusion <= 0:
            return None, None
        batch = build_surrogate_batch(expansion, ctx.samples, ctx.world.geoms).active()
        logger.debug(f"展开点 ({expansion[0]:.2f}, {expansion[1]:.2f}) 处有效代理约束 {len(batch)} 个")
        if len(batch) == 0:
            return None, None
        terms = OcclusionTerms(
            batch=batch,
            weights=ctx.samples.weights,
            xi_mode=self.cfg.xi_mode,
            hard=self.hard_occlusion(),
            xi_floor=self.cfg.xi_floor,
            xi_cap=self.cfg.xi_cap,
        )
        return terms, None

    def occlusion_penalty(self, ctx: HorizonContext, p: NDArray[np.float64]) -> float:
        """Σ Qᵢwᵢ，取终端位置处的紧松弛，罚目标因此等于合并目标加避碰违反罚"""
        if ctx.samples is None or not ctx.world.geoms:
            return 0.0
        return float(ctx.samples.weights @ self._slacks_at(ctx, p).w)

    def update_slacks(self, ctx: HorizonContext, traj: Trajectory) -> OcclusionSlack:
        return self._slacks_at(ctx, traj.states[-1].position)

    def _slacks_at(self, ctx: HorizonContext, p: NDArray[np.float64]) -> OcclusionSlack:
        if ctx.samples is None:
            return OcclusionSlack.empty()
        centers, radii = self._geometry_arrays(ctx.world)
        return tight_slacks(p, ctx.samples.samples, centers, radii, self.cfg.xi_floor, self.cfg.xi_cap)

