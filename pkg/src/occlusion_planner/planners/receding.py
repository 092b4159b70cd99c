"""
滚动时域优化规划器

CROA、OMPC 与跟踪规划器共享的外层流程：
参考轨迹 → 约束准备 → 凸-凹外循环 → 交替优化内循环。
子类通过钩子方法提供避碰约束、遮挡项与遮挡罚函数。
"""

import time
from abc import abstractmethod
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from occlusion_planner.collision.dual import CollisionConstraint, DualPair, min_clearance
from occlusion_planner.config.planner import OcclusionMode
from occlusion_planner.config.settings import settings
from occlusion_planner.convexprog.solver import Solution, SolveStatus, solve
from occlusion_planner.dynamics.bicycle import Control, Trajectory, rollout
from occlusion_planner.occlusion.target import SampleSet
from occlusion_planner.planners.base import (
    BasePlanner,
    OcclusionSlack,
    PlanDiagnostics,
    PlanResult,
    WorldSnapshot,
)
from occlusion_planner.planners.horizon import OcclusionTerms, StepAProblem, assemble_step_a
from occlusion_planner.planners.waypoints import Waypoints, detour_waypoints, reference_waypoints, tracking_cost
from occlusion_planner.utils.exceptions import InfeasibleStartError
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)

EARLY_STOP = 1e-4
RETRY_TOL_FACTOR = 100.0


@dataclass
class HorizonContext:
    """
    单个时域内保持不变的数据

    Attributes:
        world: 世界快照
        waypoints: 参考航点
        samples: 目标样本（无遮挡项时为 None）
        collision: 线性化避碰约束
        slack_mask: 各约束是否附带松弛
        duals: 对偶变量
    """

    world: WorldSnapshot
    waypoints: Waypoints
    samples: SampleSet | None
    collision: list[CollisionConstraint]
    slack_mask: list[bool]
    duals: list[DualPair] = field(default_factory=list)


class RecedingHorizonPlanner(BasePlanner):
    """
    基于序列凸化的滚动时域规划器基类

    每个接受的迭代点都是控制序列经精确动力学展开得到的轨迹；
    候选点只有在罚目标与合并目标均不增大时才被接受，因此两条目标轨迹单调不增。
    有目标样本时提前终止以合并目标的下降量为准。
    """

    uses_occlusion_samples: bool = True

    def plan(self, world: WorldSnapshot, warm: PlanResult | None = None) -> PlanResult:
        started = time.perf_counter()
        cfg = self.cfg
        diagnostics = PlanDiagnostics()

        waypoints = self.reference_path(world)
        current = self.initial_reference(world, warm)
        samples = self.draw_world_samples(world) if self.uses_occlusion_samples and cfg.samples > 0 else None

        collision, duals = self.collision_constraints(world, current)
        slack_mask = [con.reference_value < cfg.d0 for con in collision]
        if any(slack_mask):
            logger.warning(f"参考轨迹距障碍物不足安全距离，激活 {sum(slack_mask)} 个碰撞松弛")
            diagnostics.slack_used = True
        ctx = HorizonContext(world, waypoints, samples, collision, slack_mask, duals)

        J_cur = self.penalized_objective(ctx, current)
        slacks = self.update_slacks(ctx, current)
        merged_cur = self.merged_objective(ctx, current, slacks)
        diagnostics.objective_trace.append(J_cur)
        diagnostics.merged_trace.append(merged_cur)
        # 有目标样本时合并目标 Σ Qᵢwᵢ + ρ·C_tar 同样不得增大
        tracks_merged = samples is not None and slacks.w.size > 0

        failed = False
        for ccp in range(cfg.ccp_iters):
            expansion = current.states[-1].position
            occlusion, terminal_linear = self.occlusion_terms(ctx, expansion)
            diagnostics.ccp_iterations = ccp + 1
            accepted = 0

            for _ in range(cfg.alt_iters):
                # 轨迹子问题：固定松弛子问题给出的 ξ
                step_terms = occlusion
                if occlusion is not None and slacks.xi.size == occlusion.batch.sample_count:
                    step_terms = replace(occlusion, xi_fixed=slacks.xi)
                solution, problem = self._solve_step_a(ctx, current, step_terms, terminal_linear, diagnostics)
                if solution is None:
                    failed = True
                    break

                controls = [
                    cfg.bounds.clip(Control.from_array(u)) for u in problem.controls(solution.values)
                ]
                candidate = rollout(world.robot, controls, cfg.dt, cfg.wheelbase)
                # 松弛子问题：闭式更新
                candidate_slacks = self.update_slacks(ctx, candidate)
                J_new = self.penalized_objective(ctx, candidate)
                merged_new = self.merged_objective(ctx, candidate, candidate_slacks)
                if J_new > J_cur or (tracks_merged and merged_new > merged_cur):
                    diagnostics.rejected += 1
                    logger.debug(
                        f"候选轨迹被拒绝: 目标 {J_cur:.6f} → {J_new:.6f}, 合并目标 {merged_cur:.6f} → {merged_new:.6f}"
                    )
                    break

                decrease = merged_cur - merged_new if tracks_merged else J_cur - J_new

                current, slacks = candidate, candidate_slacks
                J_cur, merged_cur = J_new, merged_new
                accepted += 1
                diagnostics.alt_iterations += 1
                diagnostics.objective_trace.append(J_cur)
                diagnostics.merged_trace.append(merged_cur)
                diagnostics.residuals["dynamics"] = solution.kkt_residuals.get("primal_eq", 0.0)
                diagnostics.residuals["stationarity"] = solution.kkt_residuals.get("stationarity", 0.0)
                if decrease < EARLY_STOP:
                    break

            # 未接受任何候选时展开点不变，后续迭代重复同一问题
            if failed or accepted == 0:
                break

        if failed:
            diagnostics.status = "solver_failure"

        terminal = current.states[-1].position
        occl_estimate = self.estimate_occlusion(world, terminal, samples)
        diagnostics.residuals["min_clearance"] = min(
            min_clearance(world.ego, s, world.obstacles) for s in current.states[1:]
        )
        if duals:
            diagnostics.residuals["dual_stationarity"] = max(d.stationarity for d in duals)
        diagnostics.solve_time = time.perf_counter() - started

        logger.debug(
            f"{self.kind.value} 规划完成: 帧={world.frame_index}, 接受迭代={diagnostics.alt_iterations}, "
            f"目标={J_cur:.4f}, 遮挡估计={occl_estimate:.3f}, 耗时={diagnostics.solve_time:.3f}s"
        )
        return PlanResult(
            trajectory=current,
            slacks=slacks,
            occl_estimate=occl_estimate,
            duals=duals,
            diagnostics=diagnostics,
        )

    def _solve_step_a(
        self,
        ctx: HorizonContext,
        current: Trajectory,
        occlusion: OcclusionTerms | None,
        terminal_linear: NDArray[np.float64] | None,
        diagnostics: PlanDiagnostics,
    ) -> tuple[Solution | None, StepAProblem]:
        """
        求解轨迹子问题，依次处理回退

        硬遮挡约束不可行时改用罚函数；仍不可行时对全部避碰约束加松弛；
        再不可行则抛出 InfeasibleStartError。数值失败返回 None。
        """
        cfg = self.cfg
        slack_mask = ctx.slack_mask
        while True:
            problem = assemble_step_a(
                ctx.world.robot,
                current,
                ctx.waypoints,
                cfg,
                collision=ctx.collision,
                slack_mask=slack_mask,
                occlusion=occlusion,
                terminal_linear=terminal_linear,
            )
            solution = solve(problem.program, tag=f"{self.kind.value}_step_a")

            if solution.status is SolveStatus.INFEASIBLE:
                if occlusion is not None and occlusion.hard:
                    logger.warning("硬遮挡约束不可行，回退为罚函数模式")
                    occlusion = replace(occlusion, hard=False)
                    diagnostics.status = "fallback"
                    continue

                if not all(slack_mask):
                    logger.warning("轨迹子问题不可行，对全部避碰约束加松弛")
                    slack_mask = [True] * len(ctx.collision)
                    ctx.slack_mask = slack_mask
                    diagnostics.slack_used = True
                    continue
                raise InfeasibleStartError()

            if not solution.usable:
                logger.warning(f"轨迹子问题求解失败: 状态={solution.status.value}，缩放代价并放宽精度重试")
                solution = solve(
                    problem.program.scaled(1.0 / cfg.rho),
                    tol=settings.solver_tol * RETRY_TOL_FACTOR,
                    tag=f"{self.kind.value}_step_a_retry",
                )
            if not solution.usable:
                logger.warning(f"轨迹子问题重试仍失败: 状态={solution.status.value}，返回当前最优迭代点")
                return None, problem

            if solution.status is SolveStatus.MAX_ITERS:
                logger.warning("轨迹子问题达到最大迭代次数，使用近似解")
            return solution, problem

    def reference_path(self, world: WorldSnapshot) -> Waypoints:
        """直线参考航点，按配置绕开挡在直线上的障碍物"""
        cfg = self.cfg
        waypoints = reference_waypoints(world.robot, world.target.mean, cfg)
        if cfg.reference_detour:
            waypoints = detour_waypoints(waypoints, world.obstacles, world.ego, cfg.d0)
        return waypoints

    def initial_reference(self, world: WorldSnapshot, warm: PlanResult | None) -> Trajectory:
        """
        参考轨迹：热启动时为上一规划时移一步（末尾重复最后控制），
        冷启动时为从当前状态刹停的直线展开
        """
        cfg = self.cfg
        if warm is not None and warm.trajectory.horizon == cfg.horizon:
            controls = list(warm.trajectory.controls[1:]) + [warm.trajectory.controls[-1]]
            controls = [cfg.bounds.clip(u) for u in controls]
        else:
            controls = [cfg.bounds.clip(Control(0.0, 0.0))] * cfg.horizon
        return rollout(world.robot, controls, cfg.dt, cfg.wheelbase)

    def penalized_objective(self, ctx: HorizonContext, traj: Trajectory) -> float:
        """罚目标 ρ·C_tar + 遮挡罚 + 避碰违反罚，在精确展开上计算"""
        cfg = self.cfg
        value = tracking_cost(traj, ctx.waypoints, cfg.rho)
        value += self.occlusion_penalty(ctx, traj.states[-1].position)
        if ctx.collision:
            positions = traj.positions()
            violation = sum(max(0.0, -con.margin(positions[con.step])) for con in ctx.collision)
            value += cfg.collision_slack_weight * violation
        return float(value)

    def merged_objective(self, ctx: HorizonContext, traj: Trajectory, slacks: OcclusionSlack) -> float:
        """合并目标 Σ Qᵢwᵢ + ρ·C_tar"""
        value = tracking_cost(traj, ctx.waypoints, self.cfg.rho)
        if ctx.samples is not None and slacks.w.size:
            value += float(ctx.samples.weights @ slacks.w)
        return float(value)

    def hard_occlusion(self) -> bool:
        return self.cfg.occlusion_mode is OcclusionMode.HARD

    @abstractmethod
    def collision_constraints(
        self, world: WorldSnapshot, reference: Trajectory
    ) -> tuple[list[CollisionConstraint], list[DualPair]]:
        """在参考轨迹处构造仿射避碰约束"""

    def occlusion_terms(
        self, ctx: HorizonContext, expansion: NDArray[np.float64]
    ) -> tuple[OcclusionTerms | None, NDArray[np.float64] | None]:
        """在展开点处构造遮挡项，缺省无遮挡项"""
        return None, None

    def occlusion_penalty(self, ctx: HorizonContext, p: NDArray[np.float64]) -> float:
        """终端位置处的遮挡罚，缺省为零"""
        return 0.0

    def update_slacks(self, ctx: HorizonContext, traj: Trajectory) -> OcclusionSlack:
        """闭式更新遮挡松弛，缺省为空"""
        return OcclusionSlack.empty()

