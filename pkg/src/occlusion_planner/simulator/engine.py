"""
闭环仿真引擎

每帧：构造世界快照 → 规划 → 激光雷达感知 → 记录 → 以精确动力学执行首个控制。
到达目标估计均值的判定半径内或超时即终止。
"""

import math

import numpy as np

from occlusion_planner.collision.dual import min_clearance
from occlusion_planner.config.planner import PlannerConfig
from occlusion_planner.dynamics.bicycle import Control, step
from occlusion_planner.planners.base import PlannerKind, PlanResult, WorldSnapshot, create_planner
from occlusion_planner.simulator.lidar import sense
from occlusion_planner.simulator.metrics import FrameRecord, Metrics, aggregate
from occlusion_planner.simulator.scenario import Scenario
from occlusion_planner.utils.exceptions import OcclusionPlannerError
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)


def run(
    scenario: Scenario,
    planner_kind: PlannerKind | str,
    cfg: PlannerConfig,
    seed: int,
    max_steps: int | None = None,
) -> tuple[Metrics, list[FrameRecord]]:
    """
    运行一次闭环仿真

    场景扰动与规划采样均由 seed 决定，相同输入给出完全相同的结果。
    规划失败时本帧刹停并在记录中标注状态，仿真继续。

    Args:
        scenario: 未扰动的场景
        planner_kind: 规划器类型
        cfg: 规划器参数
        seed: 随机种子
        max_steps: 最大帧数，缺省由 max_sim_time/Δt 决定

    Returns:
        (指标, 逐帧记录)
    """
    kind = PlannerKind(planner_kind)
    world_scenario = scenario.perturbed(seed)
    planner = create_planner(kind, cfg.with_overrides({"seed": seed}))
    frames = math.ceil(scenario.max_sim_time / cfg.dt - 1e-9)
    if max_steps is not None:
        frames = min(frames, max_steps)

    logger.info(f"开始仿真: 场景={scenario.name}, 规划器={kind.value}, 种子={seed}, 最多 {frames} 帧")
    state = world_scenario.robot_start
    goal = world_scenario.target_belief.mean
    warm: PlanResult | None = None
    records: list[FrameRecord] = []
    time_to_target = None

    for frame in range(frames):
        world = WorldSnapshot(
            robot=state,
            obstacles=world_scenario.obstacles,
            target=world_scenario.target_belief,
            ego=world_scenario.ego,
            frame_index=frame,
        )
        try:
            result = planner.plan(world, warm)
            control = result.command
            status = result.diagnostics.status
            occl_estimate = result.occl_estimate
            solve_time = result.diagnostics.solve_time
            warm = result
        except OcclusionPlannerError as e:
            logger.warning(f"帧 {frame} 规划失败，刹停: {e.message}")
            control = cfg.bounds.clip(Control(0.0, 0.0))
            status = type(e).__name__
            occl_estimate = float("nan")
            solve_time = 0.0
            warm = None

        points = sense(state, world_scenario)
        records.append(
            FrameRecord(
                frame=frame,
                time=frame * cfg.dt,
                robot=state,
                control=control,
                target_points=points,
                detectable=points >= cfg.detect_threshold,
                occl_estimate=occl_estimate,
                min_clearance=min_clearance(world_scenario.ego, state, world_scenario.obstacles),
                solve_time=solve_time,
                status=status,
            )
        )

        state = step(state, control, cfg.dt, cfg.wheelbase)
        if float(np.linalg.norm(state.position - goal)) <= scenario.goal_radius:
            time_to_target = (frame + 1) * cfg.dt
            break

    metrics = aggregate(records, time_to_target)
    logger.info(
        f"仿真结束: 规划器={kind.value}, 种子={seed}, 帧数={metrics.total_frames}, "
        f"遮挡率={metrics.occlusion_ratio:.3f}, 到达用时={time_to_target}"
    )
    return metrics, records
