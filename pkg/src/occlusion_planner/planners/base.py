"""
规划器基类

定义规划器的输入快照、输出结果以及公共接口。
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
from typing import Any, ClassVar

import numpy as np
from numpy.typing import NDArray

from occlusion_planner.collision.dual import DualPair, EgoShape
from occlusion_planner.config.planner import PlannerConfig
from occlusion_planner.dynamics.bicycle import Control, State, Trajectory
from occlusion_planner.geometry.polytope import ConvexPolytope, OcclusionGeom
from occlusion_planner.occlusion.target import GaussianTarget, SampleSet, draw_samples
from occlusion_planner.occlusion.visibility import occlusion_probability

EVALUATION_SAMPLES = 500


class PlannerKind(StrEnum):
    """
    规划器类型

    CROA: 遮挡感知的多边形避碰规划器
    OMPC: 圆盘近似障碍物、基于距离遮挡代理的规划器
    TRACKING: 仅跟踪与多边形避碰的规划器
    PF: 纯跟踪路径跟随，遇障刹停
    """

    CROA = "croa"
    OMPC = "ompc"
    TRACKING = "tracking"
    PF = "pf"


@dataclass(frozen=True, eq=False)
class WorldSnapshot:
    """
    规划时刻的世界快照

    Attributes:
        robot: 机器人当前位姿
        obstacles: 障碍物多边形
        target: 目标位置分布
        ego: 车体形状
        frame_index: 帧序号，用于派生采样种子
    """

    robot: State
    obstacles: tuple[ConvexPolytope, ...]
    target: GaussianTarget
    ego: EgoShape
    frame_index: int = 0

    @cached_property
    def geoms(self) -> tuple[OcclusionGeom, ...]:
        """各障碍物的遮挡几何参数"""
        return tuple(OcclusionGeom.from_polytope(obs) for obs in self.obstacles)


@dataclass
class OcclusionSlack:
    """
    遮挡松弛变量

    Attributes:
        w: wᵢ ≥ [ξᵢ − 1]⁺
        xi: ξᵢ
    """

    w: NDArray[np.float64]
    xi: NDArray[np.float64]

    @classmethod
    def empty(cls) -> "OcclusionSlack":
        return cls(w=np.zeros(0), xi=np.zeros(0))


@dataclass
class PlanDiagnostics:
    """
    规划诊断信息

    Attributes:
        ccp_iterations: 完成的凸-凹过程迭代数
        alt_iterations: 接受的交替优化迭代总数
        objective_trace: 各接受迭代点的罚目标（在精确动力学展开上计算）
        merged_trace: 各接受迭代点的合并目标 Σ Qᵢwᵢ + ρ·C_tar
        solve_time: 规划总耗时 (s)
        status: optimal / solver_failure / fallback
        residuals: 约束残差
        slack_used: 是否激活了碰撞松弛
        rejected: 被拒绝的候选数
    """

    ccp_iterations: int = 0
    alt_iterations: int = 0
    objective_trace: list[float] = field(default_factory=list)
    merged_trace: list[float] = field(default_factory=list)
    solve_time: float = 0.0
    status: str = "optimal"
    residuals: dict[str, float] = field(default_factory=dict)
    slack_used: bool = False
    rejected: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "ccp_iterations": self.ccp_iterations,
            "alt_iterations": self.alt_iterations,
            "objective_trace": list(self.objective_trace),
            "merged_trace": list(self.merged_trace),
            "solve_time": self.solve_time,
            "status": self.status,
            "residuals": dict(self.residuals),
            "slack_used": self.slack_used,
            "rejected": self.rejected,
        }


@dataclass
class PlanResult:
    """
    规划结果

    Attributes:
        trajectory: 规划轨迹（控制序列的精确展开）
        slacks: 遮挡松弛变量
        occl_estimate: 终端状态处的遮挡概率估计
        duals: 参考轨迹处的对偶变量
        diagnostics: 诊断信息
    """

    trajectory: Trajectory
    slacks: OcclusionSlack
    occl_estimate: float
    duals: list[DualPair] = field(default_factory=list)
    diagnostics: PlanDiagnostics = field(default_factory=PlanDiagnostics)

    @property
    def command(self) -> Control:
        """执行的首个控制"""
        return self.trajectory.controls[0]

    def to_dict(self) -> dict[str, Any]:
        return {
            "states": self.trajectory.state_array().tolist(),
            "controls": self.trajectory.control_array().tolist(),
            "occl_estimate": self.occl_estimate,
            "diagnostics": self.diagnostics.to_dict(),
        }


class BasePlanner(ABC):
    """
    规划器基类

    一个规划器实例服务于一个机器人，plan 调用需外部串行化。

    Attributes:
        kind: 规划器类型
        cfg: 规划器参数
    """

    kind: ClassVar[PlannerKind]

    def __init__(self, cfg: PlannerConfig) -> None:
        self.cfg = cfg

    @abstractmethod
    def plan(self, world: WorldSnapshot, warm: PlanResult | None = None) -> PlanResult:
        """
        计算一个时域的规划

        Args:
            world: 世界快照
            warm: 上一时域的规划结果，用于热启动

        Returns:
            PlanResult: 规划结果
        """

    def sample_seed(self, world: WorldSnapshot) -> int:
        """采样种子 = 配置种子 + 帧序号"""
        return self.cfg.seed + world.frame_index

    def draw_world_samples(self, world: WorldSnapshot, count: int | None = None) -> SampleSet:
        """按帧派生的种子抽取目标样本"""
        m = self.cfg.samples if count is None else count
        return draw_samples(world.target, m, self.sample_seed(world), self.cfg.weight_mode)

    def estimate_occlusion(self, world: WorldSnapshot, p: NDArray[np.float64], samples: SampleSet | None = None) -> float:
        """位置 p 处的遮挡概率估计，样本数为零时使用独立评估样本"""
        if samples is None or len(samples) == 0:
            samples = self.draw_world_samples(world, max(self.cfg.samples, EVALUATION_SAMPLES))
        return occlusion_probability(p, samples, world.geoms)


def create_planner(kind: PlannerKind | str, cfg: PlannerConfig) -> BasePlanner:
    """
    规划器工厂

    Args:
        kind: 规划器类型
        cfg: 规划器参数

    Returns:
        对应类型的规划器实例
    """
    from occlusion_planner.planners.croa import CROAPlanner
    from occlusion_planner.planners.ompc import OMPCPlanner
    from occlusion_planner.planners.pathfollow import PathFollowPlanner
    from occlusion_planner.planners.tracking import TrackingPlanner

    registry: dict[PlannerKind, type[BasePlanner]] = {
        PlannerKind.CROA: CROAPlanner,
        PlannerKind.OMPC: OMPCPlanner,
        PlannerKind.TRACKING: TrackingPlanner,
        PlannerKind.PF: PathFollowPlanner,
    }
    return registry[PlannerKind(kind)](cfg)
