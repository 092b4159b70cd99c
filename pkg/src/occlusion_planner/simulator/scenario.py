"""
场景模块

定义闭环仿真的静态世界：障碍物、目标真值与估计、机器人初始位姿与激光雷达参数。
"""

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from occlusion_planner.collision.dual import EgoShape, min_clearance
from occlusion_planner.dynamics.bicycle import State
from occlusion_planner.geometry.polytope import ConvexPolytope, OcclusionGeom, transform
from occlusion_planner.occlusion.target import GaussianTarget
from occlusion_planner.utils.exceptions import InvariantViolationError
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)

# 目标估计均值允许偏离目标真值的距离
BELIEF_TOL = 5.0


@dataclass(frozen=True)
class LidarConfig:
    """
    平面激光雷达参数

    Attributes:
        ray_count: 射线数
        fov: 视场角 (rad)，以机器人航向为中心
        max_range: 最大量程 (m)
        rate: 名义扫描频率 (Hz)，仿真中每个规划步扫描一次
    """

    ray_count: int = 360
    fov: float = 2.0 * np.pi
    max_range: float = 40.0
    rate: float = 10.0

    def __post_init__(self) -> None:
        if self.ray_count < 1:
            raise ValueError("射线数必须不小于 1")
        if not 0.0 < self.fov <= 2.0 * np.pi + 1e-12:
            raise ValueError(f"视场角 {self.fov} 不在 (0, 2π] 内")
        if self.max_range <= 0:
            raise ValueError("量程必须为正")


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    仿真场景

    Attributes:
        name: 场景名
        obstacles: 障碍物多边形
        target_truth: 目标车体多边形
        target_belief: 目标位置估计
        robot_start: 机器人初始位姿
        ego: 车体形状
        lidar: 激光雷达参数
        max_sim_time: 最长仿真时间 (s)
        goal_radius: 到达判定半径 (m)
        jitter: 车辆位置随机扰动幅度 (m)
        obstacle_names: 障碍物名称
    """

    name: str
    obstacles: tuple[ConvexPolytope, ...]
    target_truth: ConvexPolytope
    target_belief: GaussianTarget
    robot_start: State
    ego: EgoShape = field(default_factory=EgoShape.rectangle)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    max_sim_time: float = 30.0
    goal_radius: float = 3.0
    jitter: float = 0.0
    obstacle_names: tuple[str, ...] = ()

    @cached_property
    def geoms(self) -> tuple[OcclusionGeom, ...]:
        return tuple(OcclusionGeom.from_polytope(obs) for obs in self.obstacles)

    def validate(self, d0: float) -> None:
        """
        校验场景不变量

        Raises:
            InvariantViolationError: 目标估计远离目标真值，或初始位姿距障碍物不足 d0
        """
        offset = float(np.linalg.norm(self.target_belief.mean - self.target_truth.centroid))
        if not self.target_truth.contains(self.target_belief.mean) and offset > BELIEF_TOL:
            raise InvariantViolationError("target_belief", f"目标估计均值距目标真值 {offset:.2f} m")
        clearance = min_clearance(self.ego, self.robot_start, self.obstacles)
        if clearance < d0:
            raise InvariantViolationError("robot_start", f"初始位姿距障碍物 {clearance:.3f} m，小于安全距离 {d0} m")

    def perturbed(self, seed: int) -> "Scenario":
        """
        对障碍物与目标位置施加 [−jitter, jitter] 均匀扰动，机器人初始位姿不变

        目标估计均值随目标真值平移。
        """
        if self.jitter <= 0:
            return self
        rng = np.random.default_rng(seed)
        shifts = rng.uniform(-self.jitter, self.jitter, size=(len(self.obstacles) + 1, 2))
        obstacles = tuple(transform(obs, 0.0, shifts[k]) for k, obs in enumerate(self.obstacles))
        target_truth = transform(self.target_truth, 0.0, shifts[-1])
        belief = GaussianTarget(mean=self.target_belief.mean + shifts[-1], covariance=self.target_belief.covariance)

        clearance = min_clearance(self.ego, self.robot_start, obstacles)
        if clearance < 0:
            logger.warning(f"场景 {self.name} 扰动后初始位姿与障碍物相交 (种子 {seed})")
        return replace(self, obstacles=obstacles, target_truth=target_truth, target_belief=belief)
