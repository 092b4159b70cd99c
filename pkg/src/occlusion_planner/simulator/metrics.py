"""
仿真指标模块

定义逐帧记录与整次运行的统计指标。
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from occlusion_planner.dynamics.bicycle import Control, State

TOP_FRACTION = 0.15


@dataclass(frozen=True)
class FrameRecord:
    """
    单帧仿真记录

    Attributes:
        frame: 帧序号
        time: 仿真时间 (s)
        robot: 执行控制前的机器人位姿
        control: 执行的控制
        target_points: 目标车体上的激光点数
        detectable: 点数是否达到检测阈值
        occl_estimate: 规划器给出的遮挡概率估计
        min_clearance: 车体到障碍物的最小精确距离 (m)
        solve_time: 规划耗时 (s)
        status: 规划状态
    """

    frame: int
    time: float
    robot: State
    control: Control
    target_points: int
    detectable: bool
    occl_estimate: float
    min_clearance: float
    solve_time: float
    status: str = "optimal"

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        """转换为字典，耗时默认不输出以保证日志逐字节可复现"""
        data: dict[str, Any] = {
            "frame": self.frame,
            "time": self.time,
            "x": self.robot.x,
            "y": self.robot.y,
            "heading": self.robot.heading,
            "speed": self.control.speed,
            "steer": self.control.steer,
            "target_points": self.target_points,
            "detectable": self.detectable,
            "occl_estimate": self.occl_estimate,
            "min_clearance": self.min_clearance,
            "status": self.status,
        }
        if include_timing:
            data["solve_time"] = self.solve_time
        return data


@dataclass
class Metrics:
    """
    整次运行的统计指标

    Attributes:
        detectable_frames: 可检测帧数
        total_frames: 总帧数
        occlusion_ratio: 1 − 可检测帧数/总帧数
        point_count_series: 逐帧目标点数
        time_to_target: 到达目标用时 (s)，未到达为 None
        min_clearance_overall: 全程最小距离 (m)
        mean_points: 平均点数
        median_points: 点数中位数
        top15_points: 点数最高的 15% 帧的平均点数
    """

    detectable_frames: int
    total_frames: int
    occlusion_ratio: float
    point_count_series: list[int] = field(default_factory=list)
    time_to_target: float | None = None
    min_clearance_overall: float = float("inf")
    mean_points: float = 0.0
    median_points: float = 0.0
    top15_points: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "detectable_frames": self.detectable_frames,
            "total_frames": self.total_frames,
            "occlusion_ratio": self.occlusion_ratio,
            "time_to_target": self.time_to_target,
            "min_clearance_overall": self.min_clearance_overall,
            "mean_points": self.mean_points,
            "median_points": self.median_points,
            "top15_points": self.top15_points,
        }


def top_fraction_mean(points: Sequence[int], fraction: float = TOP_FRACTION) -> float:
    """点数最高的 fraction 比例帧（至少一帧）的平均值"""
    ordered = np.sort(np.asarray(points, dtype=float))[::-1]
    count = max(1, int(np.ceil(fraction * ordered.size)))
    return float(ordered[:count].mean())


def aggregate(records: Sequence[FrameRecord], time_to_target: float | None = None) -> Metrics:
    """
    汇总逐帧记录

    Raises:
        ValueError: 记录为空
    """
    if not records:
        raise ValueError("帧记录不能为空")
    points = [r.target_points for r in records]
    detectable = sum(1 for r in records if r.detectable)
    total = len(records)
    return Metrics(
        detectable_frames=detectable,
        total_frames=total,
        occlusion_ratio=1.0 - detectable / total,
        point_count_series=points,
        time_to_target=time_to_target,
        min_clearance_overall=min(r.min_clearance for r in records),
        mean_points=float(np.mean(points)),
        median_points=float(np.median(points)),
        top15_points=top_fraction_mean(points),
    )
