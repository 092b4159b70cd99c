"""
文件格式模型

定义场景文件、帧日志与汇总表的数据模型。所有文件都带 format_version 字段。
"""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

FORMAT_VERSION = 1

Point = tuple[float, float]


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PoseModel(_StrictModel):
    """
    位姿

    Attributes:
        x_m: x 坐标
        y_m: y 坐标
        heading_rad: 航向角
    """

    x_m: float
    y_m: float
    heading_rad: float = 0.0


class PolygonModel(_StrictModel):
    """
    多边形，顶点可为任意顺序，取凸包

    Attributes:
        name: 名称
        vertices_m: 顶点列表
    """

    name: str = ""
    vertices_m: list[Point]


class TargetModel(_StrictModel):
    """
    目标真值车体与位置估计

    Attributes:
        vertices_m: 目标车体顶点
        belief_mean_m: 位置估计均值
        belief_covariance_m2: 位置估计协方差
    """

    vertices_m: list[Point]
    belief_mean_m: Point
    belief_covariance_m2: tuple[Point, Point] = ((1.0, 0.0), (0.0, 1.0))


class LidarModel(_StrictModel):
    """平面激光雷达参数"""

    ray_count: int = Field(default=360, ge=1)
    fov_rad: float = Field(default=2.0 * np.pi, gt=0)
    max_range_m: float = Field(default=40.0, gt=0)
    rate_hz: float = Field(default=10.0, gt=0)


class ScenarioFileModel(_StrictModel):
    """
    场景文件

    Attributes:
        format_version: 文件格式版本
        name: 场景名
        robot_start: 机器人初始位姿
        ego: 车体多边形（车体坐标系，原点为后轴中心），缺省为标准矩形车体
        obstacles: 障碍物
        target: 目标
        lidar: 激光雷达
        max_sim_time_s: 最长仿真时间
        goal_radius_m: 到达判定半径
        jitter_m: 车辆位置随机扰动幅度
    """

    format_version: Literal[1] = FORMAT_VERSION
    name: str
    robot_start: PoseModel
    ego: PolygonModel | None = None
    obstacles: list[PolygonModel] = Field(default_factory=list)
    target: TargetModel
    lidar: LidarModel = Field(default_factory=LidarModel)
    max_sim_time_s: float = Field(default=30.0, gt=0)
    goal_radius_m: float = Field(default=3.0, gt=0)
    jitter_m: float = Field(default=0.0, ge=0)


class SummaryRow(_StrictModel):
    """
    汇总表中的一行（一个规划器、一个种子）

    Attributes:
        planner: 规划器类型
        seed: 随机种子
        status: ok 或失败原因
        detectable_frames: 可检测帧数
        total_frames: 总帧数
        occlusion_ratio: 遮挡率
        mean_points: 平均点数
        median_points: 点数中位数
        top15_points: 最高 15% 帧平均点数
        time_to_target_s: 到达用时，未到达为空
        min_clearance_m: 全程最小距离
    """

    format_version: Literal[1] = FORMAT_VERSION
    planner: str
    seed: int
    status: str = "ok"
    detectable_frames: int | None = None
    total_frames: int | None = None
    occlusion_ratio: float | None = None
    mean_points: float | None = None
    median_points: float | None = None
    top15_points: float | None = None
    time_to_target_s: float | None = None
    min_clearance_m: float | None = None
