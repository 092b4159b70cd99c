"""
平面激光雷达

从机器人位置在视场内均匀投射射线，统计首个命中为目标车体的射线数。
"""

import numpy as np
from numpy.typing import NDArray

from occlusion_planner.dynamics.bicycle import State
from occlusion_planner.geometry.raycast import ray_cast_many
from occlusion_planner.simulator.scenario import LidarConfig, Scenario


def beam_directions(heading: float, lidar: LidarConfig) -> NDArray[np.float64]:
    """第 i 条射线方位角为 heading − fov/2 + i·fov/n"""
    angles = heading - 0.5 * lidar.fov + np.arange(lidar.ray_count) * lidar.fov / lidar.ray_count
    return np.column_stack([np.cos(angles), np.sin(angles)])


def scan(robot: State, scenario: Scenario) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """
    一次扫描

    Returns:
        (各射线命中距离, 命中索引)；索引 K 表示目标车体，-1 表示量程内无命中
    """
    polys = [*scenario.obstacles, scenario.target_truth]
    return ray_cast_many(robot.position, beam_directions(robot.heading, scenario.lidar), polys, scenario.lidar.max_range)


def sense(robot: State, scenario: Scenario) -> int:
    """落在目标车体上的激光点数"""
    _, index = scan(robot, scenario)
    return int(np.count_nonzero(index == len(scenario.obstacles)))
