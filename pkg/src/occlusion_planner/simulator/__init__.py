"""
闭环仿真模块

场景定义、平面激光雷达、仿真引擎与统计指标。
"""

from occlusion_planner.simulator.engine import run
from occlusion_planner.simulator.lidar import beam_directions, scan, sense
from occlusion_planner.simulator.metrics import FrameRecord, Metrics, aggregate, top_fraction_mean
from occlusion_planner.simulator.scenario import LidarConfig, Scenario

__all__ = [
    "FrameRecord",
    "LidarConfig",
    "Metrics",
    "Scenario",
    "aggregate",
    "beam_directions",
    "run",
    "scan",
    "sense",
    "top_fraction_mean",
]
