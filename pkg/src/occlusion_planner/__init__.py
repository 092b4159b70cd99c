"""
Occlusion Planner - 遮挡感知运动规划库

面向位置不确定（高斯分布）目标的滚动时域视点规划：在多边形障碍物之间避碰的同时，
最小化目标被障碍物遮挡的概率。

支持的规划器:
- croa: 遮挡感知 + 多边形对偶避碰
- ompc: 遮挡感知 + 圆盘近似避碰
- tracking: 仅跟踪 + 多边形对偶避碰
- pf: 纯跟踪路径跟随，遇障刹停

Example:
    >>> from occlusion_planner import PlannerConfig, load_scenario, run, shipped_scenario
    >>> scenario = load_scenario(shipped_scenario("canonical"))
    >>> metrics, records = run(scenario, "croa", PlannerConfig(), seed=0)
    >>> print(metrics.occlusion_ratio)
"""

from occlusion_planner.config.planner import PlannerConfig
from occlusion_planner.experiment.scenario_files import load_scenario, shipped_scenario
from occlusion_planner.planners.base import PlannerKind, WorldSnapshot, create_planner
from occlusion_planner.simulator.engine import run

__version__ = "0.1.0"
__author__ = "Occlusion Planner Team"

__all__ = [
    "PlannerConfig",
    "PlannerKind",
    "WorldSnapshot",
    "create_planner",
    "load_scenario",
    "run",
    "shipped_scenario",
]
