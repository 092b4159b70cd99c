"""
pytest配置文件

定义测试fixtures和公共配置。
"""

import numpy as np
import pytest

from occlusion_planner.collision.dual import EgoShape
from occlusion_planner.config.planner import PlannerConfig
from occlusion_planner.dynamics.bicycle import State
from occlusion_planner.experiment.scenario_files import load_scenario, shipped_scenario
from occlusion_planner.geometry.polytope import ConvexPolytope, polytope_from_vertices
from occlusion_planner.occlusion.target import GaussianTarget
from occlusion_planner.planners.base import WorldSnapshot


def box(cx: float, cy: float, half_x: float, half_y: float | None = None) -> ConvexPolytope:
    """以 (cx, cy) 为中心的轴对齐矩形"""
    hy = half_x if half_y is None else half_y
    return polytope_from_vertices(
        [(cx - half_x, cy - hy), (cx + half_x, cy - hy), (cx + half_x, cy + hy), (cx - half_x, cy + hy)]
    )


@pytest.fixture(scope="session")
def small_config():
    """小规模规划器参数，保证单元测试耗时可控"""
    return PlannerConfig(horizon=5, samples=60, ccp_iters=2, alt_iters=2)


@pytest.fixture(scope="session")
def ego():
    """缺省矩形车体"""
    return EgoShape.rectangle()


@pytest.fixture(scope="session")
def canonical_scenario():
    """内置典型场景"""
    return load_scenario(shipped_scenario("canonical"))


@pytest.fixture(scope="session")
def free_space_scenario():
    """内置无障碍物场景"""
    return load_scenario(shipped_scenario("free_space"))


@pytest.fixture
def unit_square():
    """原点为中心、边长 2 的正方形"""
    return box(0.0, 0.0, 1.0)


@pytest.fixture
def target():
    """位于 (20, 0) 的高斯目标"""
    return GaussianTarget.create([20.0, 0.0], np.eye(2))


@pytest.fixture
def empty_world(ego, target):
    """无障碍物的世界快照"""
    return WorldSnapshot(robot=State(0.0, 0.0, 0.0), obstacles=(), target=target, ego=ego)


@pytest.fixture
def blocked_world(ego, target):
    """机器人与目标之间有一个障碍物的世界快照"""
    return WorldSnapshot(
        robot=State(0.0, 0.0, 0.0),
        obstacles=(box(10.0, 0.0, 1.0),),
        target=target,
        ego=ego,
    )


@pytest.fixture(scope="session")
def make_box():
    """轴对齐矩形工厂"""
    return box
