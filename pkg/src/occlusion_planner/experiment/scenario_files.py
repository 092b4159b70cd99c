"""
场景文件读写

场景以 JSON 保存，字段名带单位后缀。解析与校验错误都定位到文件行号。
"""

import json
from importlib import resources
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from occlusion_planner.collision.dual import EgoShape
from occlusion_planner.config.settings import settings
from occlusion_planner.dynamics.bicycle import State
from occlusion_planner.experiment.schemas import (
    LidarModel,
    PolygonModel,
    PoseModel,
    ScenarioFileModel,
    TargetModel,
)
from occlusion_planner.geometry.polytope import polytope_from_vertices
from occlusion_planner.occlusion.target import GaussianTarget
from occlusion_planner.simulator.scenario import LidarConfig, Scenario
from occlusion_planner.utils.exceptions import (
    DegenerateInputError,
    InvariantViolationError,
    NotPositiveDefiniteError,
    ScenarioParseError,
)
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)

_VALIDATE_LOCATIONS: dict[str, tuple[str, ...]] = {
    "target_belief": ("target", "belief_mean_m"),
    "robot_start": ("robot_start",),
}


def _line_of(text: str, loc: tuple[int | str, ...]) -> int | None:
    """沿字段路径定位节点所在行（从 1 开始），路径中断时返回最深可达节点的行"""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    if node is None:
        return None
    line = node.start_mark.line + 1
    for key in loc:
        child = None
        if isinstance(node, yaml.MappingNode):
            child = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            child = node.value[key]
        if child is None:
            break
        node = child
        line = node.start_mark.line + 1
    return line


def parse_scenario(text: str, path: str = "<string>", d0: float | None = None) -> Scenario:
    """
    解析场景文本并校验不变量

    Args:
        text: JSON 文本
        path: 用于错误信息的文件名
        d0: 初始位姿安全距离，缺省取配置

    Raises:
        ScenarioParseError: JSON 语法或字段错误
        InvariantViolationError: 多边形退化、协方差非正定或初始位姿过近
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(path, e.lineno, f"JSON 语法错误: {e.msg}") from e

    try:
        model = ScenarioFileModel.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first["loc"])
        field_path = ".".join(str(p) for p in loc)
        raise ScenarioParseError(path, _line_of(text, loc), f"{field_path}: {first['msg']}") from e

    obstacles = []
    for k, obs in enumerate(model.obstacles):
        entity = f"obstacles[{k}]" + (f" ({obs.name})" if obs.name else "")
        try:
            obstacles.append(polytope_from_vertices(obs.vertices_m))
        except DegenerateInputError as e:
            raise InvariantViolationError(entity, e.message, _line_of(text, ("obstacles", k))) from e

    try:
        target_truth = polytope_from_vertices(model.target.vertices_m)
    except DegenerateInputError as e:
        raise InvariantViolationError("target", e.message, _line_of(text, ("target", "vertices_m"))) from e

    try:
        belief = GaussianTarget.create(model.target.belief_mean_m, model.target.belief_covariance_m2)
    except NotPositiveDefiniteError as e:
        raise InvariantViolationError(
            "target.belief_covariance_m2", e.message, _line_of(text, ("target", "belief_covariance_m2"))
        ) from e

    ego = EgoShape.rectangle()
    if model.ego is not None:
        try:
            ego = EgoShape(polytope_from_vertices(model.ego.vertices_m))
        except (DegenerateInputError, ValueError) as e:
            raise InvariantViolationError("ego", str(e), _line_of(text, ("ego",))) from e

    try:
        lidar = LidarConfig(
            ray_count=model.lidar.ray_count,
            fov=model.lidar.fov_rad,
            max_range=model.lidar.max_range_m,
            rate=model.lidar.rate_hz,
        )
    except ValueError as e:
        raise InvariantViolationError("lidar", str(e), _line_of(text, ("lidar",))) from e

    scenario = Scenario(
        name=model.name,
        obstacles=tuple(obstacles),
        target_truth=target_truth,
        target_belief=belief,
        robot_start=State(model.robot_start.x_m, model.robot_start.y_m, model.robot_start.heading_rad),
        ego=ego,
        lidar=lidar,
        max_sim_time=model.max_sim_time_s,
        goal_radius=model.goal_radius_m,
        jitter=model.jitter_m,
        obstacle_names=tuple(obs.name for obs in model.obstacles),
    )
    try:
        scenario.validate(settings.planner_d0 if d0 is None else d0)
    except InvariantViolationError as e:
        loc = _VALIDATE_LOCATIONS.get(e.entity, (e.entity,))
        raise InvariantViolationError(e.entity, e.detail, _line_of(text, loc)) from e
    return scenario


def load_scenario(path: str | Path, d0: float | None = None) -> Scenario:
    """
    读取场景文件

    Raises:
        ScenarioParseError: 文件不存在或无法解析
        InvariantViolationError: 场景不变量不满足
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise ScenarioParseError(str(file_path), None, "文件不存在")
    scenario = parse_scenario(file_path.read_text(encoding="utf-8"), str(file_path), d0)
    logger.debug(f"已加载场景 {scenario.name}: {len(scenario.obstacles)} 个障碍物")
    return scenario


def shipped_scenario(name: str) -> Path:
    """随包发布的场景文件路径，如 shipped_scenario("canonical")"""
    path = Path(str(resources.files("occlusion_planner") / "data" / "scenarios" / f"{name}.json"))
    if not path.is_file():
        raise ScenarioParseError(str(path), None, f"没有名为 {name} 的内置场景")
    return path


def scenario_to_model(scenario: Scenario) -> ScenarioFileModel:
    names = scenario.obstacle_names or ("",) * len(scenario.obstacles)
    return ScenarioFileModel(
        name=scenario.name,
        robot_start=PoseModel(
            x_m=scenario.robot_start.x,
            y_m=scenario.robot_start.y,
            heading_rad=scenario.robot_start.heading,
        ),
        ego=PolygonModel(vertices_m=[tuple(v) for v in scenario.ego.body.vertices.tolist()]),
        obstacles=[
            PolygonModel(name=name, vertices_m=[tuple(v) for v in obs.vertices.tolist()])
            for name, obs in zip(names, scenario.obstacles, strict=True)
        ],
        target=TargetModel(
            vertices_m=[tuple(v) for v in scenario.target_truth.vertices.tolist()],
            belief_mean_m=tuple(scenario.target_belief.mean.tolist()),
            belief_covariance_m2=tuple(tuple(row) for row in scenario.target_belief.covariance.tolist()),
        ),
        lidar=LidarModel(
            ray_count=scenario.lidar.ray_count,
            fov_rad=scenario.lidar.fov,
            max_range_m=scenario.lidar.max_range,
            rate_hz=scenario.lidar.rate,
        ),
        max_sim_time_s=scenario.max_sim_time,
        goal_radius_m=scenario.goal_radius,
        jitter_m=scenario.jitter,
    )


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    return scenario_to_model(scenario).model_dump(mode="json")


def save_scenario(scenario: Scenario, path: str | Path) -> Path:
    """写出场景文件，重新读取后与原场景结构一致"""
    file_path = Path(path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    file_path.write_text(json.dumps(scenario_to_dict(scenario), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return file_path
