"""
规划器配置模块

定义滚动时域规划器的参数模型。
"""

from enum import StrEnum
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from occlusion_planner.dynamics.bicycle import Control, ControlBounds
from occlusion_planner.occlusion.target import WeightMode
from occlusion_planner.utils.exceptions import ConfigurationError


class XiMode(StrEnum):
    """
    ξ 处理方式

    ALTERNATING: 轨迹子问题中固定 ξ，闭式更新
    JOINT: ξ 作为轨迹子问题的决策变量
    """

    ALTERNATING = "alternating"
    JOINT = "joint"


class OcclusionMode(StrEnum):
    """
    遮挡约束处理方式

    PENALTY: 铰链罚函数
    HARD: 硬约束，不可行时回退到罚函数
    """

    PENALTY = "penalty"
    HARD = "hard"


class PlannerConfig(BaseModel):
    """
    规划器参数

    Attributes:
        rho: 跟踪代价权重 ρ
        horizon: 预测步数 H
        dt: 时间步长 Δt (s)
        samples: 目标样本数 M
        d0: 安全距离 (m)
        speed_min: 速度下界 (m/s)
        speed_max: 速度上界 (m/s)
        steer_min: 转角下界 (rad)
        steer_max: 转角上界 (rad)
        ccp_iters: 凸-凹过程迭代次数
        alt_iters: 交替优化迭代次数
        penalty_occlusion: 遮挡罚权重 σ
        penalty_collision_slack: 碰撞松弛罚权重，缺省为 10³·ρ
        xi_floor: ξ 下限
        xi_cap: ξ 上限
        nominal_speed: 参考航点的名义速度 (m/s)
        reference_detour: 参考航点是否绕开挡在直线上的障碍物
        seed: 随机种子
        weight_mode: 样本权重模式
        xi_mode: ξ 处理方式
        occlusion_mode: 遮挡约束处理方式
        control_regularization: 控制量正则化权重
        heading_trust_region: 航向信赖域 (rad)
        wheelbase: 轴距 L (m)
        detect_threshold: 可检测点数阈值
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    rho: float = Field(default=0.1, gt=0)
    horizon: int = Field(default=10, ge=1)
    dt: float = Field(default=0.3, gt=0)
    samples: int = Field(default=500, ge=0)
    d0: float = Field(default=1.0, gt=0)
    speed_min: float = 0.0
    speed_max: float = 8.0
    steer_min: float = -0.6
    steer_max: float = 0.6
    ccp_iters: int = Field(default=3, ge=1)
    alt_iters: int = Field(default=3, ge=1)
    penalty_occlusion: float = Field(default=50.0, ge=0)
    penalty_collision_slack: float | None = Field(default=None, gt=0)
    xi_floor: float = Field(default=1e-6, gt=0)
    xi_cap: float = Field(default=1e6, gt=1)
    nominal_speed: float = Field(default=5.0, gt=0)
    reference_detour: bool = True
    seed: int = 0
    weight_mode: WeightMode = WeightMode.DENSITY
    xi_mode: XiMode = XiMode.ALTERNATING
    occlusion_mode: OcclusionMode = OcclusionMode.PENALTY
    control_regularization: float = Field(default=1e-3, ge=0)
    heading_trust_region: float = Field(default=0.4, gt=0)
    wheelbase: float = Field(default=2.87, gt=0)
    detect_threshold: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def _check_bounds(self) -> "PlannerConfig":
        _ = self.bounds  # ControlBounds 自身校验上下界
        return self

    @property
    def bounds(self) -> ControlBounds:
        """控制约束"""
        return ControlBounds(
            min=Control(self.speed_min, self.steer_min),
            max=Control(self.speed_max, self.steer_max),
        )

    @property
    def collision_slack_weight(self) -> float:
        """碰撞松弛罚权重"""
        if self.penalty_collision_slack is not None:
            return self.penalty_collision_slack
        return 1e3 * self.rho

    def with_overrides(self, overrides: dict[str, Any] | None) -> "PlannerConfig":
        """
        应用覆盖项并重新校验

        Raises:
            ConfigurationError: 覆盖项名称未知或取值非法
        """
        if not overrides:
            return self
        try:
            return PlannerConfig.model_validate({**self.model_dump(), **overrides})
        except ValidationError as e:
            first = e.errors()[0]
            name = ".".join(str(p) for p in first["loc"]) or "planner"
            raise ConfigurationError(name, first["msg"]) from e


def load_overrides(path: str | Path) -> dict[str, Any]:
    """
    读取 YAML 或 JSON 格式的规划器参数覆盖文件

    Raises:
        ConfigurationError: 文件不存在、无法解析或顶层不是映射
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigurationError(str(file_path), "配置文件不存在")
    try:
        data = yaml.safe_load(file_path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigurationError(str(file_path), f"无法解析: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(str(file_path), "顶层必须是键值映射")
    return data
