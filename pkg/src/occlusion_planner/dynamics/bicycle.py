"""
运动学自行车模型

前向欧拉离散化的车辆运动学模型、控制约束及其雅可比线性化。
状态 s = (x, y, θ)，控制 u = (v, ψ)。
"""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray


def wrap_angle(angle: float | NDArray[np.float64]) -> float | NDArray[np.float64]:
    """将角度归一化到 (−π, π]"""
    return angle - 2.0 * np.pi * np.ceil((angle - np.pi) / (2.0 * np.pi))


@dataclass(frozen=True)
class State:
    """
    机器人位姿

    Attributes:
        x: 横坐标 (m)
        y: 纵坐标 (m)
        heading: 航向角 (rad)，归一化到 (−π, π]
    """

    x: float
    y: float
    heading: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", float(wrap_angle(float(self.heading))))

    @classmethod
    def from_array(cls, arr: ArrayLike) -> "State":
        a = np.asarray(arr, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def to_array(self) -> NDArray[np.float64]:
        return np.array([self.x, self.y, self.heading])

    @property
    def position(self) -> NDArray[np.float64]:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Control:
    """
    控制指令

    Attributes:
        speed: 速度 v (m/s)
        steer: 前轮转角 ψ (rad)
    """

    speed: float
    steer: float

    @classmethod
    def from_array(cls, arr: ArrayLike) -> "Control":
        a = np.asarray(arr, dtype=float)
        return cls(float(a[0]), float(a[1]))

    def to_array(self) -> NDArray[np.float64]:
        return np.array([self.speed, self.steer])


@dataclass(frozen=True)
class ControlBounds:
    """控制指令的上下界"""

    min: Control = field(default_factory=lambda: Control(0.0, -0.6))
    max: Control = field(default_factory=lambda: Control(8.0, 0.6))

    def __post_init__(self) -> None:
        if self.min.speed > self.max.speed or self.min.steer > self.max.steer:
            raise ValueError("控制下界必须逐分量不大于上界")
        if max(abs(self.min.steer), abs(self.max.steer)) >= np.pi / 2:
            raise ValueError("转角界限必须小于 π/2")

    @property
    def lower(self) -> NDArray[np.float64]:
        return self.min.to_array()

    @property
    def upper(self) -> NDArray[np.float64]:
        return self.max.to_array()

    def clip(self, u: Control) -> Control:
        """将控制裁剪到界限内"""
        return Control.from_array(np.clip(u.to_array(), self.lower, self.upper))

    def contains(self, u: Control, tol: float = 0.0) -> bool:
        a = u.to_array()
        return bool(np.all(a >= self.lower - tol) and np.all(a <= self.upper + tol))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    时域轨迹

    Attributes:
        states: H+1 个状态
        controls: H 个控制
        dt: 时间步长 (s)
    """

    states: tuple[State, ...]
    controls: tuple[Control, ...]
    dt: float

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"时间步长必须为正，实际为 {self.dt}")
        if len(self.states) != len(self.controls) + 1:
            raise ValueError("状态数必须比控制数多1")

    @property
    def horizon(self) -> int:
        return len(self.controls)

    def state_array(self) -> NDArray[np.float64]:
        """状态矩阵，形状 (H+1, 3)"""
        return np.array([s.to_array() for s in self.states])

    def control_array(self) -> NDArray[np.float64]:
        """控制矩阵，形状 (H, 2)"""
        if not self.controls:
            return np.zeros((0, 2))
        return np.array([u.to_array() for u in self.controls])

    def positions(self) -> NDArray[np.float64]:
        return self.state_array()[:, :2]

    def shifted(self, wheelbase: float) -> "Trajectory":
        """
        时移一步的热启动轨迹：丢弃首个控制，末尾重复最后一个控制，
        并从新的首状态重新展开
        """
        if not self.controls:
            return self
        controls = list(self.controls[1:]) + [self.controls[-1]]
        return rollout(self.states[1], controls, self.dt, wheelbase)


def dynamics_rate(s: NDArray[np.float64], u: NDArray[np.float64], wheelbase: float) -> NDArray[np.float64]:
    """连续时间运动学 f(s, u)"""
    v, psi = u[0], u[1]
    theta = s[2]
    return np.array([v * np.cos(theta), v * np.sin(theta), v * np.tan(psi) / wheelbase])


def step(s: State, u: Control, dt: float, wheelbase: float) -> State:
    """前向欧拉一步：s + f(s, u)·dt，航向角再归一化"""
    nxt = s.to_array() + dynamics_rate(s.to_array(), u.to_array(), wheelbase) * dt
    return State.from_array(nxt)


def linearize(
    s_ref: State,
    u_ref: Control,
    dt: float,
    wheelbase: float,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """
    欧拉步在参考点处的仿射近似 s⁺ ≈ A s + B u + c

    常数项按未归一化的航向计算，使参考点处恰好复现欧拉步（航向连续展开）。

    Returns:
        (A 3×3, B 3×2, c 3)
    """
    theta = s_ref.heading
    v, psi = u_ref.speed, u_ref.steer
    ct, st = np.cos(theta), np.sin(theta)

    A = np.eye(3)
    A[0, 2] = -v * st * dt
    A[1, 2] = v * ct * dt

    B = np.zeros((3, 2))
    B[0, 0] = ct * dt
    B[1, 0] = st * dt
    B[2, 0] = np.tan(psi) / wheelbase * dt
    B[2, 1] = v / (wheelbase * np.cos(psi) ** 2) * dt

    s_arr = s_ref.to_array()
    u_arr = u_ref.to_array()
    unwrapped_next = s_arr + dynamics_rate(s_arr, u_arr, wheelbase) * dt
    c = unwrapped_next - A @ s_arr - B @ u_arr
    return A, B, c


def rollout(
    s0: State,
    controls: Sequence[Control],
    dt: float,
    wheelbase: float,
) -> Trajectory:
    """依次应用控制序列得到轨迹"""
    states = [s0]
    for u in controls:
        states.append(step(states[-1], u, dt, wheelbase))
    return Trajectory(states=tuple(states), controls=tuple(controls), dt=dt)
