"""
对偶避碰模块

两个凸多边形 𝔾 = {x : Gx ≤ g} 与 𝕆 = {y : Hy ≤ h} 的最小距离等于对偶问题

    max  −λᵀh − μᵀg
    s.t. ‖Hᵀλ‖ ≤ 1,  Gᵀμ + Hᵀλ = 0,  λ ≥ 0,  μ ≥ 0

的最优值。固定参考轨迹处求得的对偶变量后，避碰约束关于机器人位置是仿射的。
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray

from occlusion_planner.config.settings import settings
from occlusion_planner.convexprog.program import ProgramBuilder
from occlusion_planner.convexprog.solver import solve
from occlusion_planner.dynamics.bicycle import State, Trajectory
from occlusion_planner.geometry.distance import exact_distance
from occlusion_planner.geometry.polytope import (
    ConvexPolytope,
    inradius,
    polytope_from_vertices,
    rotation_matrix,
    transform,
)
from occlusion_planner.utils.exceptions import SolverFailureError, StaleDualsError
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)

NORM_TOL = 1e-8
STATIONARITY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class EgoShape:
    """
    机器人车体形状（车体坐标系，原点位于后轴中心）

    Attributes:
        body: 车体多边形 G₀ x ≤ g₀
    """

    body: ConvexPolytope

    def __post_init__(self) -> None:
        if not self.body.contains(np.zeros(2)):
            raise ValueError("车体多边形必须包含后轴中心原点")

    @classmethod
    def rectangle(cls, front: float = 3.8, rear: float = 1.0, width: float = 1.75) -> "EgoShape":
        """矩形车体：后轴前方 front、后方 rear，宽 width"""
        half = 0.5 * width
        return cls(polytope_from_vertices([(-rear, -half), (front, -half), (front, half), (-rear, half)]))

    @property
    def center_offset(self) -> NDArray[np.float64]:
        """车体几何中心在车体坐标系中的位置"""
        return self.body.centroid

    @property
    def inscribed_radius(self) -> float:
        """以几何中心为圆心的内切圆半径"""
        return inradius(self.body, self.center_offset)

    def at(self, s: State) -> ConvexPolytope:
        """位姿 s 处的世界坐标车体"""
        return transform(self.body, s.heading, s.position)

    def center_at(self, s: State) -> NDArray[np.float64]:
        """位姿 s 处的车体几何中心"""
        return s.position + rotation_matrix(s.heading) @ self.center_offset

    def to_dict(self) -> dict[str, list[list[float]]]:
        return {"vertices": self.body.vertices.tolist()}


def ego_halfspaces(shape: EgoShape, s: State) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    世界坐标系下车体的半空间表示

    G(s) = G₀ R(θ)ᵀ，g(s) = g₀ + G₀ R(θ)ᵀ p
    """
    G = shape.body.A @ rotation_matrix(s.heading).T
    return G, shape.body.b + G @ s.position


def min_clearance(shape: EgoShape, s: State, obstacles: Sequence[ConvexPolytope]) -> float:
    """车体到所有障碍物的最小精确距离，无障碍物时为 inf"""
    if not obstacles:
        return float("inf")
    ego = shape.at(s)
    return min(exact_distance(ego, obs) for obs in obstacles)


@dataclass(frozen=True, eq=False)
class DualPair:
    """
    单个 (障碍物k, 步h) 的对偶变量

    Attributes:
        lambda_: 障碍物面的乘子 λ ≥ 0
        mu: 车体面的乘子 μ ≥ 0
        value: 对偶目标值 −λᵀh − μᵀg
        obstacle_index: 障碍物索引 k
        step: 时域步 h
        heading: 求解时的参考航向
        stationarity: 平稳性残差 ‖G(ŝ)ᵀμ + Hᵀλ‖
    """

    lambda_: NDArray[np.float64]
    mu: NDArray[np.float64]
    value: float
    obstacle_index: int
    step: int
    heading: float
    stationarity: float

    def to_dict(self) -> dict[str, object]:
        return {
            "obstacle_index": self.obstacle_index,
            "step": self.step,
            "lambda": self.lambda_.tolist(),
            "mu": self.mu.tolist(),
            "value": self.value,
            "stationarity": self.stationarity,
        }


def _polish(
    lam: NDArray[np.float64],
    mu: NDArray[np.float64],
    G: NDArray[np.float64],
    g: NDArray[np.float64],
    obstacle: ConvexPolytope,
    k: int,
    h: int,
    heading: float,
) -> DualPair:
    """截断负分量并缩放到 ‖Hᵀλ‖ ≤ 1，重新计算目标值（仍为距离下界）"""
    lam = np.maximum(lam, 0.0)
    mu = np.maximum(mu, 0.0)
    norm = float(np.linalg.norm(obstacle.A.T @ lam))
    if norm > 1.0:
        lam = lam / norm
        mu = mu / norm
    value = float(-lam @ obstacle.b - mu @ g)
    stationarity = float(np.linalg.norm(G.T @ mu + obstacle.A.T @ lam))
    return DualPair(
        lambda_=lam,
        mu=mu,
        value=value,
        obstacle_index=k,
        step=h,
        heading=heading,
        stationarity=stationarity,
    )


def _solve_dual_batch(
    ego_list: Sequence[tuple[NDArray[np.float64], NDArray[np.float64]]],
    obstacle_list: Sequence[ConvexPolytope],
    tag: str,
) -> list[tuple[NDArray[np.float64], NDArray[np.float64]]] | None:
    """
    将若干对偶问题组装为一个块对角锥规划求解

    Returns:
        每个问题的 (λ, μ)；求解失败时返回 None
    """
    builder = ProgramBuilder()
    lam_idx = [builder.add_block(f"lambda_{j}", obs.face_count) for j, obs in enumerate(obstacle_list)]
    mu_idx = [builder.add_block(f"mu_{j}", G.shape[0]) for j, (G, _) in enumerate(ego_list)]

    count = len(obstacle_list)
    A_eq = builder.matrix(2 * count)
    W_x = builder.matrix(count)
    W_y = builder.matrix(count)
    for j, ((G, g), obs) in enumerate(zip(ego_list, obstacle_list, strict=True)):
        builder.add_linear(lam_idx[j], obs.b)
        builder.add_linear(mu_idx[j], g)
        for axis in range(2):
            A_eq[2 * j + axis, lam_idx[j]] = obs.A[:, axis]
            A_eq[2 * j + axis, mu_idx[j]] = G[:, axis]
        W_x[j, lam_idx[j]] = obs.A[:, 0]
        W_y[j, lam_idx[j]] = obs.A[:, 1]
        builder.add_bounds(lam_idx[j], lower=0.0)
        builder.add_bounds(mu_idx[j], lower=0.0)

    builder.add_eq(A_eq, np.zeros(2 * count))
    zeros = sp.csr_matrix((count, builder.variable_count))
    # ‖Hᵀλ‖² ≤ 1·1
    builder.add_rotated_cones(zeros, np.ones(count), zeros, np.ones(count), [(W_x, np.zeros(count)), (W_y, np.zeros(count))])

    program = builder.build()
    solution = solve(program, tol=settings.dual_solver_tol, tag=tag)
    if not solution.usable:
        logger.warning(f"对偶问题求解失败 ({tag}): 状态={solution.status.value}")
        return None
    return [(solution.values[lam_idx[j]], solution.values[mu_idx[j]]) for j in range(count)]


def solve_dual(
    ego_hs: tuple[NDArray[np.float64], NDArray[np.float64]],
    obstacle: ConvexPolytope,
    obstacle_index: int = 0,
    step: int = 0,
    heading: float = 0.0,
) -> DualPair:
    """
    求解单个对偶分离问题

    Args:
        ego_hs: 世界坐标车体半空间 (G, g)
        obstacle: 障碍物多边形
        obstacle_index: 障碍物索引
        step: 时域步
        heading: 车体航向，仅作记录

    Returns:
        DualPair: 对偶变量，value 在不相交时等于最小距离

    Raises:
        SolverFailureError: 求解失败
    """
    result = _solve_dual_batch([ego_hs], [obstacle], tag="dual")
    if result is None:
        raise SolverFailureError("numerical_failure", f"障碍物{obstacle_index}、步{step}的对偶问题求解失败")
    lam, mu = result[0]
    G, g = ego_hs
    return _polish(lam, mu, G, g, obstacle, obstacle_index, step, heading)


def solve_duals(
    shape: EgoShape,
    reference: Trajectory,
    obstacles: Sequence[ConvexPolytope],
    batched: bool = True,
) -> list[DualPair]:
    """
    在参考轨迹的每个 (k, h), h = 1..H 处求解对偶变量

    批量模式下全部问题组装为一个块对角规划，失败时逐个求解。
    结果按 (k, h) 顺序排列。
    """
    pairs = [(k, h) for k in range(len(obstacles)) for h in range(1, reference.horizon + 1)]
    if not pairs:
        return []

    ego_list = [ego_halfspaces(shape, reference.states[h]) for _, h in pairs]
    obstacle_list = [obstacles[k] for k, _ in pairs]

    result = _solve_dual_batch(ego_list, obstacle_list, tag="duals") if batched else None
    if result is None:
        return [
            solve_dual(ego_list[j], obstacle_list[j], k, h, reference.states[h].heading)
            for j, (k, h) in enumerate(pairs)
        ]

    duals = []
    for j, (k, h) in enumerate(pairs):
        G, g = ego_list[j]
        lam, mu = result[j]
        duals.append(_polish(lam, mu, G, g, obstacle_list[j], k, h, reference.states[h].heading))
    logger.debug(f"对偶变量求解完成: {len(duals)} 对, 最小对偶值 {min(d.value for d in duals):.3f} m")
    return duals


@dataclass(frozen=True, eq=False)
class CollisionConstraint:
    """
    线性化避碰约束 normalᵀ p_h ≥ bound

    Attributes:
        obstacle_index: 障碍物索引 k
        step: 时域步 h
        normal: 关于机器人位置的系数 −R(θ̂)G₀ᵀμ
        bound: d0 + λᵀh + μᵀg₀
        reference_value: 参考点处的对偶值
    """

    obstacle_index: int
    step: int
    normal: NDArray[np.float64]
    bound: float
    reference_value: float

    def margin(self, p: ArrayLike) -> float:
        """约束余量，非负即满足"""
        return float(self.normal @ np.asarray(p, dtype=float)) - self.bound


def check_dual(dual: DualPair, obstacle: ConvexPolytope, shape: EgoShape, s: State) -> float:
    """
    校验对偶变量不变量，返回参考点处的平稳性残差

    Raises:
        StaleDualsError: 非负性、范数或平稳性条件不满足
    """
    if np.any(dual.lambda_ < 0) or np.any(dual.mu < 0):
        raise StaleDualsError(dual.obstacle_index, dual.step, "对偶变量存在负分量")
    if dual.lambda_.shape[0] != obstacle.face_count or dual.mu.shape[0] != shape.body.face_count:
        raise StaleDualsError(dual.obstacle_index, dual.step, "对偶变量维度与多边形面数不一致")
    norm = float(np.linalg.norm(obstacle.A.T @ dual.lambda_))
    if norm > 1.0 + NORM_TOL:
        raise StaleDualsError(dual.obstacle_index, dual.step, f"‖Hᵀλ‖ = {norm:.3e} 超过 1")
    G, _ = ego_halfspaces(shape, s)
    residual = float(np.linalg.norm(G.T @ dual.mu + obstacle.A.T @ dual.lambda_))
    if residual > STATIONARITY_TOL:
        raise StaleDualsError(dual.obstacle_index, dual.step, f"平稳性残差 {residual:.3e} 过大")
    return residual


def linearized_collision_constraints(
    duals: Sequence[DualPair],
    reference: Trajectory,
    shape: EgoShape,
    obstacles: Sequence[ConvexPolytope],
    d0: float,
) -> list[CollisionConstraint]:
    """
    由参考轨迹处的对偶变量生成关于位置的仿射避碰约束

    −λᵀh − μᵀ(g₀ + G₀R(θ̂)ᵀ p) ≥ d0，航向固定为参考航向。
    平稳性条件在参考点处校验而不施加于决策变量。

    Raises:
        StaleDualsError: 对偶变量不满足不变量
    """
    constraints = []
    for dual in duals:
        obstacle = obstacles[dual.obstacle_index]
        s_ref = reference.states[dual.step]
        check_dual(dual, obstacle, shape, s_ref)
        R = rotation_matrix(s_ref.heading)
        normal = -R @ (shape.body.A.T @ dual.mu)
        bound = d0 + float(dual.lambda_ @ obstacle.b) + float(dual.mu @ shape.body.b)
        constraints.append(
            CollisionConstraint(
                obstacle_index=dual.obstacle_index,
                step=dual.step,
                normal=normal,
                bound=bound,
                reference_value=dual.value,
            )
        )
    return constraints
