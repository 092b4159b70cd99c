"""
可见性模块

实现基于视线距离的遮挡判据、蒙特卡洛遮挡概率估计以及紧松弛变量 ξ 的计算。
"""

from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from occlusion_planner.geometry.distance import point_to_sight_line_distance
from occlusion_planner.geometry.polytope import GEOM_TOL, OcclusionGeom
from occlusion_planner.occlusion.target import SampleSet
from occlusion_planner.utils.exceptions import DegenerateGeometryError, OnSightLineError


def _between(p: NDArray[np.float64], z: NDArray[np.float64], o: NDArray[np.float64]) -> bool:
    """障碍物中心在线段 p→z 上的投影严格位于线段内部"""
    seg = z - p
    t = float(np.dot(o - p, seg) / np.dot(seg, seg))
    return 0.0 < t < 1.0


def occluded(p: ArrayLike, z: ArrayLike, geom: OcclusionGeom) -> bool:
    """
    判断从 p 观察 z 时是否被障碍物遮挡

    判据为 R·‖p−z‖ ≥ dist(p, z, o)·‖o−z‖，并要求障碍物位于机器人与目标之间。

    Raises:
        DegenerateGeometryError: 目标与障碍物中心重合，或机器人与目标重合
    """
    p_ = np.asarray(p, dtype=float)
    z_ = np.asarray(z, dtype=float)
    o = geom.center
    oz = float(np.linalg.norm(o - z_))
    if oz < GEOM_TOL:
        raise DegenerateGeometryError(f"目标样本与障碍物中心距离 {oz:.3e} m 过小")
    pz = float(np.linalg.norm(p_ - z_))
    if pz < GEOM_TOL:
        raise DegenerateGeometryError("机器人位置与目标样本重合")

    dist = point_to_sight_line_distance(p_, z_, o)
    if geom.radius * pz < dist * oz:
        return False
    return _between(p_, z_, o)


def occlusion_mask(
    p: ArrayLike,
    samples: NDArray[np.float64],
    centers: NDArray[np.float64],
    radii: NDArray[np.float64],
    gated: bool = True,
) -> NDArray[np.bool_]:
    """
    向量化遮挡判据

    Args:
        p: 机器人位置
        samples: 目标样本，形状 (M, 2)
        centers: 障碍物中心，形状 (K, 2)
        radii: 遮挡半径，形状 (K,)
        gated: 是否应用位于两者之间的判据

    Returns:
        形状 (M, K) 的布尔矩阵
    """
    p_ = np.asarray(p, dtype=float)
    d = centers[None, :, :] - samples[:, None, :]
    oz = np.linalg.norm(d, axis=2)
    if np.any(oz < GEOM_TOL):
        raise DegenerateGeometryError("存在与障碍物中心重合的目标样本")

    rel = p_[None, :] - samples
    pz = np.linalg.norm(rel, axis=1)
    cross = np.abs(d[..., 0] * rel[:, None, 1] - d[..., 1] * rel[:, None, 0])
    # R·‖p−g‖ ≥ dist·‖o−g‖，其中 dist·‖o−g‖ 即叉积绝对值
    mask = radii[None, :] * pz[:, None] >= cross
    if not gated:
        return mask

    seg = samples - p_[None, :]
    seg_sq = np.einsum("ij,ij->i", seg, seg)
    to_center = centers - p_[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (seg @ to_center.T) / seg_sq[:, None]
    return mask & (t > 0.0) & (t < 1.0)


def occlusion_probability(
    p: ArrayLike,
    samples: SampleSet,
    geoms: Sequence[OcclusionGeom],
) -> float:
    """
    蒙特卡洛估计的期望遮挡概率

    样本是目标分布的独立抽样，样本本身已按概率密度分布，因此概率取被遮挡样本的比例。
    权重 Qᵢ 只用于规划目标中的松弛加权。
    """
    if len(samples) == 0:
        raise ValueError("样本集不能为空")
    if not geoms:
        return 0.0
    centers = np.array([g.center for g in geoms])
    radii = np.array([g.radius for g in geoms])
    hidden = occlusion_mask(p, samples.samples, centers, radii).any(axis=1)
    return float(np.mean(hidden))


def xi_tight(p: ArrayLike, g: ArrayLike, geom: OcclusionGeom) -> float:
    """
    紧松弛值 R²‖p−g‖² / (‖o−g‖²·dist²)

    值不小于1当且仅当（不考虑位于两者之间的判据时）p 处观察 g 被遮挡。

    Raises:
        OnSightLineError: p 到视线的距离小于 1e-9
    """
    p_ = np.asarray(p, dtype=float)
    g_ = np.asarray(g, dtype=float)
    dist = point_to_sight_line_distance(p_, g_, geom.center)
    if dist < GEOM_TOL:
        raise OnSightLineError(dist)
    pg_sq = float(np.dot(p_ - g_, p_ - g_))
    og_sq = float(np.dot(geom.center - g_, geom.center - g_))
    return geom.radius**2 * pg_sq / (og_sq * dist**2)
