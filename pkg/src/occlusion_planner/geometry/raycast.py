"""
射线投射模块

基于Cyrus-Beck裁剪计算射线与凸多边形的最近入射点，用于平面激光雷达仿真。
"""

from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from occlusion_planner.geometry.polytope import ConvexPolytope


def _clip_rays(
    origin: NDArray[np.float64],
    directions: NDArray[np.float64],
    poly: ConvexPolytope,
) -> NDArray[np.float64]:
    """
    计算一组射线进入多边形的参数距离

    Returns:
        形状 (n,) 的入射距离，未命中为 inf；起点在多边形内时为 0
    """
    numer = poly.b - poly.A @ origin
    denom = directions @ poly.A.T

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = numer[None, :] / denom

    entering = denom < 0
    exiting = denom > 0
    parallel_outside = (denom == 0) & (numer[None, :] < 0)

    t_enter = np.where(entering, ratio, -np.inf).max(axis=1)
    t_exit = np.where(exiting, ratio, np.inf).min(axis=1)
    t_enter = np.maximum(t_enter, 0.0)

    hit = (t_enter <= t_exit) & ~parallel_outside.any(axis=1)
    return np.where(hit, t_enter, np.inf)


def ray_cast_many(
    origin: ArrayLike,
    directions: ArrayLike,
    polys: Sequence[ConvexPolytope],
    max_range: float,
) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """
    批量射线投射

    Args:
        origin: 射线起点
        directions: 单位方向向量，形状 (n, 2)
        polys: 多边形列表
        max_range: 最大量程

    Returns:
        (命中距离, 命中多边形索引)；未命中的射线距离为 inf、索引为 -1
    """
    o = np.asarray(origin, dtype=float)
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    n = dirs.shape[0]

    best = np.full(n, np.inf)
    index = np.full(n, -1, dtype=np.int64)
    for k, poly in enumerate(polys):
        t = _clip_rays(o, dirs, poly)
        closer = t < best
        best = np.where(closer, t, best)
        index = np.where(closer, k, index)

    out_of_range = best > max_range
    best[out_of_range] = np.inf
    index[out_of_range] = -1
    return best, index


def ray_cast(
    origin: ArrayLike,
    direction: ArrayLike,
    polys: Sequence[ConvexPolytope],
    max_range: float,
) -> tuple[float, int] | None:
    """
    单条射线投射

    Returns:
        (命中距离, 多边形索引)，量程内无命中时返回 None
    """
    dist, index = ray_cast_many(origin, np.asarray(direction, dtype=float)[None, :], polys, max_range)
    if index[0] < 0:
        return None
    return float(dist[0]), int(index[0])
