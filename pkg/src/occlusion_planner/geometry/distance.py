"""
距离计算模块

提供凸多边形之间的精确最小距离以及点到视线的垂直距离。
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from occlusion_planner.geometry.polytope import GEOM_TOL, ConvexPolytope
from occlusion_planner.utils.exceptions import DegenerateLineError


def _cross2(a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def point_segment_distances(
    points: NDArray[np.float64],
    starts: NDArray[np.float64],
    ends: NDArray[np.float64],
) -> NDArray[np.float64]:
    """
    计算每个点到每条线段的距离

    Args:
        points: 形状 (n, 2)
        starts: 线段起点，形状 (m, 2)
        ends: 线段终点，形状 (m, 2)

    Returns:
        距离矩阵，形状 (n, m)
    """
    d = ends - starts
    length_sq = np.einsum("ij,ij->i", d, d)
    rel = points[:, None, :] - starts[None, :, :]
    t = np.einsum("nmj,mj->nm", rel, d) / np.where(length_sq > 0, length_sq, 1.0)
    t = np.clip(t, 0.0, 1.0)
    closest = starts[None, :, :] + t[..., None] * d[None, :, :]
    return np.linalg.norm(points[:, None, :] - closest, axis=2)


def _segments_cross(
    a0: NDArray[np.float64],
    a1: NDArray[np.float64],
    b0: NDArray[np.float64],
    b1: NDArray[np.float64],
) -> bool:
    """判断两组线段中是否存在严格相交的一对"""
    da = (a1 - a0)[:, None, :]
    db = (b1 - b0)[None, :, :]
    o1 = _cross2(da, b0[None, :, :] - a0[:, None, :])
    o2 = _cross2(da, b1[None, :, :] - a0[:, None, :])
    o3 = _cross2(db, a0[:, None, :] - b0[None, :, :])
    o4 = _cross2(db, a1[:, None, :] - b0[None, :, :])
    return bool(np.any((o1 * o2 < 0) & (o3 * o4 < 0)))


def exact_distance(a: ConvexPolytope, b: ConvexPolytope) -> float:
    """
    两个凸多边形之间的欧氏最小距离

    暴力枚举所有顶点-边组合，并先做相交检测；相交时返回0。
    """
    if np.any(np.all(a.vertices @ b.A.T <= b.b + GEOM_TOL, axis=1)):
        return 0.0
    if np.any(np.all(b.vertices @ a.A.T <= a.b + GEOM_TOL, axis=1)):
        return 0.0

    a0, a1 = a.edges()
    b0, b1 = b.edges()
    if _segments_cross(a0, a1, b0, b1):
        return 0.0

    d_ab = point_segment_distances(a.vertices, b0, b1).min()
    d_ba = point_segment_distances(b.vertices, a0, a1).min()
    return float(min(d_ab, d_ba))


def point_to_sight_line_distance(p: ArrayLike, z: ArrayLike, o: ArrayLike) -> float:
    """
    点 p 到过 z、o 两点的直线的垂直距离

    采用 |(o−z)⊥·(p−z)| / ‖o−z‖ 形式，竖直视线处无奇异。

    Raises:
        DegenerateLineError: z 与 o 间距小于 1e-9
    """
    p_ = np.asarray(p, dtype=float)
    z_ = np.asarray(z, dtype=float)
    o_ = np.asarray(o, dtype=float)
    d = o_ - z_
    norm = float(np.hypot(d[0], d[1]))
    if norm < GEOM_TOL:
        raise DegenerateLineError(norm)
    rel = p_ - z_
    return float(abs(d[0] * rel[1] - d[1] * rel[0]) / norm)
