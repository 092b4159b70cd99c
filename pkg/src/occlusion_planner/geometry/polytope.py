"""
凸多边形模块

提供二维凸多边形的半空间/顶点双重表示、位姿变换以及遮挡几何参数推导。
"""

from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import ConvexHull, QhullError

from occlusion_planner.utils.exceptions import DegenerateInputError

GEOM_TOL = 1e-9
AREA_TOL = 1e-12


def rotation_matrix(heading: float) -> NDArray[np.float64]:
    """二维旋转矩阵 R(θ)"""
    c, s = np.cos(heading), np.sin(heading)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class ConvexPolytope:
    """
    二维凸多边形

    同时保存半空间表示 {x : A x ≤ b} 和逆时针顶点表示。
    半空间法向量为单位向量，因此偏移量 b 具有米的量纲。

    Attributes:
        A: 半空间法向量矩阵，形状 (m, 2)
        b: 半空间偏移量，形状 (m,)
        vertices: 逆时针顶点，形状 (m, 2)，第i条边为 vertices[i] → vertices[i+1]
    """

    A: NDArray[np.float64]
    b: NDArray[np.float64]
    vertices: NDArray[np.float64]

    @property
    def face_count(self) -> int:
        """半空间个数"""
        return int(self.A.shape[0])

    @property
    def centroid(self) -> NDArray[np.float64]:
        """多边形面积质心"""
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        area = 0.5 * cross.sum()
        cx = ((v[:, 0] + w[:, 0]) * cross).sum() / (6.0 * area)
        cy = ((v[:, 1] + w[:, 1]) * cross).sum() / (6.0 * area)
        return np.array([cx, cy])

    @property
    def area(self) -> float:
        """多边形面积（鞋带公式）"""
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return float(0.5 * (v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]).sum())

    def contains(self, point: ArrayLike, tol: float = GEOM_TOL) -> bool:
        """判断点是否在多边形内（含边界）"""
        p = np.asarray(point, dtype=float)
        return bool(np.all(self.A @ p <= self.b + tol))

    def edges(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """返回所有边的起点和终点"""
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    def to_dict(self) -> dict[str, Any]:
        """转换为字典"""
        return {
            "vertices": self.vertices.tolist(),
            "normals": self.A.tolist(),
            "offsets": self.b.tolist(),
        }


def polytope_from_vertices(points: ArrayLike) -> ConvexPolytope:
    """
    由点集构造凸包多边形

    使用Qhull计算凸包，丢弃内部点，按逆时针顺序生成最小半空间表示。

    Args:
        points: 至少3个二维点

    Returns:
        ConvexPolytope: 凸包多边形

    Raises:
        DegenerateInputError: 点数不足、共线或凸包面积为零
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise DegenerateInputError(f"构造凸多边形至少需要3个二维点，实际输入形状 {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DegenerateInputError("顶点坐标必须为有限值")

    try:
        hull = ConvexHull(pts)
    except QhullError as e:
        raise DegenerateInputError(f"凸包计算失败，点集可能共线: {e}") from e

    # 二维情况下 hull.volume 即面积，hull.vertices 已按逆时针排列
    if hull.volume <= AREA_TOL:
        raise DegenerateInputError(f"凸包面积 {hull.volume:.3e} 过小")

    vertices = pts[hull.vertices]
    nxt = np.roll(vertices, -1, axis=0)
    edge = nxt - vertices
    normals = np.column_stack([edge[:, 1], -edge[:, 0]])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = np.einsum("ij,ij->i", normals, vertices)

    return ConvexPolytope(A=normals, b=offsets, vertices=vertices)


def transform(poly: ConvexPolytope, heading: float, translation: ArrayLike) -> ConvexPolytope:
    """
    刚体变换多边形：先旋转 heading，再平移 translation

    半空间变为 (A R(θ)ᵀ, b + A R(θ)ᵀ t)。
    """
    t = np.asarray(translation, dtype=float)
    R = rotation_matrix(heading)
    A_new = poly.A @ R.T
    return ConvexPolytope(
        A=A_new,
        b=poly.b + A_new @ t,
        vertices=poly.vertices @ R.T + t,
    )


def circumradius(poly: ConvexPolytope, center: ArrayLike) -> float:
    """中心到各顶点的最大距离"""
    c = np.asarray(center, dtype=float)
    return float(np.max(np.linalg.norm(poly.vertices - c, axis=1)))


def inradius(poly: ConvexPolytope, center: ArrayLike) -> float:
    """中心到各边所在直线的最小距离（中心需在多边形内）"""
    c = np.asarray(center, dtype=float)
    return float(np.min(poly.b - poly.A @ c))


@dataclass(frozen=True, eq=False)
class OcclusionGeom:
    """
    障碍物的遮挡几何参数

    Attributes:
        center: 障碍物中心 o_k
        radius: 遮挡半径 R_k
    """

    center: NDArray[np.float64]
    radius: float

    @classmethod
    def from_polytope(cls, poly: ConvexPolytope) -> "OcclusionGeom":
        """以质心为中心、外接半径为遮挡半径"""
        center = poly.centroid
        return cls(center=center, radius=circumradius(poly, center))
