"""
凸-凹代理约束模块

遮挡约束写作 Φ(p, ξ) + Θ(p) ≤ 0，其中 Φ = R²‖p−g‖²/ξ 为凸的透视函数，
Θ = −‖o−g‖²·dist²(p, g, o) 为凹函数。凸-凹过程在展开点处用 Θ 的切线
Θ̂ 替代 Θ，得到 Θ 的仿射上界，从而得到内凸近似。
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from occlusion_planner.geometry.polytope import OcclusionGeom
from occlusion_planner.occlusion.target import SampleSet

SCALE_FLOOR = 1e-9


def _cross(a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def theta(p: ArrayLike, g: ArrayLike, geom: OcclusionGeom) -> float:
    """
    凹项 Θ = −‖o−g‖²·dist²(p, g, o)

    等价于 −((o−g) × (p−g))²，在 p 上为负半定二次函数。
    """
    p_ = np.asarray(p, dtype=float)
    g_ = np.asarray(g, dtype=float)
    return float(-(_cross(geom.center - g_, p_ - g_) ** 2))


def theta_gradient(p: ArrayLike, g: ArrayLike, geom: OcclusionGeom) -> NDArray[np.float64]:
    """
    Θ 关于 p 的梯度 −2‖o−g‖²·c·a

    其中 a = (o−g)⊥/‖o−g‖，c = aᵀ(p−g)。
    """
    p_ = np.asarray(p, dtype=float)
    g_ = np.asarray(g, dtype=float)
    d = geom.center - g_
    perp = np.array([-d[1], d[0]])
    # ‖d‖²·c·a = (perpᵀ(p−g))·perp
    return -2.0 * float(np.dot(perp, p_ - g_)) * perp


def theta_linearized(
    expansion_p: ArrayLike,
    g: ArrayLike,
    geom: OcclusionGeom,
) -> tuple[NDArray[np.float64], float]:
    """
    Θ 在展开点处的切线 Θ̂(p) = ∇Θ(p*)ᵀ(p − p*) + Θ(p*)

    Returns:
        (梯度, 偏移)，使 Θ̂(p) = 梯度ᵀp + 偏移
    """
    p_star = np.asarray(expansion_p, dtype=float)
    grad = theta_gradient(p_star, g, geom)
    offset = theta(p_star, g, geom) - float(np.dot(grad, p_star))
    return grad, offset


@dataclass(frozen=True, eq=False)
class SurrogateConstraint:
    """
    单个 (样本i, 障碍物k) 的代理约束 Φ(p, ξ) + Θ̂(p) ≤ 0

    Attributes:
        sample_index: 样本索引 i
        obstacle_index: 障碍物索引 k
        radius: 遮挡半径 R_k
        sample: 样本位置 gᵢ
        gradient: Θ̂ 的梯度
        offset: Θ̂ 的常数项
        scale: 归一化常数 R_k²‖p*−gᵢ‖²
        gated: 展开点处障碍物是否位于机器人与样本之间
    """

    sample_index: int
    obstacle_index: int
    radius: float
    sample: NDArray[np.float64]
    gradient: NDArray[np.float64]
    offset: float
    scale: float
    gated: bool

    def theta_hat(self, p: ArrayLike) -> float:
        """切线 Θ̂(p)"""
        return float(np.dot(self.gradient, np.asarray(p, dtype=float))) + self.offset

    def phi(self, p: ArrayLike, xi: float) -> float:
        """透视函数 Φ(p, ξ) = R²‖p−g‖²/ξ"""
        diff = np.asarray(p, dtype=float) - self.sample
        return self.radius**2 * float(np.dot(diff, diff)) / xi

    def value(self, p: ArrayLike, xi: float) -> float:
        """约束左端 Φ + Θ̂，非正即满足"""
        return self.phi(p, xi) + self.theta_hat(p)

    def cone_satisfied(self, p: ArrayLike, xi: float, tol: float = 1e-9) -> bool:
        """旋转二阶锥形式 R²‖p−g‖² ≤ ξ·(−Θ̂)，且 −Θ̂ ≥ 0"""
        neg_theta = -self.theta_hat(p)
        diff = np.asarray(p, dtype=float) - self.sample
        lhs = self.radius**2 * float(np.dot(diff, diff))
        return neg_theta >= -tol and lhs <= xi * neg_theta + tol


@dataclass(frozen=True, eq=False)
class SurrogateBatch:
    """
    向量化的代理约束集合，按 (i, k) 的行优先顺序排列

    Attributes:
        sample_index: 形状 (n,)
        obstacle_index: 形状 (n,)
        radius: 形状 (n,)
        sample: 形状 (n, 2)
        gradient: 形状 (n, 2)
        offset: 形状 (n,)
        scale: 形状 (n,)
        gated: 形状 (n,)
        sample_count: 样本数 M
    """

    sample_index: NDArray[np.int64]
    obstacle_index: NDArray[np.int64]
    radius: NDArray[np.float64]
    sample: NDArray[np.float64]
    gradient: NDArray[np.float64]
    offset: NDArray[np.float64]
    scale: NDArray[np.float64]
    gated: NDArray[np.bool_]
    sample_count: int

    def __len__(self) -> int:
        return int(self.offset.shape[0])

    def active(self) -> "SurrogateBatch":
        """仅保留通过位于两者之间判据的约束"""
        keep = self.gated
        return SurrogateBatch(
            sample_index=self.sample_index[keep],
            obstacle_index=self.obstacle_index[keep],
            radius=self.radius[keep],
            sample=self.sample[keep],
            gradient=self.gradient[keep],
            offset=self.offset[keep],
            scale=self.scale[keep],
            gated=self.gated[keep],
            sample_count=self.sample_count,
        )

    def normalized_violation(self, p: ArrayLike, xi: NDArray[np.float64]) -> NDArray[np.float64]:
        """各约束的 (Φ + Θ̂)/scale，xi 按样本索引取值"""
        p_ = np.asarray(p, dtype=float)
        diff = p_[None, :] - self.sample
        phi = self.radius**2 * np.einsum("ij,ij->i", diff, diff) / xi[self.sample_index]
        theta_hat = self.gradient @ p_ + self.offset
        return (phi + theta_hat) / self.scale

    def to_constraints(self) -> list[SurrogateConstraint]:
        """展开为逐个约束对象"""
        return [
            SurrogateConstraint(
                sample_index=int(self.sample_index[j]),
                obstacle_index=int(self.obstacle_index[j]),
                radius=float(self.radius[j]),
                sample=self.sample[j],
                gradient=self.gradient[j],
                offset=float(self.offset[j]),
                scale=float(self.scale[j]),
                gated=bool(self.gated[j]),
            )
            for j in range(len(self))
        ]


def build_surrogate_batch(
    expansion_p: ArrayLike,
    samples: SampleSet,
    geoms: Sequence[OcclusionGeom],
) -> SurrogateBatch:
    """向量化构造全部 M×K 个代理约束"""
    p_star = np.asarray(expansion_p, dtype=float)
    M, K = len(samples), len(geoms)
    if K == 0:
        empty = np.zeros(0)
        return SurrogateBatch(
            sample_index=np.zeros(0, dtype=np.int64),
            obstacle_index=np.zeros(0, dtype=np.int64),
            radius=empty,
            sample=np.zeros((0, 2)),
            gradient=np.zeros((0, 2)),
            offset=empty,
            scale=empty,
            gated=np.zeros(0, dtype=bool),
            sample_count=M,
        )

    centers = np.array([geom.center for geom in geoms])
    radii = np.array([geom.radius for geom in geoms])
    ii, kk = np.meshgrid(np.arange(M), np.arange(K), indexing="ij")
    ii, kk = ii.ravel(), kk.ravel()

    g = samples.samples[ii]
    o = centers[kk]
    R = radii[kk]
    d = o - g
    perp = np.column_stack([-d[:, 1], d[:, 0]])
    rel = p_star[None, :] - g
    c = np.einsum("ij,ij->i", perp, rel)
    grad = -2.0 * c[:, None] * perp
    theta_star = -(c**2)
    offset = theta_star - grad @ p_star

    scale = np.maximum(R**2 * np.einsum("ij,ij->i", rel, rel), SCALE_FLOOR)

    seg = g - p_star[None, :]
    seg_sq = np.einsum("ij,ij->i", seg, seg)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.einsum("ij,ij->i", o - p_star[None, :], seg) / seg_sq
    gated = (t > 0.0) & (t < 1.0)

    return SurrogateBatch(
        sample_index=ii.astype(np.int64),
        obstacle_index=kk.astype(np.int64),
        radius=R,
        sample=g,
        gradient=grad,
        offset=offset,
        scale=scale,
        gated=gated,
        sample_count=M,
    )


def build_occlusion_constraints(
    expansion_p: ArrayLike,
    samples: SampleSet,
    geoms: Sequence[OcclusionGeom],
) -> list[SurrogateConstraint]:
    """
    在展开点处构造 M×K 个代理约束

    每个样本另有松弛耦合 wᵢ ≥ ξᵢ − 1、wᵢ ≥ 0，由轨迹子问题统一施加。
    无障碍物时返回空列表。
    """
    return build_surrogate_batch(expansion_p, samples, geoms).to_constraints()
