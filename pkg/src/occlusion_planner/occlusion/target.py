"""
目标分布模块

定义高斯不确定目标及其加权蒙特卡洛样本集。
"""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.stats import multivariate_normal

from occlusion_planner.utils.exceptions import NotPositiveDefiniteError
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)

SYMMETRY_TOL = 1e-12


class WeightMode(StrEnum):
    """
    样本权重模式

    DENSITY: 权重正比于样本处的概率密度
    UNIFORM: 等权重 1/M
    """

    DENSITY = "density"
    UNIFORM = "uniform"


@dataclass(frozen=True, eq=False)
class GaussianTarget:
    """
    高斯目标位置分布 z ~ N(μ, Σ)

    Attributes:
        mean: 均值 μ
        covariance: 2×2 协方差矩阵 Σ
    """

    mean: NDArray[np.float64]
    covariance: NDArray[np.float64]

    @classmethod
    def create(cls, mean: ArrayLike, covariance: ArrayLike) -> "GaussianTarget":
        """构造并校验对称性与半正定性"""
        mu = np.asarray(mean, dtype=float).reshape(2)
        cov = np.asarray(covariance, dtype=float).reshape(2, 2)
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL:
            raise NotPositiveDefiniteError("协方差矩阵不对称")
        if np.min(np.linalg.eigvalsh(cov)) < 0:
            raise NotPositiveDefiniteError("协方差矩阵存在负特征值")
        return cls(mean=mu, covariance=cov)

    def cholesky(self) -> NDArray[np.float64]:
        """协方差的下三角Cholesky因子"""
        try:
            return np.linalg.cholesky(self.covariance)
        except np.linalg.LinAlgError as e:
            raise NotPositiveDefiniteError(f"协方差矩阵Cholesky分解失败: {e}") from e


@dataclass(frozen=True, eq=False)
class SampleSet:
    """
    加权蒙特卡洛样本集

    Attributes:
        samples: 样本位置 gᵢ，形状 (M, 2)
        weights: 归一化权重 Qᵢ，形状 (M,)
        seed: 随机种子
    """

    samples: NDArray[np.float64]
    weights: NDArray[np.float64]
    seed: int

    def __len__(self) -> int:
        return int(self.samples.shape[0])


def draw_samples(
    target: GaussianTarget,
    M: int,
    seed: int,
    weight_mode: WeightMode | str = WeightMode.DENSITY,
) -> SampleSet:
    """
    从目标分布中抽取 M 个样本并计算权重

    样本由固定种子的标准正态序列经Cholesky因子变换得到，顺序生成，
    与下游并行方式无关。DENSITY 模式下权重正比于各样本自身的概率密度，
    使用对数密度减去最大值后再取指数，避免下溢。

    Args:
        target: 高斯目标
        M: 样本数
        seed: 随机种子
        weight_mode: 权重模式

    Returns:
        SampleSet: 样本集

    Raises:
        NotPositiveDefiniteError: 协方差非正定
    """
    if M < 1:
        raise ValueError(f"样本数必须为正整数，实际为 {M}")

    L = target.cholesky()
    rng = np.random.default_rng(seed)
    standard = rng.standard_normal((M, 2))
    samples = target.mean + standard @ L.T

    if WeightMode(weight_mode) is WeightMode.UNIFORM:
        weights = np.full(M, 1.0 / M)
    else:
        log_density = multivariate_normal.logpdf(samples, mean=target.mean, cov=target.covariance)
        log_density = np.atleast_1d(log_density)
        raw = np.exp(log_density - log_density.max())
        weights = raw / raw.sum()

    logger.debug(f"抽取目标样本 M={M}, seed={seed}, 权重模式={WeightMode(weight_mode).value}")
    return SampleSet(samples=samples, weights=weights, seed=seed)
