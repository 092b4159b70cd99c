"""
遮挡模块单元测试

测试目标采样、遮挡判据、遮挡概率估计与凸-凹代理约束。
"""

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from occlusion_planner.geometry.distance import point_to_sight_line_distance
from occlusion_planner.geometry.polytope import OcclusionGeom
from occlusion_planner.occlusion.surrogate import (
    build_occlusion_constraints,
    build_surrogate_batch,
    theta,
    theta_gradient,
    theta_linearized,
)
from occlusion_planner.occlusion.target import GaussianTarget, SampleSet, WeightMode, draw_samples
from occlusion_planner.occlusion.visibility import (
    occluded,
    occlusion_mask,
    occlusion_probability,
    xi_tight,
)
from occlusion_planner.utils.exceptions import (
    DegenerateGeometryError,
    NotPositiveDefiniteError,
    OnSightLineError,
)


@pytest.fixture
def geom():
    """(10, 0) 处半径 1 的遮挡圆"""
    return OcclusionGeom(center=np.array([10.0, 0.0]), radius=1.0)


def single(point) -> SampleSet:
    return SampleSet(samples=np.array([point], dtype=float), weights=np.ones(1), seed=0)


def grid_occlusion_probability(target: GaussianTarget, p, geom: OcclusionGeom, step: float = 0.01) -> float:
    """目标概率密度乘遮挡指示函数，在 [−5, 5]² 上按网格中点求和"""
    n = int(round(10.0 / step))
    ticks = np.linspace(-5.0 + step / 2, 5.0 - step / 2, n)
    xx, yy = np.meshgrid(ticks, ticks, indexing="ij")
    points = np.column_stack([xx.ravel(), yy.ravel()])
    hidden = occlusion_mask(p, points, geom.center[None, :], np.array([geom.radius]))[:, 0]
    density = multivariate_normal.pdf(points, mean=target.mean, cov=target.covariance)
    return float(np.sum(density[hidden]) * step**2)


class TestGaussianTarget:
    """高斯目标测试类"""

    def test_asymmetric_rejected(self):
        """测试非对称协方差"""
        with pytest.raises(NotPositiveDefiniteError):
            GaussianTarget.create([0, 0], [[1.0, 0.5], [0.0, 1.0]])

    def test_negative_eigenvalue_rejected(self):
        """测试负特征值"""
        with pytest.raises(NotPositiveDefiniteError):
            GaussianTarget.create([0, 0], [[1.0, 2.0], [2.0, 1.0]])

    def test_singular_covariance_fails_on_sampling(self):
        """测试奇异协方差在采样时报错"""
        target = GaussianTarget.create([0, 0], np.zeros((2, 2)))
        with pytest.raises(NotPositiveDefiniteError):
            draw_samples(target, 10, seed=0)


class TestDrawSamples:
    """目标采样测试类"""

    def test_same_seed_same_samples(self, target):
        """测试相同种子得到相同样本"""
        a = draw_samples(target, 50, seed=3)
        b = draw_samples(target, 50, seed=3)
        np.testing.assert_array_equal(a.samples, b.samples)
        np.testing.assert_array_equal(a.weights, b.weights)

    def test_different_seed_different_samples(self, target):
        """测试不同种子"""
        a = draw_samples(target, 50, seed=3)
        b = draw_samples(target, 50, seed=4)
        assert not np.allclose(a.samples, b.samples)

    @pytest.mark.parametrize("mode", list(WeightMode))
    def test_weights_normalized(self, target, mode):
        """测试权重非负且和为 1"""
        s = draw_samples(target, 200, seed=0, weight_mode=mode)
        assert len(s) == 200
        assert np.all(s.weights >= 0)
        assert s.weights.sum() == pytest.approx(1.0)

    def test_density_weights_favor_mean(self, target):
        """测试密度权重下靠近均值的样本权重更大"""
        s = draw_samples(target, 200, seed=1, weight_mode=WeightMode.DENSITY)
        dist = np.linalg.norm(s.samples - target.mean, axis=1)
        assert s.weights[np.argmin(dist)] == s.weights.max()

    def test_sample_moments(self):
        """测试样本均值与协方差"""
        target = GaussianTarget.create([3.0, -1.0], [[4.0, 1.0], [1.0, 2.0]])
        s = draw_samples(target, 20000, seed=7)
        np.testing.assert_allclose(s.samples.mean(axis=0), target.mean, atol=0.1)
        np.testing.assert_allclose(np.cov(s.samples.T), target.covariance, atol=0.2)

    def test_zero_samples_rejected(self, target):
        """测试样本数为零"""
        with pytest.raises(ValueError):
            draw_samples(target, 0, seed=0)


class TestOccluded:
    """遮挡判据测试类"""

    def test_obstacle_on_line_occludes(self, geom):
        """测试障碍物位于视线正中"""
        assert occluded([0, 0], [20, 0], geom)

    def test_far_from_line_visible(self, geom):
        """测试障碍物远离视线"""
        assert not occluded([0, 10], [20, 10], geom)

    def test_obstacle_behind_robot_not_occluding(self, geom):
        """测试障碍物位于机器人后方"""
        assert not occluded([15, 0], [25, 0], geom)

    def test_obstacle_behind_target_not_occluding(self, geom):
        """测试障碍物位于目标后方"""
        assert not occluded([0, 0], [5, 0], geom)

    def test_matches_disc_line_intersection(self, geom):
        """测试与“视线是否与圆盘相交”一致（障碍物位于两者之间时）"""
        rng = np.random.default_rng(0)
        z = np.array([20.0, 0.0])
        for _ in range(200):
            p = np.array([rng.uniform(-5, 5), rng.uniform(-6, 6)])
            direction = (z - p) / np.linalg.norm(z - p)
            rel = geom.center - p
            perp_dist = abs(direction[0] * rel[1] - direction[1] * rel[0])
            assert occluded(p, z, geom) == (perp_dist <= geom.radius)

    def test_degenerate_target_on_center(self, geom):
        """测试目标与障碍物中心重合"""
        with pytest.raises(DegenerateGeometryError):
            occluded([0, 0], geom.center, geom)

    def test_degenerate_robot_on_target(self, geom):
        """测试机器人与目标重合"""
        with pytest.raises(DegenerateGeometryError):
            occluded([20, 0], [20, 0], geom)


class TestOcclusionProbability:
    """遮挡概率测试类"""

    def test_no_obstacles(self, target):
        """测试无障碍物时概率为零"""
        samples = draw_samples(target, 100, seed=0)
        assert occlusion_probability([0, 0], samples, []) == 0.0

    def test_bounded(self, target, geom):
        """测试概率位于 [0, 1]"""
        samples = draw_samples(target, 300, seed=0)
        value = occlusion_probability([0, 0], samples, [geom])
        assert 0.0 <= value <= 1.0
        assert value > 0.5

    def test_vectorized_matches_scalar(self, target, geom):
        """测试向量化判据与逐个判据一致"""
        samples = draw_samples(target, 100, seed=2)
        other = OcclusionGeom(center=np.array([12.0, 3.0]), radius=1.5)
        mask = occlusion_mask(
            [0.5, 0.5],
            samples.samples,
            np.array([geom.center, other.center]),
            np.array([geom.radius, other.radius]),
        )
        for i, z in enumerate(samples.samples):
            assert mask[i, 0] == occluded([0.5, 0.5], z, geom)
            assert mask[i, 1] == occluded([0.5, 0.5], z, other)

    @pytest.mark.parametrize(
        "covariance, center, radius",
        [
            ([[1.0, 0.0], [0.0, 1.0]], [5.0, 0.0], 1.0),
            ([[1.0, 0.0], [0.0, 0.25]], [5.0, 0.0], 0.5),
            ([[1.0, 0.0], [0.0, 1.0]], [5.0, 1.5], 1.0),
        ],
    )
    @pytest.mark.parametrize("mode", [WeightMode.DENSITY, WeightMode.UNIFORM])
    def test_matches_grid_integration(self, covariance, center, radius, mode):
        """测试估计值与网格数值积分一致，且与权重模式无关"""
        target = GaussianTarget.create([0.0, 0.0], covariance)
        geom = OcclusionGeom(center=np.array(center), radius=radius)
        p = np.array([10.0, 0.0])
        samples = draw_samples(target, 2000, seed=0, weight_mode=mode)

        expected = grid_occlusion_probability(target, p, geom)
        assert occlusion_probability(p, samples, [geom]) == pytest.approx(expected, abs=0.03)

    def test_canonical_grid_value(self):
        """测试标准算例的网格积分值"""
        target = GaussianTarget.create([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]])
        geom = OcclusionGeom(center=np.array([5.0, 0.0]), radius=1.0)
        assert grid_occlusion_probability(target, np.array([10.0, 0.0]), geom) == pytest.approx(0.9545, abs=5e-3)

    def test_monotone_in_radius(self, target):
        """测试遮挡半径增大时概率不减"""
        samples = draw_samples(target, 500, seed=4)
        values = [
            occlusion_probability([0, 0], samples, [OcclusionGeom(center=np.array([10.0, 0.5]), radius=r)])
            for r in [0.0, 0.2, 0.5, 1.0, 2.0, 4.0]
        ]
        assert all(b >= a for a, b in zip(values, values[1:], strict=False))
        assert values[0] == 0.0


    def test_empty_samples_rejected(self, geom):
        """测试空样本集"""
        empty = SampleSet(samples=np.zeros((0, 2)), weights=np.zeros(0), seed=0)
        with pytest.raises(ValueError):
            occlusion_probability([0, 0], empty, [geom])


class TestXiTight:
    """紧松弛值测试类"""

    def test_at_least_one_iff_occluded(self, geom):
        """测试 ξ ≥ 1 与遮挡判据一致"""
        z = np.array([20.0, 0.0])
        for y in [0.1, 0.5, 0.9, 1.1, 2.0, 5.0]:
            p = np.array([0.0, y])
            assert (xi_tight(p, z, geom) >= 1.0) == occluded(p, z, geom)

    def test_closed_form(self, geom):
        """测试闭式值"""
        p, g = np.array([0.0, 2.0]), np.array([20.0, 0.0])
        # dist(p, g, o) = 2，‖o−g‖ = 10
        expected = 1.0 * float(np.dot(p - g, p - g)) / (100.0 * 4.0)
        assert xi_tight(p, g, geom) == pytest.approx(expected)

    def test_on_sight_line(self, geom):
        """测试机器人位于视线上"""
        with pytest.raises(OnSightLineError):
            xi_tight([0.0, 0.0], [20.0, 0.0], geom)


class TestSurrogate:
    """凸-凹代理约束测试类"""

    def test_theta_matches_definition(self, geom):
        """测试 Θ = −‖o−g‖²·dist²"""
        p, g = np.array([3.0, 2.0]), np.array([20.0, 1.0])
        dist = point_to_sight_line_distance(p, g, geom.center)
        og_sq = float(np.dot(geom.center - g, geom.center - g))
        assert theta(p, g, geom) == pytest.approx(-og_sq * dist**2)

    def test_gradient_matches_finite_difference(self, geom):
        """测试梯度与有限差分一致"""
        p, g = np.array([3.0, 2.0]), np.array([20.0, 1.0])
        eps = 1e-6
        fd = np.array(
            [
                (theta(p + eps * e, g, geom) - theta(p - eps * e, g, geom)) / (2 * eps)
                for e in np.eye(2)
            ]
        )
        np.testing.assert_allclose(theta_gradient(p, g, geom), fd, rtol=1e-6)

    def test_tangent_dominates_concave_term(self, geom):
        """测试切线处处不小于 Θ，且在展开点处相等"""
        p_star, g = np.array([2.0, 1.5]), np.array([20.0, 0.5])
        grad, offset = theta_linearized(p_star, g, geom)
        assert grad @ p_star + offset == pytest.approx(theta(p_star, g, geom))
        rng = np.random.default_rng(0)
        for p in rng.uniform(-10, 10, (100, 2)):
            assert grad @ p + offset >= theta(p, g, geom) - 1e-9

    def test_surrogate_feasible_implies_xi_bound(self, geom):
        """测试代理约束可行时 ξ 不小于紧松弛值"""
        p_star, g = np.array([0.0, 3.0]), np.array([20.0, 0.0])
        (con,) = build_occlusion_constraints(p_star, single(g), [geom])
        xi = xi_tight(p_star, g, geom)
        assert con.value(p_star, xi) == pytest.approx(0.0, abs=1e-6 * con.scale)
        assert con.value(p_star, 1.1 * xi) < 0
        assert con.cone_satisfied(p_star, 1.1 * xi)
        assert not con.cone_satisfied(p_star, 0.9 * xi)

    def test_batch_ordering_and_gating(self, geom):
        """测试批量约束的 (i, k) 顺序与位于两者之间判据"""
        behind = OcclusionGeom(center=np.array([-10.0, 0.0]), radius=1.0)
        samples = SampleSet(samples=np.array([[20.0, 0.5], [20.0, -0.5], [21.0, 0.0]]), weights=np.ones(3) / 3, seed=0)
        batch = build_surrogate_batch([0.0, 0.0], samples, [geom, behind])
        assert len(batch) == 6
        assert batch.sample_index.tolist() == [0, 0, 1, 1, 2, 2]
        assert batch.obstacle_index.tolist() == [0, 1, 0, 1, 0, 1]
        assert batch.gated.tolist() == [True, False, True, False, True, False]
        active = batch.active()
        assert len(active) == 3
        assert set(active.obstacle_index.tolist()) == {0}

    def test_batch_matches_scalar_constraints(self, target, geom):
        """测试向量化违反量与逐个约束一致"""
        samples = draw_samples(target, 20, seed=0)
        p_star = np.array([1.0, 1.0])
        batch = build_surrogate_batch(p_star, samples, [geom])
        xi = np.full(20, 2.0)
        p = np.array([1.5, 0.5])
        expected = [c.value(p, 2.0) / c.scale for c in batch.to_constraints()]
        np.testing.assert_allclose(batch.normalized_violation(p, xi), expected, rtol=1e-9)

    def test_no_obstacles_empty(self, target):
        """测试无障碍物时没有代理约束"""
        samples = draw_samples(target, 10, seed=0)
        assert build_occlusion_constraints([0, 0], samples, []) == []
