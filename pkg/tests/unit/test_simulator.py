"""
仿真模块单元测试

测试激光雷达感知、逐帧指标汇总与场景扰动/校验。
"""

from dataclasses import replace

import numpy as np
import pytest

from occlusion_planner.collision.dual import EgoShape
from occlusion_planner.dynamics.bicycle import Control, State
from occlusion_planner.geometry.polytope import polytope_from_vertices
from occlusion_planner.occlusion.target import GaussianTarget
from occlusion_planner.occlusion.visibility import occluded
from occlusion_planner.simulator import (
    FrameRecord,
    LidarConfig,
    Scenario,
    aggregate,
    beam_directions,
    scan,
    sense,
    top_fraction_mean,
)
from occlusion_planner.utils.exceptions import InvariantViolationError


def car(cx: float, cy: float):
    return polytope_from_vertices([(cx - 2.3, cy - 0.95), (cx + 2.3, cy - 0.95), (cx + 2.3, cy + 0.95), (cx - 2.3, cy + 0.95)])


def make_scenario(obstacles=(), target_x: float = 20.0, jitter: float = 0.0, robot=State(0, 0, 0)) -> Scenario:
    return Scenario(
        name="test",
        obstacles=tuple(obstacles),
        target_truth=car(target_x, 0.0),
        target_belief=GaussianTarget.create([target_x, 0.0], np.eye(2)),
        robot_start=robot,
        jitter=jitter,
    )


def record(frame: int, points: int, threshold: int = 10, clearance: float = 5.0) -> FrameRecord:
    return FrameRecord(
        frame=frame,
        time=0.3 * frame,
        robot=State(0, 0, 0),
        control=Control(1.0, 0.0),
        target_points=points,
        detectable=points >= threshold,
        occl_estimate=0.0,
        min_clearance=clearance,
        solve_time=0.01,
    )


class TestLidar:
    """激光雷达测试类"""

    def test_beam_directions(self):
        """测试射线方位角"""
        lidar = LidarConfig(ray_count=4, fov=2 * np.pi)
        dirs = beam_directions(0.0, lidar)
        np.testing.assert_allclose(dirs, [[-1, 0], [0, -1], [1, 0], [0, 1]], atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(beam_directions(0.7, LidarConfig()), axis=1), 1.0)

    def test_unobstructed_target_visible(self):
        """测试无遮挡时目标上有激光点"""
        assert sense(State(0, 0, 0), make_scenario()) > 0

    def test_fully_covered_target_invisible(self, make_box):
        """测试目标被完全挡住时点数为零"""
        scenario = make_scenario([make_box(10.0, 0.0, 1.0, 5.0)])
        assert sense(State(0, 0, 0), scenario) == 0

    def test_points_increase_when_closer(self):
        """测试距离越近点数越多"""
        scenario = make_scenario()
        far = sense(State(-15.0, 0, 0), scenario)
        near = sense(State(5.0, 0, 0), scenario)
        assert near > far > 0

    def test_out_of_range(self):
        """测试超出量程"""
        assert sense(State(-50.0, 0, 0), make_scenario()) == 0

    def test_scan_index_of_target(self, make_box):
        """测试目标车体的命中索引为 K"""
        scenario = make_scenario([make_box(0.0, 10.0, 1.0)])
        _, index = scan(State(0, 0, 0), scenario)
        assert set(index.tolist()) <= {-1, 0, 1}
        assert 1 in index.tolist()
        assert 0 in index.tolist()

    def test_half_covered_target(self, make_box):
        """测试目标被挡住上半部分时点数与角区间计算一致，约为无遮挡时的一半"""
        lidar = LidarConfig()
        angles = -np.pi + np.arange(lidar.ray_count) * 2 * np.pi / lidar.ray_count
        target_half = np.arctan2(0.95, 17.7)
        blocked = (np.arctan2(0.05, 11.0), np.arctan2(2.05, 9.0))
        on_target = np.abs(angles) <= target_half
        expected = int(np.count_nonzero(on_target & ~((angles >= blocked[0]) & (angles <= blocked[1]))))

        unobstructed = sense(State(0, 0, 0), make_scenario())
        covered = sense(State(0, 0, 0), make_scenario([make_box(10.0, 1.05, 1.0)]))
        assert unobstructed == int(np.count_nonzero(on_target))
        assert covered == expected
        assert abs(covered - unobstructed / 2) <= 1

    def test_removing_obstacle_never_reduces_points(self, canonical_scenario):
        """测试移除任一障碍物后点数不减少"""
        for x in (0.0, 10.0, 25.0, 40.0):
            for y in (-1.5, 6.0):
                robot = State(x, y, 0.0)
                full = sense(robot, canonical_scenario)
                for k in range(len(canonical_scenario.obstacles)):
                    rest = canonical_scenario.obstacles[:k] + canonical_scenario.obstacles[k + 1 :]
                    assert sense(robot, replace(canonical_scenario, obstacles=rest)) >= full

    def test_invisible_target_has_occluder(self, canonical_scenario):
        """测试目标在量程内却无激光点时，至少有一个障碍物对目标中心满足遮挡判据"""
        centroid = canonical_scenario.target_truth.centroid
        open_road = replace(canonical_scenario, obstacles=())
        checked = 0
        for x in np.arange(16.0, 34.0, 2.0):
            for y in (-1.0, 0.0, 1.0):
                robot = State(float(x), y, 0.0)
                if any(obs.contains(robot.position) for obs in canonical_scenario.obstacles):
                    continue
                if sense(robot, canonical_scenario) > 0 or sense(robot, open_road) < 3:
                    continue
                checked += 1
                assert any(occluded(robot.position, centroid, g) for g in canonical_scenario.geoms)
        assert checked >= 1


    def test_invalid_config(self):
        """测试非法激光雷达参数"""
        with pytest.raises(ValueError):
            LidarConfig(ray_count=0)
        with pytest.raises(ValueError):
            LidarConfig(fov=7.0)
        with pytest.raises(ValueError):
            LidarConfig(max_range=0.0)


class TestMetrics:
    """指标汇总测试类"""

    def test_occlusion_ratio_example(self):
        """测试点数序列 [0, 0, 10, 20] 的指标"""
        records = [record(i, p) for i, p in enumerate([0, 0, 10, 20])]
        m = aggregate(records, time_to_target=1.2)
        assert m.detectable_frames == 2
        assert m.total_frames == 4
        assert m.occlusion_ratio == pytest.approx(0.5)
        assert m.mean_points == pytest.approx(7.5)
        assert m.median_points == pytest.approx(5.0)
        assert m.top15_points == pytest.approx(20.0)
        assert m.point_count_series == [0, 0, 10, 20]
        assert m.time_to_target == 1.2

    def test_min_clearance_overall(self):
        """测试全程最小距离"""
        records = [record(0, 5, clearance=3.0), record(1, 5, clearance=1.5)]
        assert aggregate(records).min_clearance_overall == 1.5

    def test_top_fraction_mean(self):
        """测试最高比例帧的平均"""
        points = list(range(20))
        # ceil(0.15 × 20) = 3 帧: 19, 18, 17
        assert top_fraction_mean(points) == pytest.approx(18.0)
        assert top_fraction_mean([4]) == 4.0

    def test_empty_records(self):
        """测试空记录"""
        with pytest.raises(ValueError):
            aggregate([])

    def test_record_excludes_timing_by_default(self):
        """测试帧记录字典默认不含耗时"""
        data = record(0, 12).to_dict()
        assert "solve_time" not in data
        assert data["detectable"] is True
        assert record(0, 12).to_dict(include_timing=True)["solve_time"] == 0.01


class TestScenario:
    """场景测试类"""

    def test_validate_ok(self):
        """测试合法场景"""
        make_scenario().validate(1.0)

    def test_belief_far_from_truth(self):
        """测试目标估计远离真值"""
        scenario = Scenario(
            name="bad",
            obstacles=(),
            target_truth=car(20.0, 0.0),
            target_belief=GaussianTarget.create([40.0, 0.0], np.eye(2)),
            robot_start=State(0, 0, 0),
        )
        with pytest.raises(InvariantViolationError) as exc_info:
            scenario.validate(1.0)
        assert exc_info.value.entity == "target_belief"

    def test_start_too_close(self, make_box):
        """测试初始位姿距障碍物不足 d0"""
        scenario = make_scenario([make_box(5.0, 0.0, 1.0)])
        with pytest.raises(InvariantViolationError) as exc_info:
            scenario.validate(1.0)
        assert exc_info.value.entity == "robot_start"

    def test_perturbed_deterministic(self, make_box):
        """测试相同种子的扰动一致"""
        scenario = make_scenario([make_box(10.0, 5.0, 1.0)], jitter=2.0)
        a, b = scenario.perturbed(3), scenario.perturbed(3)
        np.testing.assert_array_equal(a.obstacles[0].vertices, b.obstacles[0].vertices)
        np.testing.assert_array_equal(a.target_belief.mean, b.target_belief.mean)

    def test_perturbed_bounded(self, make_box):
        """测试扰动幅度有界，且目标估计随真值平移"""
        scenario = make_scenario([make_box(10.0, 5.0, 1.0)], jitter=2.0)
        moved = scenario.perturbed(7)
        shift = moved.obstacles[0].centroid - scenario.obstacles[0].centroid
        assert np.all(np.abs(shift) <= 2.0)
        target_shift = moved.target_truth.centroid - scenario.target_truth.centroid
        np.testing.assert_allclose(moved.target_belief.mean - scenario.target_belief.mean, target_shift, atol=1e-12)
        assert moved.robot_start == scenario.robot_start

    def test_no_jitter_identity(self):
        """测试无扰动时返回原场景"""
        scenario = make_scenario()
        assert scenario.perturbed(5) is scenario

    def test_default_ego(self):
        """测试缺省车体"""
        assert isinstance(make_scenario().ego, EgoShape)
