"""
实验模块单元测试

测试场景文件读写、错误定位、汇总表与绘图数据输出。
"""

import csv
import json
import textwrap

import numpy as np
import pytest

from occlusion_planner.config.planner import PlannerConfig
from occlusion_planner.dynamics.bicycle import Control, State
from occlusion_planner.experiment import (
    emit_occlusion_field,
    emit_plot_data,
    load_scenario,
    occlusion_field,
    parse_scenario,
    point_count_cdf,
    save_scenario,
    shipped_scenario,
)
from occlusion_planner.experiment.runner import (
    RunOutcome,
    format_number,
    summary_row,
    write_frame_log,
    write_summary,
)
from occlusion_planner.planners.base import PlannerKind
from occlusion_planner.simulator.metrics import FrameRecord, aggregate
from occlusion_planner.utils.exceptions import InvariantViolationError, PlotDataError, ScenarioParseError

VALID = textwrap.dedent(
    """\
    {
      "format_version": 1,
      "name": "mini",
      "robot_start": {"x_m": 0.0, "y_m": 0.0},
      "obstacles": [
        {"name": "wall", "vertices_m": [[9, -1], [11, -1], [11, 1], [9, 1]]}
      ],
      "target": {
        "vertices_m": [[18, -1], [22, -1], [22, 1], [18, 1]],
        "belief_mean_m": [20, 0]
      }
    }
    """
)


def frames(points: list[int]) -> list[FrameRecord]:
    return [
        FrameRecord(
            frame=i,
            time=0.3 * i,
            robot=State(float(i), 0.0, 0.0),
            control=Control(1.0, 0.0),
            target_points=p,
            detectable=p >= 10,
            occl_estimate=0.25,
            min_clearance=2.0,
            solve_time=0.0,
        )
        for i, p in enumerate(points)
    ]


class TestShippedScenarios:
    """内置场景测试类"""

    def test_canonical(self, canonical_scenario):
        """测试典型场景结构"""
        assert canonical_scenario.name == "canonical"
        assert len(canonical_scenario.obstacles) == 6
        assert canonical_scenario.jitter == 2.0
        np.testing.assert_allclose(canonical_scenario.target_belief.mean, [55.0, 0.0])

    @pytest.mark.parametrize("name", ["canonical", "narrow_gap", "free_space"])
    def test_all_shipped_load(self, name):
        """测试全部内置场景可加载"""
        scenario = load_scenario(shipped_scenario(name))
        assert scenario.name == name

    def test_unknown_shipped(self):
        """测试未知内置场景名"""
        with pytest.raises(ScenarioParseError):
            shipped_scenario("does_not_exist")


class TestParseScenario:
    """场景解析测试类"""

    def test_valid(self):
        """测试合法场景"""
        scenario = parse_scenario(VALID)
        assert scenario.obstacle_names == ("wall",)
        assert scenario.lidar.ray_count == 360
        assert scenario.robot_start == State(0.0, 0.0, 0.0)

    def test_json_syntax_error_line(self):
        """测试JSON语法错误定位到行号"""
        broken = VALID.replace('"name": "mini",', '"name": "mini"')
        with pytest.raises(ScenarioParseError) as exc_info:
            parse_scenario(broken, "broken.json")
        assert exc_info.value.line == 4
        assert "broken.json:4" in exc_info.value.message

    def test_missing_field_line(self):
        """测试缺少字段定位到所在对象"""
        text = VALID.replace('"belief_mean_m": [20, 0]', '"belief_mean": [20, 0]')
        with pytest.raises(ScenarioParseError) as exc_info:
            parse_scenario(text)
        assert exc_info.value.line is not None
        assert exc_info.value.line >= 8

    def test_degenerate_obstacle(self):
        """测试退化障碍物（两个顶点）"""
        text = VALID.replace("[[9, -1], [11, -1], [11, 1], [9, 1]]", "[[9, -1], [11, 1]]")
        with pytest.raises(InvariantViolationError) as exc_info:
            parse_scenario(text)
        assert exc_info.value.entity == "obstacles[0] (wall)"
        assert exc_info.value.line == 6

    def test_collinear_obstacle(self):
        """测试共线障碍物"""
        text = VALID.replace("[[9, -1], [11, -1], [11, 1], [9, 1]]", "[[9, 0], [10, 0], [11, 0]]")
        with pytest.raises(InvariantViolationError):
            parse_scenario(text)

    def test_start_too_close(self):
        """测试初始位姿距障碍物不足 d0"""
        text = VALID.replace('"x_m": 0.0', '"x_m": 4.5')
        with pytest.raises(InvariantViolationError) as exc_info:
            parse_scenario(text)
        assert exc_info.value.entity == "robot_start"
        assert exc_info.value.line == 4

    def test_bad_covariance(self):
        """测试非正定协方差"""
        text = VALID.replace('"belief_mean_m": [20, 0]', '"belief_mean_m": [20, 0], "belief_covariance_m2": [[1, 2], [2, 1]]')
        with pytest.raises(InvariantViolationError):
            parse_scenario(text)

    def test_unknown_field(self):
        """测试未知字段"""
        text = VALID.replace('"name": "mini",', '"name": "mini", "colour": "red",')
        with pytest.raises(ScenarioParseError, match="colour"):
            parse_scenario(text)

    def test_wrong_format_version(self):
        """测试不支持的格式版本"""
        with pytest.raises(ScenarioParseError, match="format_version"):
            parse_scenario(VALID.replace('"format_version": 1', '"format_version": 2'))

    def test_missing_file(self, tmp_path):
        """测试文件不存在"""
        with pytest.raises(ScenarioParseError, match="不存在"):
            load_scenario(tmp_path / "none.json")

    def test_save_and_reload(self, tmp_path, canonical_scenario):
        """测试写出后重新读取结构一致"""
        path = save_scenario(canonical_scenario, tmp_path / "copy.json")
        reloaded = load_scenario(path)
        assert reloaded.name == canonical_scenario.name
        assert reloaded.obstacle_names == canonical_scenario.obstacle_names
        for a, b in zip(reloaded.obstacles, canonical_scenario.obstacles, strict=True):
            np.testing.assert_allclose(a.vertices, b.vertices)
        np.testing.assert_allclose(reloaded.target_belief.covariance, canonical_scenario.target_belief.covariance)
        assert reloaded.jitter == canonical_scenario.jitter
        assert json.loads(path.read_text(encoding="utf-8"))["format_version"] == 1


class TestSummary:
    """汇总表测试类"""

    def test_format_number(self):
        """测试数值文本"""
        assert format_number(0.1) == "0.10000000000000001"
        assert format_number(float("inf")) == "null"
        assert format_number(float("nan")) == "null"
        assert format_number(3) == "3"
        assert format_number(True) == "true"
        assert format_number("optimal") == '"optimal"'

    def test_frame_log_digits(self, tmp_path, canonical_scenario):
        """测试帧日志中的浮点数带 17 位有效数字"""
        outcome = RunOutcome(planner=PlannerKind.CROA, seed=0, records=frames([0, 12]))
        path = tmp_path / "croa_seed0.jsonl"
        write_frame_log(path, canonical_scenario, outcome)

        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 3
        assert '"time": 0.29999999999999999' in lines[2]
        assert '"occl_estimate": 0.25' in lines[2]
        record = json.loads(lines[2])
        assert record["time"] == 0.3
        assert record["detectable"] is True
        assert record["target_points"] == 12


    def test_summary_rows(self, tmp_path):
        """测试成功与失败行"""
        ok = RunOutcome(planner=PlannerKind.CROA, seed=0, metrics=aggregate(frames([0, 12])), records=frames([0, 12]))
        failed = RunOutcome(planner=PlannerKind.OMPC, seed=1, error="SolverFailureError")
        path = tmp_path / "summary.csv"
        write_summary(path, [summary_row(ok), summary_row(failed)])

        with path.open(encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert rows[0]["planner"] == "croa"
        assert rows[0]["status"] == "ok"
        assert float(rows[0]["occlusion_ratio"]) == 0.5
        assert rows[0]["time_to_target_s"] == ""
        assert rows[1]["status"] == "SolverFailureError"
        assert rows[1]["occlusion_ratio"] == ""
        assert rows[0]["format_version"] == "1"


class TestPlotData:
    """绘图数据测试类"""

    def test_cdf(self):
        """测试累积分布单调且末项为 1"""
        cdf = point_count_cdf([0, 0, 10, 20, 10])
        assert [v for v, _ in cdf] == [0, 10, 20]
        fractions = [f for _, f in cdf]
        assert fractions == sorted(fractions)
        assert fractions[-1] == pytest.approx(1.0)
        assert fractions[0] == pytest.approx(0.4)

    def test_emit_files(self, tmp_path):
        """测试写出三类文件且首行为格式版本"""
        paths = emit_plot_data(frames([0, 5, 12]), tmp_path, "croa_seed0")
        assert set(paths) == {"cdf", "timeline", "trajectory"}
        for path in paths.values():
            lines = path.read_text(encoding="utf-8").splitlines()
            assert lines[0] == "# format_version=1"
        timeline = paths["timeline"].read_text(encoding="utf-8").splitlines()
        assert timeline[1] == "frame,time_s,target_points,detectable"
        assert len(timeline) == 2 + 3

    def test_empty_records(self, tmp_path):
        """测试空记录"""
        with pytest.raises(PlotDataError):
            emit_plot_data([], tmp_path, "empty")

    def test_occlusion_field(self, tmp_path):
        """测试遮挡概率场：障碍物内部为 nan，后方概率高于侧方"""
        scenario = parse_scenario(VALID)
        cfg = PlannerConfig(samples=200)
        xs = np.array([0.0, 10.0])
        ys = np.array([-8.0, 0.0])
        field = occlusion_field(scenario, cfg, xs, ys)
        assert field.shape == (2, 2)
        assert np.isnan(field[1, 1])
        assert field[1, 0] > field[0, 0]
        path = emit_occlusion_field(field, xs, ys, tmp_path / "field.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[1] == "x_m,y_m,occlusion_probability"
        assert len(lines) == 2 + 4
