"""
命令行单元测试

测试子命令的退出码与输出文件。
"""

import csv
import json

import pytest
from click.testing import CliRunner

from occlusion_planner.cli import EXIT_VALIDATION, main, parse_seeds, resolve_scenario
from occlusion_planner.experiment import shipped_scenario
from occlusion_planner.utils.exceptions import ConfigurationError


@pytest.fixture
def runner():
    return CliRunner()


class TestParseSeeds:
    """种子列表解析测试类"""

    @pytest.mark.parametrize(
        "value,expected",
        [
            ("0-2,5", [0, 1, 2, 5]),
            ("7", [7]),
            ("1, 4 ,7", [1, 4, 7]),
            ("3-3", [3]),
        ],
    )
    def test_valid(self, value, expected):
        """测试合法种子列表"""
        assert parse_seeds(value) == expected

    @pytest.mark.parametrize("value", ["", ",", "a", "1-b", "-3"])
    def test_invalid(self, value):
        """测试非法种子列表"""
        with pytest.raises(ConfigurationError):
            parse_seeds(value)

    def test_resolve_shipped_name(self):
        """测试按内置场景名查找"""
        assert resolve_scenario("canonical") == shipped_scenario("canonical")


class TestValidateCommand:
    """validate 子命令测试类"""

    def test_shipped_scenarios(self, runner):
        """测试内置场景全部通过"""
        result = runner.invoke(main, ["validate", "canonical", "narrow_gap", "free_space"])
        assert result.exit_code == 0
        assert "✓ canonical: canonical, 6 个障碍物" in result.output

    def test_bad_file(self, runner, tmp_path):
        """测试非法场景文件返回 2"""
        bad = tmp_path / "bad.json"
        bad.write_text('{"format_version": 1,\n "name": }', encoding="utf-8")
        result = runner.invoke(main, ["validate", "free_space", str(bad)])
        assert result.exit_code == EXIT_VALIDATION
        assert "✗" in result.output

    def test_unknown_name(self, runner):
        """测试未知场景名返回 2"""
        result = runner.invoke(main, ["validate", "no_such_scenario"])
        assert result.exit_code == EXIT_VALIDATION


class TestRunCommand:
    """run 子命令测试类"""

    def test_pure_pursuit_run(self, runner, tmp_path):
        """测试单次运行写出帧日志、汇总表与绘图数据"""
        out = tmp_path / "run"
        result = runner.invoke(
            main,
            ["run", "--scenario", "free_space", "--planner", "pf", "--seed", "1", "--out", str(out), "--max-steps", "3"],
        )
        assert result.exit_code == 0, result.output

        lines = (out / "frames" / "pf_seed1.jsonl").read_text(encoding="utf-8").splitlines()
        header = json.loads(lines[0])
        assert header == {"format_version": 1, "scenario": "free_space", "planner": "pf", "seed": 1}
        assert len(lines) == 1 + 3
        assert "solve_time" not in json.loads(lines[1])

        with (out / "summary.csv").open(encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 1
        assert rows[0]["status"] == "ok"
        assert rows[0]["total_frames"] == "3"

        for kind in ("cdf", "timeline", "trajectory"):
            assert (out / "plots" / f"pf_seed1_{kind}.csv").is_file()

    def test_croa_with_config(self, runner, tmp_path):
        """测试通过 YAML 覆盖参数运行主规划器"""
        config = tmp_path / "small.yaml"
        config.write_text("horizon: 4\nsamples: 40\nccp_iters: 1\nalt_iters: 1\n", encoding="utf-8")
        out = tmp_path / "croa"
        result = runner.invoke(
            main,
            ["run", "--scenario", "free_space", "--out", str(out), "--max-steps", "2", "--config", str(config)],
        )
        assert result.exit_code == 0, result.output
        assert (out / "frames" / "croa_seed0.jsonl").is_file()

    def test_bad_config_key(self, runner, tmp_path):
        """测试未知参数项返回 2"""
        config = tmp_path / "bad.yaml"
        config.write_text("unknown_knob: 1\n", encoding="utf-8")
        result = runner.invoke(
            main,
            ["run", "--scenario", "free_space", "--out", str(tmp_path / "x"), "--config", str(config)],
        )
        assert result.exit_code == EXIT_VALIDATION

    def test_missing_scenario(self, runner, tmp_path):
        """测试场景不存在返回 2"""
        result = runner.invoke(main, ["run", "--scenario", "nowhere", "--out", str(tmp_path / "x")])
        assert result.exit_code == EXIT_VALIDATION


class TestCompareCommand:
    """compare 子命令测试类"""

    def test_compare_baselines(self, runner, tmp_path):
        """测试多规划器多种子对比"""
        out = tmp_path / "cmp"
        result = runner.invoke(
            main,
            [
                "compare",
                "--scenario",
                "free_space",
                "--planner",
                "pf",
                "--planner",
                "tracking",
                "--seeds",
                "0-1",
                "--out",
                str(out),
                "--max-steps",
                "2",
                "--workers",
                "1",
            ],
        )
        assert result.exit_code == 0, result.output
        with (out / "summary.csv").open(encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert [(r["planner"], r["seed"]) for r in rows] == [("pf", "0"), ("pf", "1"), ("tracking", "0"), ("tracking", "1")]
        assert "平均遮挡率" in result.output

    def test_bad_seeds(self, runner, tmp_path):
        """测试非法种子列表返回 2"""
        result = runner.invoke(
            main, ["compare", "--scenario", "free_space", "--seeds", "x", "--out", str(tmp_path / "cmp")]
        )
        assert result.exit_code == EXIT_VALIDATION


class TestOcclusionFieldCommand:
    """occlusion-field 子命令测试类"""

    def test_small_grid(self, runner, tmp_path):
        """测试小网格输出"""
        out = tmp_path / "field.csv"
        result = runner.invoke(
            main,
            [
                "occlusion-field",
                "--scenario",
                "canonical",
                "--x-range",
                "0",
                "2",
                "--y-range",
                "-1",
                "1",
                "--resolution",
                "1",
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# format_version=1"
        assert len(lines) == 2 + 9

    def test_bad_resolution(self, runner, tmp_path):
        """测试非正网格间距返回 2"""
        result = runner.invoke(
            main, ["occlusion-field", "--scenario", "canonical", "--resolution", "0", "--out", str(tmp_path / "f.csv")]
        )
        assert result.exit_code == EXIT_VALIDATION
