"""
配置模块单元测试

测试环境配置加载、规划器参数校验与覆盖文件读取。
"""

import pytest

from occlusion_planner.config.planner import OcclusionMode, PlannerConfig, XiMode, load_overrides
from occlusion_planner.config.settings import Settings
from occlusion_planner.occlusion.target import WeightMode
from occlusion_planner.utils.exceptions import ConfigurationError


class TestSettingsDefaults:
    """Settings缺省值测试类"""

    def test_default_planner_values(self):
        """测试缺省规划器参数"""
        settings = Settings(_env_file=None)
        cfg = settings.planner_config
        assert cfg.rho == 0.1
        assert cfg.horizon == 10
        assert cfg.dt == 0.3
        assert cfg.samples == 500
        assert cfg.d0 == 1.0
        assert cfg.ccp_iters == 3
        assert cfg.alt_iters == 3
        assert cfg.penalty_occlusion == 50.0
        assert cfg.xi_floor == 1e-6

    def test_default_solver_is_clarabel(self):
        """测试缺省求解器"""
        settings = Settings(_env_file=None)
        assert settings.solver_name == "CLARABEL"
        assert settings.worker_count == 1

    def test_planner_values_from_env(self, monkeypatch):
        """测试从环境变量读取规划器参数"""
        monkeypatch.setenv("PLANNER_HORIZON", "15")
        monkeypatch.setenv("PLANNER_SIGMA", "10")
        cfg = Settings(_env_file=None).planner_config
        assert cfg.horizon == 15
        assert cfg.penalty_occlusion == 10.0

    def test_log_file_path(self, monkeypatch, tmp_path):
        """测试日志文件路径来自环境变量"""
        monkeypatch.setenv("LOG_FILE", str(tmp_path / "run.log"))
        assert Settings(_env_file=None).log_file_path == tmp_path / "run.log"

    def test_worker_count_from_env(self, monkeypatch):
        """测试并行线程数"""
        monkeypatch.setenv("WORKER_COUNT", "4")
        assert Settings(_env_file=None).worker_count == 4


class TestPlannerConfig:
    """PlannerConfig测试类"""

    def test_defaults(self):
        """测试缺省模式"""
        cfg = PlannerConfig()
        assert cfg.weight_mode is WeightMode.DENSITY
        assert cfg.xi_mode is XiMode.ALTERNATING
        assert cfg.occlusion_mode is OcclusionMode.PENALTY
        assert cfg.reference_detour is True

    def test_collision_slack_weight_default(self):
        """测试碰撞松弛权重缺省为 10³·ρ"""
        assert PlannerConfig(rho=0.2).collision_slack_weight == pytest.approx(200.0)
        assert PlannerConfig(penalty_collision_slack=5.0).collision_slack_weight == 5.0

    def test_bounds(self):
        """测试控制约束"""
        bounds = PlannerConfig().bounds
        assert bounds.lower.tolist() == [0.0, -0.6]
        assert bounds.upper.tolist() == [8.0, 0.6]

    @pytest.mark.parametrize(
        "field,value",
        [
            ("rho", 0.0),
            ("horizon", 0),
            ("dt", -0.1),
            ("d0", 0.0),
            ("xi_floor", 0.0),
        ],
    )
    def test_invalid_values_rejected(self, field, value):
        """测试非法取值被拒绝"""
        with pytest.raises(ConfigurationError):
            PlannerConfig().with_overrides({field: value})

    def test_inverted_speed_bounds_rejected(self):
        """测试速度上下界颠倒"""
        with pytest.raises(ConfigurationError):
            PlannerConfig().with_overrides({"speed_min": 5.0, "speed_max": 1.0})

    def test_unknown_override_rejected(self):
        """测试未知参数名"""
        with pytest.raises(ConfigurationError, match="unknown_knob"):
            PlannerConfig().with_overrides({"unknown_knob": 1})

    def test_overrides_are_applied(self):
        """测试覆盖项生效且原对象不变"""
        base = PlannerConfig()
        cfg = base.with_overrides({"horizon": 4, "xi_mode": "joint"})
        assert cfg.horizon == 4
        assert cfg.xi_mode is XiMode.JOINT
        assert base.horizon == 10

    def test_empty_overrides_return_same(self):
        """测试空覆盖项"""
        base = PlannerConfig()
        assert base.with_overrides({}) is base
        assert base.with_overrides(None) is base


class TestLoadOverrides:
    """覆盖文件读取测试类"""

    def test_yaml_file(self, tmp_path):
        """测试YAML文件"""
        path = tmp_path / "planner.yaml"
        path.write_text("horizon: 8\nrho: 0.5\n", encoding="utf-8")
        assert load_overrides(path) == {"horizon": 8, "rho": 0.5}

    def test_json_file(self, tmp_path):
        """测试JSON文件"""
        path = tmp_path / "planner.json"
        path.write_text('{"samples": 100}', encoding="utf-8")
        assert load_overrides(path) == {"samples": 100}

    def test_empty_file(self, tmp_path):
        """测试空文件"""
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")
        assert load_overrides(path) == {}

    def test_missing_file(self, tmp_path):
        """测试文件不存在"""
        with pytest.raises(ConfigurationError, match="不存在"):
            load_overrides(tmp_path / "nope.yaml")

    def test_non_mapping(self, tmp_path):
        """测试顶层不是映射"""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="映射"):
            load_overrides(path)

    def test_unparseable(self, tmp_path):
        """测试语法错误"""
        path = tmp_path / "bad.yaml"
        path.write_text("horizon: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="无法解析"):
            load_overrides(path)


class TestSetupLogging:
    """日志配置测试类"""

    def test_writes_configured_file(self, monkeypatch, tmp_path):
        """测试缺省写入配置中的日志文件"""
        from occlusion_planner.utils import logger as logger_module

        log_path = tmp_path / "logs" / "app.log"
        monkeypatch.setattr(logger_module.settings, "log_file", str(log_path))
        logger_module.setup_logging(log_level="INFO")
        logger_module.get_logger("test").info("写入日志")
        logger_module.logger.complete()
        assert log_path.is_file()
        assert "写入日志" in log_path.read_text(encoding="utf-8")
        logger_module.setup_logging(log_level="INFO", log_file="")
