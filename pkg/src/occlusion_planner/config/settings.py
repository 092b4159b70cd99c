"""
应用配置模块

使用pydantic-settings管理应用配置，支持从环境变量和.env文件加载配置。
"""

from pathlib import Path
from typing import TYPE_CHECKING

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

if TYPE_CHECKING:
    from occlusion_planner.config.planner import PlannerConfig


class Settings(BaseSettings):
    """
    应用配置类

    支持从环境变量和.env文件加载配置。

    Attributes:
        app_name: 应用名称
        app_version: 应用版本
        debug: 调试模式
        log_level: 日志级别
        log_file: 日志文件路径，空字符串表示不写文件
        solver_name: cvxpy 使用的锥规划求解器
        solver_tol: 轨迹子问题求解精度
        solver_max_iters: 求解器最大迭代次数
        dual_solver_tol: 对偶分离问题求解精度
        dump_programs: 是否导出每个锥规划的文本形式
        dump_dir: 锥规划导出目录
        worker_count: 批量实验的并行线程数
        planner_rho: 跟踪代价权重 ρ
        planner_horizon: 预测步数 H
        planner_dt: 时间步长 Δt
        planner_samples: 目标样本数 M
        planner_d0: 安全距离
        planner_ccp_iters: 凸-凹过程迭代次数
        planner_alt_iters: 交替优化迭代次数
        planner_sigma: 遮挡罚权重 σ
        planner_xi_floor: ξ 下限
        planner_nominal_speed: 名义速度
        planner_seed: 随机种子
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    app_name: str = "Occlusion Planner"
    app_version: str = "0.1.0"
    debug: bool = False

    log_level: str = "INFO"
    log_file: str = "logs/app.log"

    solver_name: str = "CLARABEL"
    solver_tol: float = Field(default=1e-7, gt=0)
    solver_max_iters: int = Field(default=200, ge=1)
    dual_solver_tol: float = Field(default=1e-9, gt=0)
    dump_programs: bool = False
    dump_dir: str = "logs/programs"

    worker_count: int = Field(default=1, ge=1)

    planner_rho: float = Field(default=0.1, gt=0)
    planner_horizon: int = Field(default=10, ge=1)
    planner_dt: float = Field(default=0.3, gt=0)
    planner_samples: int = Field(default=500, ge=0)
    planner_d0: float = Field(default=1.0, gt=0)
    planner_ccp_iters: int = Field(default=3, ge=1)
    planner_alt_iters: int = Field(default=3, ge=1)
    planner_sigma: float = Field(default=50.0, ge=0)
    planner_xi_floor: float = Field(default=1e-6, gt=0)
    planner_nominal_speed: float = Field(default=5.0, gt=0)
    planner_seed: int = 0

    @property
    def log_file_path(self) -> Path:
        """获取日志文件的完整路径"""
        return Path(self.log_file)

    @property
    def dump_dir_path(self) -> Path:
        """获取锥规划导出目录"""
        return Path(self.dump_dir)

    @property
    def planner_config(self) -> "PlannerConfig":
        """由环境配置构造缺省规划器参数"""
        from occlusion_planner.config.planner import PlannerConfig

        return PlannerConfig(
            rho=self.planner_rho,
            horizon=self.planner_horizon,
            dt=self.planner_dt,
            samples=self.planner_samples,
            d0=self.planner_d0,
            ccp_iters=self.planner_ccp_iters,
            alt_iters=self.planner_alt_iters,
            penalty_occlusion=self.planner_sigma,
            xi_floor=self.planner_xi_floor,
            nominal_speed=self.planner_nominal_speed,
            seed=self.planner_seed,
        )


settings = Settings()
