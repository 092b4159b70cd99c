"""
命令行入口

子命令:
- run: 单个规划器、单个种子的闭环仿真
- compare: 多规划器、多种子批量对比
- occlusion-field: 网格上的遮挡概率场
- validate: 场景文件校验

退出码: 0 成功，2 输入校验失败，3 求解失败。
"""

import functools
import re
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
import numpy as np

from occlusion_planner.config.planner import PlannerConfig, load_overrides
from occlusion_planner.config.settings import settings
from occlusion_planner.experiment.plot_data import emit_occlusion_field, occlusion_field
from occlusion_planner.experiment.runner import RunSpec, frame_log_path, run_experiment
from occlusion_planner.experiment.scenario_files import load_scenario, shipped_scenario
from occlusion_planner.planners.base import PlannerKind
from occlusion_planner.utils.exceptions import (
    ConfigurationError,
    InfeasibleStartError,
    InvariantViolationError,
    OcclusionPlannerError,
    ScenarioParseError,
    SolverFailureError,
)
from occlusion_planner.utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_VALIDATION = 2
EXIT_SOLVER = 3

_VALIDATION_ERRORS = (ScenarioParseError, InvariantViolationError, ConfigurationError)
_SOLVER_ERRORS = (SolverFailureError, InfeasibleStartError)

PLANNER_CHOICE = click.Choice([k.value for k in PlannerKind])
_SEED_RANGE = re.compile(r"(\d+)(?:-(\d+))?")


def _handle_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """将领域异常映射为退出码"""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except _VALIDATION_ERRORS as e:
            logger.error(f"输入校验失败: {e.message}")
            click.echo(f"校验失败: {e.message}", err=True)
            sys.exit(EXIT_VALIDATION)
        except _SOLVER_ERRORS as e:
            logger.error(f"求解失败: {e.message}")
            click.echo(f"求解失败: {e.message}", err=True)
            sys.exit(EXIT_SOLVER)

    return wrapper


def resolve_scenario(value: str) -> Path:
    """已存在的文件路径直接使用，否则按内置场景名查找"""
    path = Path(value)
    if path.is_file():
        return path
    return shipped_scenario(value)


def parse_seeds(value: str) -> list[int]:
    """
    解析种子列表，支持 "0-19"、"1,4,7" 及其组合

    Raises:
        ConfigurationError: 格式非法或为空
    """
    seeds: list[int] = []
    for part in filter(None, (p.strip() for p in value.split(","))):
        match = _SEED_RANGE.fullmatch(part)
        if match is None:
            raise ConfigurationError("seeds", f"无法解析 '{part}'")
        lo, hi = match.group(1), match.group(2)
        seeds.extend(range(int(lo), int(hi or lo) + 1))
    if not seeds:
        raise ConfigurationError("seeds", "种子列表为空")
    return seeds


def _planner_config(config_path: str | None) -> tuple[PlannerConfig, dict[str, Any]]:
    overrides = load_overrides(config_path) if config_path else {}
    return settings.planner_config.with_overrides(overrides), overrides


@click.group()
@click.option("--log-level", default=None, help="日志级别，覆盖 LOG_LEVEL 配置")
@click.version_option(settings.app_version, prog_name=settings.app_name)
def main(log_level: str | None) -> None:
    """遮挡感知运动规划：闭环仿真与批量实验"""
    setup_logging(log_level=log_level)


@main.command("run")
@click.option("--scenario", "scenario", required=True, help="场景文件路径或内置场景名")
@click.option("--planner", "planner", type=PLANNER_CHOICE, default=PlannerKind.CROA.value, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="results/run", show_default=True)
@click.option("--max-steps", type=int, default=None, help="最大帧数")
@click.option("--config", "config_path", type=click.Path(), default=None, help="YAML/JSON 规划器参数覆盖文件")
@_handle_errors
def run_command(
    scenario: str,
    planner: str,
    seed: int,
    out_dir: str,
    max_steps: int | None,
    config_path: str | None,
) -> None:
    """单次闭环仿真，写出帧日志、汇总表与绘图数据"""
    _, overrides = _planner_config(config_path)
    spec = RunSpec(
        scenario_path=resolve_scenario(scenario),
        planner_kinds=[PlannerKind(planner)],
        seeds=[seed],
        overrides=overrides,
        output_dir=Path(out_dir),
        max_steps=max_steps,
        workers=1,
        emit_plots=True,
    )
    summary = run_experiment(spec)
    row = summary.rows[0]
    if summary.failures:
        click.echo(f"仿真失败: {row.status}", err=True)
        sys.exit(EXIT_SOLVER)

    click.echo(
        f"{planner} seed={seed}: 遮挡率 {row.occlusion_ratio:.3f}, "
        f"可检测帧 {row.detectable_frames}/{row.total_frames}, 到达用时 {row.time_to_target_s}"
    )
    click.echo(f"帧日志: {frame_log_path(spec.output_dir, PlannerKind(planner), seed)}")


@main.command("compare")
@click.option("--scenario", "scenario", required=True, help="场景文件路径或内置场景名")
@click.option(
    "--planner",
    "planners",
    type=PLANNER_CHOICE,
    multiple=True,
    help="参与对比的规划器，可重复，缺省为全部",
)
@click.option("--seeds", default="0-19", show_default=True, help='种子列表，如 "0-19" 或 "1,4,7"')
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="results/compare", show_default=True)
@click.option("--max-steps", type=int, default=None, help="最大帧数")
@click.option("--workers", type=int, default=None, help="并行线程数，缺省取 WORKER_COUNT")
@click.option("--plots/--no-plots", "emit_plots", default=False, show_default=True, help="是否写出每次运行的绘图数据")
@click.option("--config", "config_path", type=click.Path(), default=None, help="YAML/JSON 规划器参数覆盖文件")
@_handle_errors
def compare_command(
    scenario: str,
    planners: tuple[str, ...],
    seeds: str,
    out_dir: str,
    max_steps: int | None,
    workers: int | None,
    emit_plots: bool,
    config_path: str | None,
) -> None:
    """多规划器批量对比，按规划器输出平均遮挡率"""
    _, overrides = _planner_config(config_path)
    kinds = [PlannerKind(p) for p in planners] or list(PlannerKind)
    spec = RunSpec(
        scenario_path=resolve_scenario(scenario),
        planner_kinds=kinds,
        seeds=parse_seeds(seeds),
        overrides=overrides,
        output_dir=Path(out_dir),
        max_steps=max_steps,
        workers=workers,
        emit_plots=emit_plots,
    )
    summary = run_experiment(spec)
    for kind in kinds:
        click.echo(f"{kind.value:>9}: 平均遮挡率 {summary.mean_occlusion_ratio(kind):.3f}")
    click.echo(f"汇总表: {summary.summary_path}")
    if summary.failures:
        for planner, seed, reason in summary.failures:
            click.echo(f"失败: {planner} seed={seed} ({reason})", err=True)
        sys.exit(EXIT_SOLVER)


@main.command("occlusion-field")
@click.option("--scenario", "scenario", required=True, help="场景文件路径或内置场景名")
@click.option("--x-range", nargs=2, type=float, default=None, help="x 范围，缺省为机器人起点到目标")
@click.option("--y-range", nargs=2, type=float, default=(-10.0, 10.0), show_default=True)
@click.option("--resolution", type=float, default=0.5, show_default=True, help="网格间距 (m)")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default="results/occlusion_field.csv", show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None, help="YAML/JSON 规划器参数覆盖文件")
@_handle_errors
def occlusion_field_command(
    scenario: str,
    x_range: tuple[float, float] | None,
    y_range: tuple[float, float],
    resolution: float,
    out_path: str,
    config_path: str | None,
) -> None:
    """在机器人位置网格上计算遮挡概率，输出热力图数据"""
    if resolution <= 0:
        raise ConfigurationError("resolution", "网格间距必须为正")
    cfg, _ = _planner_config(config_path)
    scenario_obj = load_scenario(resolve_scenario(scenario), cfg.d0)
    if x_range is None:
        x_range = (scenario_obj.robot_start.x, float(scenario_obj.target_belief.mean[0]))
    xs = np.arange(x_range[0], x_range[1] + 0.5 * resolution, resolution)
    ys = np.arange(y_range[0], y_range[1] + 0.5 * resolution, resolution)
    field = occlusion_field(scenario_obj, cfg, xs, ys)
    path = emit_occlusion_field(field, xs, ys, out_path)
    click.echo(f"遮挡概率场 ({len(ys)}×{len(xs)}): {path}")


@main.command("validate")
@click.argument("scenarios", nargs=-1, required=True)
def validate_command(scenarios: tuple[str, ...]) -> None:
    """校验场景文件，全部通过返回 0，否则返回 2"""
    failed = 0
    for value in scenarios:
        try:
            scenario = load_scenario(resolve_scenario(value))
        except OcclusionPlannerError as e:
            failed += 1
            click.echo(f"✗ {value}: {e.message}", err=True)
            continue
        click.echo(f"✓ {value}: {scenario.name}, {len(scenario.obstacles)} 个障碍物")
    if failed:
        sys.exit(EXIT_VALIDATION)


if __name__ == "__main__":
    main()
