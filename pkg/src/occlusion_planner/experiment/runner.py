"""
批量实验

按 (规划器, 种子) 运行闭环仿真，写出逐帧日志（JSON Lines）与汇总表（CSV）。
输出只依赖实验描述，与并行线程数无关。
"""

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator

from occlusion_planner.config.planner import PlannerConfig
from occlusion_planner.config.settings import settings
from occlusion_planner.experiment.plot_data import emit_plot_data
from occlusion_planner.experiment.scenario_files import load_scenario
from occlusion_planner.experiment.schemas import FORMAT_VERSION, SummaryRow
from occlusion_planner.planners.base import PlannerKind
from occlusion_planner.simulator.engine import run
from occlusion_planner.simulator.metrics import FrameRecord, Metrics
from occlusion_planner.simulator.scenario import Scenario
from occlusion_planner.utils.exceptions import OcclusionPlannerError
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)

SUMMARY_FILE = "summary.csv"
FRAMES_DIR = "frames"
PLOTS_DIR = "plots"


class RunSpec(BaseModel):
    """
    实验描述

    Attributes:
        scenario_path: 场景文件
        planner_kinds: 规划器类型
        seeds: 随机种子
        overrides: 规划器参数覆盖项
        output_dir: 输出目录
        max_steps: 每次仿真的最大帧数
        workers: 并行线程数，缺省取配置
        emit_plots: 是否为每次成功运行写出绘图数据
    """

    model_config = ConfigDict(extra="forbid")

    scenario_path: Path
    planner_kinds: list[PlannerKind] = Field(min_length=1)
    seeds: list[int] = Field(min_length=1)
    overrides: dict[str, Any] = Field(default_factory=dict)
    output_dir: Path
    max_steps: int | None = Field(default=None, ge=1)
    workers: int | None = Field(default=None, ge=1)
    emit_plots: bool = False

    @field_validator("scenario_path")
    @classmethod
    def _scenario_exists(cls, v: Path) -> Path:
        if not v.is_file():
            raise ValueError(f"场景文件不存在: {v}")
        return v


@dataclass
class RunOutcome:
    """
    单次仿真的结果

    Attributes:
        planner: 规划器类型
        seed: 随机种子
        metrics: 指标，失败时为 None
        records: 逐帧记录
        error: 失败原因
    """

    planner: PlannerKind
    seed: int
    metrics: Metrics | None = None
    records: list[FrameRecord] = field(default_factory=list)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ExperimentSummary:
    """
    实验汇总

    Attributes:
        rows: 汇总表各行，顺序同 (规划器, 种子) 的输入顺序
        failures: 失败的 (规划器, 种子, 原因)
        summary_path: 汇总表路径
        outcomes: 各次仿真结果
    """

    rows: list[SummaryRow]
    failures: list[tuple[str, int, str]]
    summary_path: Path
    outcomes: list[RunOutcome] = field(default_factory=list)

    def mean_occlusion_ratio(self, planner: PlannerKind | str) -> float:
        """某规划器成功运行的平均遮挡率"""
        values = [
            r.occlusion_ratio for r in self.rows if r.planner == PlannerKind(planner).value and r.occlusion_ratio is not None
        ]
        return sum(values) / len(values) if values else math.nan


def format_number(value: Any) -> str:
    """JSON 数值文本，浮点数按 17 位有效数字输出，非有限值输出为 null"""
    if isinstance(value, float):
        return format(value, ".17g") if math.isfinite(value) else "null"
    return json.dumps(value, ensure_ascii=False)


def dumps_record(data: dict[str, Any]) -> str:
    """单行 JSON 对象，浮点数固定 17 位有效数字"""
    items = (f"{json.dumps(k, ensure_ascii=False)}: {format_number(v)}" for k, v in data.items())
    return "{" + ", ".join(items) + "}"


def frame_log_path(output_dir: Path, planner: PlannerKind, seed: int) -> Path:
    return output_dir / FRAMES_DIR / f"{planner.value}_seed{seed}.jsonl"


def write_frame_log(path: Path, scenario: Scenario, outcome: RunOutcome) -> None:
    """首行为表头，其余每行一个帧记录"""
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format_version": FORMAT_VERSION,
        "scenario": scenario.name,
        "planner": outcome.planner.value,
        "seed": outcome.seed,
    }
    lines = [json.dumps(header, ensure_ascii=False)]
    lines.extend(dumps_record(r.to_dict()) for r in outcome.records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def summary_row(outcome: RunOutcome) -> SummaryRow:
    if outcome.metrics is None:
        return SummaryRow(planner=outcome.planner.value, seed=outcome.seed, status=outcome.error or "failed")
    m = outcome.metrics
    return SummaryRow(
        planner=outcome.planner.value,
        seed=outcome.seed,
        detectable_frames=m.detectable_frames,
        total_frames=m.total_frames,
        occlusion_ratio=m.occlusion_ratio,
        mean_points=m.mean_points,
        median_points=m.median_points,
        top15_points=m.top15_points,
        time_to_target_s=m.time_to_target,
        min_clearance_m=m.min_clearance_overall,
    )


def write_summary(path: Path, rows: list[SummaryRow]) -> None:
    """CSV 汇总表，带表头，浮点数 17 位有效数字"""
    columns = list(SummaryRow.model_fields)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        values = row.model_dump()
        writer.writerow(["" if values[c] is None else _csv_cell(values[c]) for c in columns])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buffer.getvalue(), encoding="utf-8")


def _csv_cell(value: Any) -> str:
    if isinstance(value, float):
        return format(value, ".17g") if math.isfinite(value) else ""
    return str(value)


def _run_one(scenario: Scenario, kind: PlannerKind, cfg: PlannerConfig, seed: int, max_steps: int | None) -> RunOutcome:
    try:
        metrics, records = run(scenario, kind, cfg, seed, max_steps=max_steps)
    except OcclusionPlannerError as e:
        logger.error(f"仿真失败: 规划器={kind.value}, 种子={seed}: {e.message}")
        return RunOutcome(planner=kind, seed=seed, error=type(e).__name__)
    except Exception as e:
        logger.exception(f"仿真异常: 规划器={kind.value}, 种子={seed}: {e}")
        return RunOutcome(planner=kind, seed=seed, error=type(e).__name__)
    return RunOutcome(planner=kind, seed=seed, metrics=metrics, records=records)


def run_experiment(spec: RunSpec, base_config: PlannerConfig | None = None) -> ExperimentSummary:
    """
    执行批量实验

    单次仿真失败不会中断其余运行，失败的种子记录在汇总表与返回值中。

    Args:
        spec: 实验描述
        base_config: 基础规划器参数，缺省取环境配置

    Returns:
        ExperimentSummary: 实验汇总

    Raises:
        ScenarioParseError: 场景文件无法解析
        InvariantViolationError: 场景不变量不满足
        ConfigurationError: 参数覆盖项非法
    """
    cfg = base_config or settings.planner_config
    cfg = cfg.with_overrides(spec.overrides)
    scenario = load_scenario(spec.scenario_path, cfg.d0)
    jobs = [(kind, seed) for kind in spec.planner_kinds for seed in spec.seeds]
    workers = spec.workers or settings.worker_count
    logger.info(f"开始实验: 场景={scenario.name}, 共 {len(jobs)} 次仿真, 线程数={workers}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_run_one, scenario, kind, cfg, seed, spec.max_steps) for kind, seed in jobs]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [_run_one(scenario, kind, cfg, seed, spec.max_steps) for kind, seed in jobs]

    for outcome in outcomes:
        if not outcome.ok:
            continue
        write_frame_log(frame_log_path(spec.output_dir, outcome.planner, outcome.seed), scenario, outcome)
        if spec.emit_plots:
            emit_plot_data(outcome.records, spec.output_dir / PLOTS_DIR, f"{outcome.planner.value}_seed{outcome.seed}")

    rows = [summary_row(o) for o in outcomes]
    summary_path = spec.output_dir / SUMMARY_FILE
    write_summary(summary_path, rows)
    failures = [(o.planner.value, o.seed, o.error or "") for o in outcomes if not o.ok]
    if failures:
        logger.error(f"{len(failures)} 次仿真失败: {failures}")
    logger.info(f"实验完成，汇总表: {summary_path}")
    return ExperimentSummary(rows=rows, failures=failures, summary_path=summary_path, outcomes=outcomes)

