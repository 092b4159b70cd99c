"""
绘图数据输出

目标点数累积分布、逐帧遮挡状态时间线、轨迹折线以及遮挡概率场，均为带表头的 CSV。
"""

import csv
import io
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from occlusion_planner.config.planner import PlannerConfig
from occlusion_planner.experiment.schemas import FORMAT_VERSION
from occlusion_planner.occlusion.target import draw_samples
from occlusion_planner.occlusion.visibility import occlusion_probability
from occlusion_planner.simulator.metrics import FrameRecord
from occlusion_planner.simulator.scenario import Scenario
from occlusion_planner.utils.exceptions import PlotDataError
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)


def _cell(value: object) -> str:
    if isinstance(value, float):
        return format(value, ".17g") if math.isfinite(value) else ""
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([f"# format_version={FORMAT_VERSION}"])
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(buffer.getvalue(), encoding="utf-8")
    except OSError as e:
        raise PlotDataError(f"无法写出 {path}: {e}") from e
    return path


def point_count_cdf(points: Sequence[int]) -> list[tuple[int, float]]:
    """(点数, 不超过该点数的帧比例)，点数递增，末项比例为 1"""
    arr = np.asarray(points, dtype=int)
    values, counts = np.unique(arr, return_counts=True)
    cumulative = np.cumsum(counts) / arr.size
    return [(int(v), float(c)) for v, c in zip(values, cumulative, strict=True)]


def emit_plot_data(records: Sequence[FrameRecord], out_dir: str | Path, tag: str) -> dict[str, Path]:
    """
    写出一次运行的绘图数据

    Args:
        records: 逐帧记录
        out_dir: 输出目录
        tag: 文件名前缀，如 croa_seed0

    Returns:
        文件类型到路径的映射

    Raises:
        PlotDataError: 记录为空或写出失败
    """
    if not records:
        raise PlotDataError("帧记录为空，不输出绘图数据")
    out = Path(out_dir)
    points = [r.target_points for r in records]

    paths = {
        "cdf": _write_csv(out / f"{tag}_cdf.csv", ["target_points", "cumulative_fraction"], point_count_cdf(points)),
        "timeline": _write_csv(
            out / f"{tag}_timeline.csv",
            ["frame", "time_s", "target_points", "detectable"],
            [(r.frame, r.time, r.target_points, int(r.detectable)) for r in records],
        ),
        "trajectory": _write_csv(
            out / f"{tag}_trajectory.csv",
            ["frame", "x_m", "y_m", "heading_rad"],
            [(r.frame, r.robot.x, r.robot.y, r.robot.heading) for r in records],
        ),
    }
    logger.debug(f"绘图数据已写出: {tag} -> {out}")
    return paths


def occlusion_field(
    scenario: Scenario,
    cfg: PlannerConfig,
    xs: NDArray[np.float64],
    ys: NDArray[np.float64],
) -> NDArray[np.float64]:
    """
    机器人位置网格上的遮挡概率

    所有网格点共用同一组目标样本；位于障碍物内部的网格点记为 nan。

    Returns:
        形状 (len(ys), len(xs)) 的数组
    """
    samples = draw_samples(scenario.target_belief, max(cfg.samples, 1), cfg.seed, cfg.weight_mode)
    field = np.full((len(ys), len(xs)), np.nan)
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            p = np.array([x, y])
            if any(obs.contains(p) for obs in scenario.obstacles):
                continue
            field[j, i] = occlusion_probability(p, samples, scenario.geoms)
    return field


def emit_occlusion_field(
    field: NDArray[np.float64],
    xs: NDArray[np.float64],
    ys: NDArray[np.float64],
    out_path: str | Path,
) -> Path:
    """长表格式写出遮挡概率场"""
    rows = [(float(x), float(y), float(field[j, i])) for j, y in enumerate(ys) for i, x in enumerate(xs)]
    return _write_csv(Path(out_path), ["x_m", "y_m", "occlusion_probability"], rows)
