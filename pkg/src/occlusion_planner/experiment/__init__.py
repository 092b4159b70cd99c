"""
实验模块

场景文件读写、批量实验与绘图数据输出。
"""

from occlusion_planner.experiment.plot_data import (
    emit_occlusion_field,
    emit_plot_data,
    occlusion_field,
    point_count_cdf,
)
from occlusion_planner.experiment.runner import (
    ExperimentSummary,
    RunOutcome,
    RunSpec,
    frame_log_path,
    run_experiment,
)
from occlusion_planner.experiment.scenario_files import (
    load_scenario,
    parse_scenario,
    save_scenario,
    scenario_to_dict,
    shipped_scenario,
)
from occlusion_planner.experiment.schemas import FORMAT_VERSION, ScenarioFileModel, SummaryRow

__all__ = [
    "FORMAT_VERSION",
    "ExperimentSummary",
    "RunOutcome",
    "RunSpec",
    "ScenarioFileModel",
    "SummaryRow",
    "emit_occlusion_field",
    "emit_plot_data",
    "frame_log_path",
    "load_scenario",
    "occlusion_field",
    "parse_scenario",
    "point_count_cdf",
    "run_experiment",
    "save_scenario",
    "scenario_to_dict",
    "shipped_scenario",
]
