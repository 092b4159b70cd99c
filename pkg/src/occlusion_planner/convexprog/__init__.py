"""凸子问题组装与求解模块"""

from occlusion_planner.convexprog.program import (
    ConicProgram,
    ProgramBuilder,
    RotatedConeBlock,
    dump_program,
)
from occlusion_planner.convexprog.solver import Solution, SolveStatus, kkt_residuals, solve

__all__ = [
    "ConicProgram",
    "ProgramBuilder",
    "RotatedConeBlock",
    "Solution",
    "SolveStatus",
    "dump_program",
    "kkt_residuals",
    "solve",
]
