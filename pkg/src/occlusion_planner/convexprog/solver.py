"""
锥规划求解模块

通过cvxpy调用Clarabel内点法求解 ConicProgram，并根据返回的原始/对偶变量
独立计算KKT残差。
"""

from dataclasses import dataclass, field
from enum import StrEnum

import cvxpy as cp
import numpy as np
import scipy.sparse as sp
from cvxpy.atoms.affine.wraps import psd_wrap
from numpy.typing import NDArray

from occlusion_planner.config.settings import settings
from occlusion_planner.convexprog.program import ConicProgram, dump_program
from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)


class SolveStatus(StrEnum):
    """求解状态"""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITERS = "max_iters"
    NUMERICAL_FAILURE = "numerical_failure"


_STATUS_MAP = {
    cp.OPTIMAL: SolveStatus.OPTIMAL,
    cp.OPTIMAL_INACCURATE: SolveStatus.MAX_ITERS,
    cp.USER_LIMIT: SolveStatus.MAX_ITERS,
    cp.INFEASIBLE: SolveStatus.INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: SolveStatus.INFEASIBLE,
}


@dataclass
class Solution:
    """
    求解结果

    Attributes:
        values: 原始变量取值，失败时为 NaN
        status: 求解状态
        objective: 在 values 处重新计算的代价
        kkt_residuals: KKT残差（primal_eq, primal_ineq, primal_cone, stationarity, complementarity）
        solve_time: 求解耗时 (s)
    """

    values: NDArray[np.float64]
    status: SolveStatus
    objective: float
    kkt_residuals: dict[str, float] = field(default_factory=dict)
    solve_time: float = 0.0

    @property
    def usable(self) -> bool:
        """是否得到可用的迭代点"""
        return self.status in (SolveStatus.OPTIMAL, SolveStatus.MAX_ITERS) and bool(
            np.all(np.isfinite(self.values))
        )

    def block(self, program: ConicProgram, name: str) -> NDArray[np.float64]:
        """按变量块名称取值"""
        return self.values[program.labels[name]]


def _cone_expressions(x: cp.Variable, program: ConicProgram) -> list[tuple[cp.Expression, cp.Expression]]:
    """旋转锥 ‖w‖² ≤ uv 编码为标准二阶锥 ‖(2w, u−v)‖ ≤ u+v"""
    out = []
    for cone in program.cones:
        if cone.rows == 0:
            continue
        u = cone.U @ x + cone.u
        v = cone.V @ x + cone.v
        rows = [2.0 * (W_j @ x + w_j) for W_j, w_j in cone.W]
        rows.append(u - v)
        out.append((u + v, cp.vstack(rows)))
    return out


def kkt_residuals(
    program: ConicProgram,
    x: NDArray[np.float64],
    ineq_dual: NDArray[np.float64] | None,
    cone_duals: list[tuple[NDArray[np.float64], NDArray[np.float64]]] | None,
) -> dict[str, float]:
    """
    计算KKT残差

    拉格朗日函数取 f + λᵀ(Gx − h) − Σ zᵀ(t, X) + νᵀ(A_eq x − b_eq)，
    其中锥对偶 z 属于二阶锥。等式乘子 ν 以最小二乘方式消去。
    """
    res: dict[str, float] = {}
    res["primal_eq"] = float(np.max(np.abs(program.A_eq @ x - program.b_eq), initial=0.0))
    slack = program.G @ x - program.h
    res["primal_ineq"] = float(np.max(slack, initial=0.0))
    res["primal_cone"] = max((cone.violation(x) for cone in program.cones), default=0.0)

    if ineq_dual is None or cone_duals is None:
        res["stationarity"] = float("inf")
        res["complementarity"] = float("inf")
        return res

    grad = program.P @ x + program.q
    grad = grad + program.G.T @ ineq_dual
    complementarity = float(np.max(np.abs(ineq_dual * slack), initial=0.0))

    active_cones = [cone for cone in program.cones if cone.rows > 0]
    for cone, (z_t, z_X) in zip(active_cones, cone_duals, strict=True):
        jac_t = cone.U + cone.V
        grad = grad - jac_t.T @ z_t
        for j, (W_j, _) in enumerate(cone.W):
            grad = grad - 2.0 * (W_j.T @ z_X[j])
        grad = grad - (cone.U - cone.V).T @ z_X[-1]

        u_val, v_val, _ = cone.factors(x)
        t_val = u_val + v_val
        X_val = np.vstack([2.0 * (W_j @ x + w_j) for W_j, w_j in cone.W] + [u_val - v_val])
        comp = z_t * t_val + np.einsum("ij,ij->j", z_X, X_val)
        complementarity = max(complementarity, float(np.max(np.abs(comp), initial=0.0)))

    if program.A_eq.shape[0] > 0:
        A_T = program.A_eq.T.toarray() if sp.issparse(program.A_eq) else program.A_eq.T
        nu, *_ = np.linalg.lstsq(A_T, -grad, rcond=None)
        grad = grad + A_T @ nu

    res["stationarity"] = float(np.max(np.abs(grad), initial=0.0))
    res["complementarity"] = complementarity
    return res


def solve(
    program: ConicProgram,
    tol: float | None = None,
    max_iters: int | None = None,
    tag: str = "program",
) -> Solution:
    """
    求解锥规划

    不抛出异常：求解器错误映射为 NUMERICAL_FAILURE。

    Args:
        program: 待求解问题
        tol: 收敛精度，缺省取配置
        max_iters: 最大迭代次数，缺省取配置
        tag: 导出文件名前缀

    Returns:
        Solution: 求解结果
    """
    tol = settings.solver_tol if tol is None else tol
    max_iters = settings.solver_max_iters if max_iters is None else max_iters
    n = program.variable_count

    if settings.dump_programs:
        dump_program(program, settings.dump_dir_path, tag)

    x = cp.Variable(n)
    objective = 0.5 * cp.quad_form(x, psd_wrap(program.P)) + program.q @ x + program.r
    constraints: list[cp.Constraint] = []
    eq_con = ineq_con = None
    if program.A_eq.shape[0] > 0:
        eq_con = program.A_eq @ x == program.b_eq
        constraints.append(eq_con)
    if program.G.shape[0] > 0:
        ineq_con = program.G @ x <= program.h
        constraints.append(ineq_con)
    cone_cons = [cp.SOC(t, X, axis=0) for t, X in _cone_expressions(x, program)]
    constraints.extend(cone_cons)

    problem = cp.Problem(cp.Minimize(objective), constraints)
    solver_opts = {
        "max_iter": max_iters,
        "tol_feas": tol,
        "tol_gap_abs": tol,
        "tol_gap_rel": tol,
    }

    try:
        problem.solve(solver=settings.solver_name, verbose=False, **solver_opts)
        status = _STATUS_MAP.get(problem.status, SolveStatus.NUMERICAL_FAILURE)
    except cp.error.SolverError as e:
        logger.warning(f"求解器异常 ({tag}): {e}")
        status = SolveStatus.NUMERICAL_FAILURE

    solve_time = 0.0
    if problem.solver_stats is not None and problem.solver_stats.solve_time is not None:
        solve_time = float(problem.solver_stats.solve_time)

    if x.value is None or status is SolveStatus.INFEASIBLE:
        values = np.full(n, np.nan)
        return Solution(values=values, status=status, objective=float("nan"), solve_time=solve_time)

    values = np.asarray(x.value, dtype=float).reshape(n)

    ineq_dual = np.zeros(0) if ineq_con is None else ineq_con.dual_value
    cone_duals: list[tuple[NDArray[np.float64], NDArray[np.float64]]] | None = []
    for con in cone_cons:
        dual = con.dual_value
        if dual is None or len(dual) != 2:
            cone_duals = None
            break
        z_t, z_X = dual
        z_t = np.asarray(z_t, dtype=float).reshape(-1)
        z_X = np.asarray(z_X, dtype=float).reshape(-1, z_t.shape[0])
        cone_duals.append((z_t, z_X))
    if ineq_dual is not None:
        ineq_dual = np.asarray(ineq_dual, dtype=float).reshape(-1)

    residuals = kkt_residuals(program, values, ineq_dual, cone_duals)
    if eq_con is not None and eq_con.dual_value is None:
        residuals["stationarity"] = float("inf")

    logger.debug(
        f"求解完成 ({tag}): 状态={status.value}, 变量数={n}, "
        f"耗时={solve_time:.4f}s, 平稳性残差={residuals['stationarity']:.2e}"
    )
    return Solution(
        values=values,
        status=status,
        objective=program.objective(values),
        kkt_residuals=residuals,
        solve_time=solve_time,
    )
