"""检查锥规划求解器可用性"""

import cvxpy as cp

from occlusion_planner.config.settings import settings

print(f"cvxpy version: {cp.__version__}")
print(f"Installed solvers: {cp.installed_solvers()}")
print(f"Configured solver: {settings.solver_name}")

try:
    x = cp.Variable(2)
    problem = cp.Problem(cp.Minimize(cp.sum_squares(x - 1)), [cp.norm(x) <= 1])
    problem.solve(solver=settings.solver_name)
    print(f"Solve status: {problem.status}, value: {problem.value:.6f}")
except Exception as e:
    print(f"Cannot solve with {settings.solver_name}: {e}")
