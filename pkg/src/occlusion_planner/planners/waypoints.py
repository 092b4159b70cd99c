"""
参考航点模块

沿机器人指向目标的直线生成名义速度间隔的参考航点，必要时绕开挡在直线上的障碍物，
并计算跟踪代价。
"""

from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike

from occlusion_planner.collision.dual import EgoShape, min_clearance
from occlusion_planner.config.planner import PlannerConfig
from occlusion_planner.dynamics.bicycle import State, Trajectory, wrap_angle
from occlusion_planner.geometry.polytope import GEOM_TOL, ConvexPolytope
from occlusion_planner.utils.exceptions import DegenerateTargetError

TARGET_TOL = 1e-6
DETOUR_STEP = 0.25
DETOUR_MAX = 6.0

Waypoints = tuple[State, ...]


def reference_waypoints(s: State, target_mean: ArrayLike, cfg: PlannerConfig) -> Waypoints:
    """
    生成 H+1 个参考航点

    第 h 个航点沿指向目标的单位向量前进 h·Δt·v_nom，到达目标均值后不再前进；
    航向取指向目标的方位角。

    Raises:
        DegenerateTargetError: 目标均值与机器人位置距离小于 1e-6
    """
    start = s.position
    delta = np.asarray(target_mean, dtype=float) - start
    distance = float(np.linalg.norm(delta))
    if distance < TARGET_TOL:
        raise DegenerateTargetError(distance)

    unit = delta / distance
    bearing = float(np.arctan2(unit[1], unit[0]))
    spacing = cfg.dt * cfg.nominal_speed
    waypoints = []
    for h in range(cfg.horizon + 1):
        advance = min(h * spacing, distance)
        pos = start + advance * unit
        waypoints.append(State(float(pos[0]), float(pos[1]), bearing))
    return tuple(waypoints)


def detour_waypoints(
    waypoints: Waypoints,
    obstacles: Sequence[ConvexPolytope],
    ego: EgoShape,
    d0: float,
) -> Waypoints:
    """
    绕开挡在直线上的障碍物

    车体在某个航点处到障碍物的精确距离小于 d0 时，把该航点沿直线法向平移，
    取满足全部障碍物距离要求的最小偏移（步长 DETOUR_STEP，至多 DETOUR_MAX）。
    先尝试障碍物中心对侧，中心恰在直线上时先向左；两侧均无可行偏移时航点不动。
    首个航点与航向保持不变。
    """
    if not obstacles or len(waypoints) < 2:
        return waypoints
    start = waypoints[0].position
    delta = waypoints[-1].position - start
    length = float(np.linalg.norm(delta))
    if length < TARGET_TOL:
        return waypoints
    unit = delta / length
    normal = np.array([-unit[1], unit[0]])
    offsets = np.arange(1, int(round(DETOUR_MAX / DETOUR_STEP)) + 1) * DETOUR_STEP

    out = [waypoints[0]]
    for w in waypoints[1:]:
        blocking = [obs for obs in obstacles if min_clearance(ego, w, [obs]) < d0]
        if not blocking:
            out.append(w)
            continue
        side = -1.0 if float((blocking[0].centroid - start) @ normal) > GEOM_TOL else 1.0
        moved = w
        for sign in (side, -side):
            shifted = (State(*(float(c) for c in w.position + sign * off * normal), w.heading) for off in offsets)
            found = next((s for s in shifted if min_clearance(ego, s, obstacles) >= d0), None)
            if found is not None:
                moved = found
                break
        out.append(moved)
    return tuple(out)


def tracking_cost(traj: Trajectory | Sequence[State], waypoints: Sequence[State], rho: float) -> float:
    """ρ·Σ‖s_h − s⋄_h‖²，航向差先归一化到 (−π, π]"""
    states = traj.states if isinstance(traj, Trajectory) else tuple(traj)
    if len(states) != len(waypoints):
        raise ValueError(f"轨迹长度 {len(states)} 与航点数 {len(waypoints)} 不一致")
    total = 0.0
    for s, w in zip(states, waypoints, strict=True):
        dheading = float(wrap_angle(s.heading - w.heading))
        total += (s.x - w.x) ** 2 + (s.y - w.y) ** 2 + dheading**2
    return rho * total
