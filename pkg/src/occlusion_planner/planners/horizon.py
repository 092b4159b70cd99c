"""
轨迹子问题组装模块

在参考轨迹附近线性化动力学，组装关于 {s_h, u_h} 的锥规划：
跟踪代价、控制正则、线性化避碰约束（可带松弛）、遮挡铰链罚项（旋转二阶锥）
以及终端线性代价。
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from occlusion_planner.collision.dual import CollisionConstraint
from occlusion_planner.config.planner import PlannerConfig, XiMode
from occlusion_planner.convexprog.program import ConicProgram, ProgramBuilder
from occlusion_planner.dynamics.bicycle import State, Trajectory, dynamics_rate, linearize, wrap_angle
from occlusion_planner.occlusion.surrogate import SurrogateBatch


@dataclass(frozen=True, eq=False)
class OcclusionTerms:
    """
    轨迹子问题中的遮挡项

    Attributes:
        batch: 当前展开点处通过位于两者之间判据的代理约束
        weights: 样本权重 Qᵢ
        xi_mode: ξ 处理方式
        hard: 是否作为硬约束
        xi_floor: ξ 下限
        xi_cap: ξ 上限
        xi_fixed: 松弛子问题给出的 ξ，交替模式下作为锚点，缺省视为 1
    """

    batch: SurrogateBatch
    weights: NDArray[np.float64]
    xi_mode: XiMode = XiMode.ALTERNATING
    hard: bool = False
    xi_floor: float = 1e-6
    xi_cap: float = 1e6
    xi_fixed: NDArray[np.float64] | None = None

    def anchors(self) -> NDArray[np.float64]:
        """交替模式下各样本的锚点 aᵢ = clamp(ξᵢ, 1, cap) = 1 + wᵢ"""
        if self.xi_fixed is None:
            return np.ones(self.batch.sample_count)
        return np.clip(self.xi_fixed, 1.0, self.xi_cap)


@dataclass(frozen=True, eq=False)
class StepAProblem:
    """
    组装好的轨迹子问题

    Attributes:
        program: 锥规划
        reference_headings: 连续展开的参考航向
    """

    program: ConicProgram
    reference_headings: NDArray[np.float64]

    def states(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        return values[self.program.labels["states"]].reshape(-1, 3)

    def controls(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        return values[self.program.labels["controls"]].reshape(-1, 2)


def unwrap_headings(states: Sequence[State]) -> NDArray[np.float64]:
    """将航向序列连续展开，起点保持首状态的归一化航向"""
    headings = np.empty(len(states))
    headings[0] = states[0].heading
    for h in range(1, len(states)):
        headings[h] = headings[h - 1] + float(wrap_angle(states[h].heading - states[h - 1].heading))
    return headings


def assemble_step_a(
    s0: State,
    reference: Trajectory,
    waypoints: Sequence[State],
    cfg: PlannerConfig,
    collision: Sequence[CollisionConstraint] = (),
    slack_mask: Sequence[bool] | None = None,
    occlusion: OcclusionTerms | None = None,
    terminal_linear: NDArray[np.float64] | None = None,
    sigma: float | None = None,
) -> StepAProblem:
    """
    组装轨迹子问题

    Args:
        s0: 当前状态（固定）
        reference: 线性化参考轨迹，首状态须为 s0
        waypoints: 参考航点
        cfg: 规划器参数
        collision: 关于位置的仿射避碰约束
        slack_mask: 各避碰约束是否附带松弛
        occlusion: 遮挡代理项
        terminal_linear: 终端位置上的线性代价系数
        sigma: 遮挡罚权重，缺省取配置

    Returns:
        StepAProblem: 轨迹子问题
    """
    H = reference.horizon
    sigma = cfg.penalty_occlusion if sigma is None else sigma
    ref_states = reference.state_array()
    ref_states[:, 2] = unwrap_headings(reference.states)
    ref_controls = reference.control_array()

    builder = ProgramBuilder()
    s_idx = builder.add_block("states", 3 * (H + 1)).reshape(H + 1, 3)
    u_idx = builder.add_block("controls", 2 * H).reshape(H, 2)

    slack_mask = [False] * len(collision) if slack_mask is None else list(slack_mask)
    slacked = [j for j, flag in enumerate(slack_mask) if flag]
    c_idx = builder.add_block("collision_slack", len(slacked))

    use_occlusion = occlusion is not None and len(occlusion.batch) > 0 and sigma > 0
    M = occlusion.batch.sample_count if use_occlusion else 0
    joint = use_occlusion and occlusion.xi_mode is XiMode.JOINT
    e_idx = builder.add_block("hinge", M)
    d_idx = builder.add_block("xi_descent", 0 if joint else M)
    xi_idx = builder.add_block("xi", M if joint else 0)
    w_idx = builder.add_block("w", M if joint else 0)

    # 初始状态
    A0 = builder.matrix(3)
    A0[np.arange(3), s_idx[0]] = 1.0
    builder.add_eq(A0, s0.to_array())

    # 线性化动力学 s_{h+1} = A s_h + B u_h + c
    A_dyn = builder.matrix(3 * H)
    b_dyn = np.zeros(3 * H)
    for h in range(H):
        s_ref = State.from_array(ref_states[h])
        A, B, _ = linearize(s_ref, reference.controls[h], cfg.dt, cfg.wheelbase)
        nxt = ref_states[h] + dynamics_rate(ref_states[h], ref_controls[h], cfg.wheelbase) * cfg.dt
        c = nxt - A @ ref_states[h] - B @ ref_controls[h]
        rows = np.arange(3 * h, 3 * h + 3)
        for r in range(3):
            A_dyn[rows[r], s_idx[h + 1, r]] = 1.0
            A_dyn[rows[r], s_idx[h]] = -A[r]
            A_dyn[rows[r], u_idx[h]] = -B[r]
        b_dyn[rows] = c
    builder.add_eq(A_dyn, b_dyn)

    # 控制约束与航向信赖域
    builder.add_bounds(u_idx[:, 0], lower=cfg.speed_min, upper=cfg.speed_max)
    builder.add_bounds(u_idx[:, 1], lower=cfg.steer_min, upper=cfg.steer_max)
    builder.add_bounds(
        s_idx[1:, 2],
        lower=ref_states[1:, 2] - cfg.heading_trust_region,
        upper=ref_states[1:, 2] + cfg.heading_trust_region,
    )

    # 跟踪代价，航点航向就近展开到参考航向附近
    wp = np.array([w.to_array() for w in waypoints])
    wp_heading = ref_states[:, 2] + wrap_angle(wp[:, 2] - ref_states[:, 2])
    builder.add_quadratic(s_idx[1:, 0], cfg.rho, wp[1:, 0])
    builder.add_quadratic(s_idx[1:, 1], cfg.rho, wp[1:, 1])
    builder.add_quadratic(s_idx[1:, 2], cfg.rho, wp_heading[1:])
    if cfg.control_regularization > 0:
        builder.add_quadratic(u_idx.ravel(), cfg.control_regularization, ref_controls.ravel())

    # 避碰约束 normalᵀ p_h + slack ≥ bound
    if collision:
        G = builder.matrix(len(collision))
        h_vec = np.zeros(len(collision))
        slack_pos = {j: n for n, j in enumerate(slacked)}
        for j, con in enumerate(collision):
            G[j, s_idx[con.step, 0]] = -con.normal[0]
            G[j, s_idx[con.step, 1]] = -con.normal[1]
            if j in slack_pos:
                G[j, c_idx[slack_pos[j]]] = -1.0
            h_vec[j] = -con.bound
        builder.add_ineq(G, h_vec)
        if slacked:
            builder.add_bounds(c_idx, lower=0.0)
            builder.add_linear(c_idx, cfg.collision_slack_weight)

    if use_occlusion:
        _add_occlusion_terms(builder, occlusion, s_idx[H, :2], e_idx, d_idx, xi_idx, w_idx, sigma)

    if terminal_linear is not None:
        builder.add_linear(s_idx[H, :2], terminal_linear)

    return StepAProblem(program=builder.build(), reference_headings=ref_states[:, 2])


def _add_occlusion_terms(
    builder: ProgramBuilder,
    occlusion: OcclusionTerms,
    p_idx: NDArray[np.int64],
    e_idx: NDArray[np.int64],
    d_idx: NDArray[np.int64],
    xi_idx: NDArray[np.int64],
    w_idx: NDArray[np.int64],
    sigma: float,
) -> None:
    """
    每个 (i, k) 代理约束除以 scale = R²‖p*−g‖² 后写为旋转锥 ‖R(p−g)‖²/scale ≤ u·v。

    交替模式: u = 1 − dᵢ，v = eᵢ − aᵢ·Θ̂(p)/scale，锚点 aᵢ 取自松弛子问题，
    等价于 ξᵢ = aᵢ(1 − dᵢ)。dᵢ ∈ [0, 1 − 1/aᵢ] 是 ξᵢ 向 1 的下降量，
    以 −Qᵢaᵢ 计入代价，与合并目标中 Qᵢwᵢ 的下降一致。

    联合模式: u = ξᵢ，v = eᵢ − Θ̂(p)/scale，另有 wᵢ ≥ ξᵢ − 1、wᵢ ≥ 0，代价 Qᵢwᵢ。

    两种模式下铰链 eᵢ ≥ 0 的代价均为 σQᵢeᵢ；硬约束模式下 eᵢ = 0，
    交替模式另要求 ξᵢ = 1。
    """
    batch = occlusion.batch
    n = len(batch)
    rows = np.arange(n)
    i = batch.sample_index
    joint = occlusion.xi_mode is XiMode.JOINT
    anchors = np.ones(batch.sample_count) if joint else occlusion.anchors()
    a = anchors[i]

    U = builder.matrix(n)
    u = np.zeros(n)
    if joint:
        U[rows, xi_idx[i]] = 1.0
    else:
        U[rows, d_idx[i]] = -1.0
        u[:] = 1.0

    V = builder.matrix(n)
    V[rows, e_idx[i]] = 1.0
    V[rows, p_idx[0]] = -a * batch.gradient[:, 0] / batch.scale
    V[rows, p_idx[1]] = -a * batch.gradient[:, 1] / batch.scale
    v = -a * batch.offset / batch.scale

    root = np.sqrt(batch.scale)
    Wx = builder.matrix(n)
    Wx[rows, p_idx[0]] = batch.radius / root
    Wy = builder.matrix(n)
    Wy[rows, p_idx[1]] = batch.radius / root
    wx = -batch.radius * batch.sample[:, 0] / root
    wy = -batch.radius * batch.sample[:, 1] / root
    builder.add_rotated_cones(U, u, V, v, [(Wx, wx), (Wy, wy)])

    builder.add_bounds(e_idx, lower=0.0, upper=0.0 if occlusion.hard else None)
    builder.add_linear(e_idx, sigma * occlusion.weights)

    if joint:
        builder.add_bounds(xi_idx, lower=occlusion.xi_floor, upper=occlusion.xi_cap)
        builder.add_bounds(w_idx, lower=0.0)
        # w − ξ ≥ −1
        M = len(w_idx)
        G = builder.matrix(M)
        G[np.arange(M), w_idx] = -1.0
        G[np.arange(M), xi_idx] = 1.0
        builder.add_ineq(G, np.ones(M))
        builder.add_linear(w_idx, occlusion.weights)
    else:
        reach = 1.0 - 1.0 / anchors
        builder.add_bounds(d_idx, lower=reach if occlusion.hard else 0.0, upper=reach)
        builder.add_linear(d_idx, -occlusion.weights * anchors)

