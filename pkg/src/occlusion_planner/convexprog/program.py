"""
锥规划描述模块

与求解器无关的凸子问题描述：二次代价、仿射等式/不等式约束以及旋转二阶锥块。

    minimize    ½ xᵀ P x + qᵀ x + r
    subject to  A_eq x = b_eq
                G x ≤ h
                ‖W_j x + w_j‖² ≤ (U x + u)(V x + v),  U x + u ≥ 0,  V x + v ≥ 0
"""

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from numpy.typing import ArrayLike, NDArray

from occlusion_planner.utils.logger import get_logger

logger = get_logger(__name__)

PSD_TOL = 1e-9

_dump_counter = itertools.count()


def _empty(n: int) -> sp.csr_matrix:
    return sp.csr_matrix((0, n))


@dataclass(frozen=True, eq=False)
class RotatedConeBlock:
    """
    一组按行排列的旋转二阶锥

    第 r 行表示 ‖(W_j x + w_j)_r, j=1..J‖² ≤ (U x + u)_r · (V x + v)_r。

    Attributes:
        U, u: 第一个乘子因子的仿射映射
        V, v: 第二个乘子因子的仿射映射
        W: 锥左端各分量的仿射映射列表 [(W_j, w_j)]
    """

    U: sp.csr_matrix
    u: NDArray[np.float64]
    V: sp.csr_matrix
    v: NDArray[np.float64]
    W: tuple[tuple[sp.csr_matrix, NDArray[np.float64]], ...]

    @property
    def rows(self) -> int:
        return int(self.U.shape[0])

    def factors(self, x: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        """返回 (u 值, v 值, ‖w‖² 值)"""
        u_val = self.U @ x + self.u
        v_val = self.V @ x + self.v
        w_sq = np.zeros(self.rows)
        for W_j, w_j in self.W:
            w_sq += (W_j @ x + w_j) ** 2
        return u_val, v_val, w_sq

    def violation(self, x: NDArray[np.float64]) -> float:
        """标准二阶锥形式 ‖(2w, u−v)‖ ≤ u+v 的最大违反量"""
        if self.rows == 0:
            return 0.0
        u_val, v_val, w_sq = self.factors(x)
        lhs = np.sqrt(4.0 * w_sq + (u_val - v_val) ** 2)
        return float(max(np.max(lhs - (u_val + v_val)), 0.0))


@dataclass(frozen=True, eq=False)
class ConicProgram:
    """
    凸子问题

    Attributes:
        variable_count: 变量个数 n
        P: 代价的二次项（对称半正定）
        q: 代价的一次项
        r: 代价常数项
        A_eq, b_eq: 等式约束
        G, h: 不等式约束
        cones: 旋转二阶锥块
        labels: 变量块名称到索引的映射，仅用于调试输出
    """

    variable_count: int
    P: sp.csr_matrix
    q: NDArray[np.float64]
    r: float = 0.0
    A_eq: sp.csr_matrix | None = None
    b_eq: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    G: sp.csr_matrix | None = None
    h: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    cones: tuple[RotatedConeBlock, ...] = ()
    labels: dict[str, NDArray[np.int64]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = self.variable_count
        if self.A_eq is None:
            object.__setattr__(self, "A_eq", _empty(n))
        if self.G is None:
            object.__setattr__(self, "G", _empty(n))
        if self.P.shape != (n, n) or self.q.shape != (n,):
            raise ValueError("代价矩阵维度与变量个数不一致")
        if self.A_eq.shape[1] != n or self.A_eq.shape[0] != self.b_eq.shape[0]:
            raise ValueError("等式约束维度不一致")
        if self.G.shape[1] != n or self.G.shape[0] != self.h.shape[0]:
            raise ValueError("不等式约束维度不一致")
        asym = abs(self.P - self.P.T)
        if asym.nnz and asym.max() > PSD_TOL:
            raise ValueError("代价矩阵必须对称")

    def objective(self, x: ArrayLike) -> float:
        """在给定点处计算代价"""
        x_ = np.asarray(x, dtype=float)
        return float(0.5 * x_ @ (self.P @ x_) + self.q @ x_ + self.r)

    def scaled(self, alpha: float) -> "ConicProgram":
        """代价乘以正数 alpha 的等价问题"""
        return ConicProgram(
            variable_count=self.variable_count,
            P=(self.P * alpha).tocsr(),
            q=self.q * alpha,
            r=self.r * alpha,
            A_eq=self.A_eq,
            b_eq=self.b_eq,
            G=self.G,
            h=self.h,
            cones=self.cones,
            labels=self.labels,
        )

    def to_text(self) -> str:
        """以行优先十进制文本形式导出，用于求解器问题排查"""

        def fmt_matrix(name: str, M: sp.spmatrix) -> list[str]:
            dense = M.toarray()
            lines = [f"{name} {dense.shape[0]} {dense.shape[1]}"]
            lines.extend(" ".join(f"{val:.17g}" for val in row) for row in dense)
            return lines

        def fmt_vector(name: str, vec: NDArray[np.float64]) -> list[str]:
            return [f"{name} {vec.shape[0]}", " ".join(f"{val:.17g}" for val in vec)]

        lines = [f"variables {self.variable_count}"]
        for label, idx in self.labels.items():
            lines.append(f"block {label} {int(idx[0]) if len(idx) else -1} {len(idx)}")
        lines += fmt_matrix("P", self.P)
        lines += fmt_vector("q", self.q)
        lines.append(f"r {self.r:.17g}")
        lines += fmt_matrix("A_eq", self.A_eq)
        lines += fmt_vector("b_eq", self.b_eq)
        lines += fmt_matrix("G", self.G)
        lines += fmt_vector("h", self.h)
        for c, cone in enumerate(self.cones):
            lines.append(f"cone {c} rows {cone.rows} components {len(cone.W)}")
            lines += fmt_matrix("U", cone.U)
            lines += fmt_vector("u", cone.u)
            lines += fmt_matrix("V", cone.V)
            lines += fmt_vector("v", cone.v)
            for j, (W_j, w_j) in enumerate(cone.W):
                lines += fmt_matrix(f"W{j}", W_j)
                lines += fmt_vector(f"w{j}", w_j)
        return "\n".join(lines) + "\n"


def dump_program(program: ConicProgram, directory: str | Path, tag: str = "program") -> Path:
    """
    将锥规划写入文本文件

    Returns:
        写出的文件路径
    """
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{tag}_{next(_dump_counter):06d}.txt"
    path.write_text(program.to_text(), encoding="utf-8")
    logger.debug(f"锥规划已导出: {path}")
    return path


class ProgramBuilder:
    """
    锥规划组装器

    先用 add_block 分配全部变量块，再逐步添加代价与约束，最后调用 build。

    Example:
        >>> builder = ProgramBuilder()
        >>> x = builder.add_block("x", 2)
        >>> builder.add_quadratic(x, np.ones(2))
        >>> program = builder.build()
    """

    def __init__(self) -> None:
        self._sizes: dict[str, int] = {}
        self._labels: dict[str, NDArray[np.int64]] = {}
        self._n = 0
        self._frozen = False
        self._P_rows: list[NDArray[np.int64]] = []
        self._P_cols: list[NDArray[np.int64]] = []
        self._P_vals: list[NDArray[np.float64]] = []
        self._q: NDArray[np.float64] | None = None
        self._r = 0.0
        self._eq: list[tuple[sp.spmatrix, NDArray[np.float64]]] = []
        self._ineq: list[tuple[sp.spmatrix, NDArray[np.float64]]] = []
        self._cones: list[RotatedConeBlock] = []

    @property
    def variable_count(self) -> int:
        return self._n

    def add_block(self, name: str, size: int) -> NDArray[np.int64]:
        """分配一个变量块并返回其索引"""
        if self._frozen:
            raise RuntimeError("添加约束后不能再分配变量")
        if name in self._labels:
            raise ValueError(f"变量块'{name}'已存在")
        idx = np.arange(self._n, self._n + size, dtype=np.int64)
        self._labels[name] = idx
        self._n += size
        return idx

    def _freeze(self) -> None:
        if not self._frozen:
            self._frozen = True
            self._q = np.zeros(self._n)

    def matrix(self, rows: int) -> sp.lil_matrix:
        """创建一个行数为 rows、列数为变量个数的稀疏矩阵"""
        self._freeze()
        return sp.lil_matrix((rows, self._n))

    def add_quadratic(self, idx: ArrayLike, weights: ArrayLike, center: ArrayLike | None = None) -> None:
        """添加 Σ weights·(x[idx] − center)² 代价"""
        self._freeze()
        idx_ = np.asarray(idx, dtype=np.int64)
        w = np.broadcast_to(np.asarray(weights, dtype=float), idx_.shape)
        c = np.zeros(idx_.shape) if center is None else np.broadcast_to(np.asarray(center, dtype=float), idx_.shape)
        self._P_rows.append(idx_)
        self._P_cols.append(idx_)
        self._P_vals.append(2.0 * w)
        np.add.at(self._q, idx_, -2.0 * w * c)
        self._r += float(np.sum(w * c * c))

    def add_linear(self, idx: ArrayLike, coeffs: ArrayLike) -> None:
        """添加线性代价 Σ coeffs·x[idx]"""
        self._freeze()
        idx_ = np.asarray(idx, dtype=np.int64)
        np.add.at(self._q, idx_, np.broadcast_to(np.asarray(coeffs, dtype=float), idx_.shape))

    def add_constant(self, value: float) -> None:
        self._r += float(value)

    def add_eq(self, A: sp.spmatrix, b: ArrayLike) -> None:
        """添加 A x = b"""
        self._freeze()
        self._eq.append((sp.csr_matrix(A), np.asarray(b, dtype=float).reshape(-1)))

    def add_ineq(self, G: sp.spmatrix, h: ArrayLike) -> None:
        """添加 G x ≤ h"""
        self._freeze()
        self._ineq.append((sp.csr_matrix(G), np.asarray(h, dtype=float).reshape(-1)))

    def add_bounds(self, idx: ArrayLike, lower: ArrayLike | None = None, upper: ArrayLike | None = None) -> None:
        """添加变量盒约束"""
        idx_ = np.asarray(idx, dtype=np.int64)
        k = idx_.shape[0]
        if upper is not None:
            G = self.matrix(k)
            G[np.arange(k), idx_] = 1.0
            self.add_ineq(G, np.broadcast_to(np.asarray(upper, dtype=float), (k,)))
        if lower is not None:
            G = self.matrix(k)
            G[np.arange(k), idx_] = -1.0
            self.add_ineq(G, -np.broadcast_to(np.asarray(lower, dtype=float), (k,)))

    def add_rotated_cones(
        self,
        U: sp.spmatrix,
        u: ArrayLike,
        V: sp.spmatrix,
        v: ArrayLike,
        W: list[tuple[sp.spmatrix, ArrayLike]],
    ) -> None:
        """添加一组旋转二阶锥 ‖W x + w‖² ≤ (U x + u)(V x + v)"""
        self._freeze()
        self._cones.append(
            RotatedConeBlock(
                U=sp.csr_matrix(U),
                u=np.asarray(u, dtype=float).reshape(-1),
                V=sp.csr_matrix(V),
                v=np.asarray(v, dtype=float).reshape(-1),
                W=tuple((sp.csr_matrix(W_j), np.asarray(w_j, dtype=float).reshape(-1)) for W_j, w_j in W),
            )
        )

    def build(self) -> ConicProgram:
        """组装为不可变的 ConicProgram"""
        self._freeze()
        n = self._n
        if self._P_rows:
            P = sp.coo_matrix(
                (np.concatenate(self._P_vals), (np.concatenate(self._P_rows), np.concatenate(self._P_cols))),
                shape=(n, n),
            ).tocsr()
        else:
            P = sp.csr_matrix((n, n))

        def stack(parts: list[tuple[sp.spmatrix, NDArray[np.float64]]]) -> tuple[sp.csr_matrix, NDArray[np.float64]]:
            if not parts:
                return _empty(n), np.zeros(0)
            return sp.vstack([m for m, _ in parts]).tocsr(), np.concatenate([vec for _, vec in parts])

        A_eq, b_eq = stack(self._eq)
        G, h = stack(self._ineq)
        assert self._q is not None
        return ConicProgram(
            variable_count=n,
            P=P,
            q=self._q.copy(),
            r=self._r,
            A_eq=A_eq,
            b_eq=b_eq,
            G=G,
            h=h,
            cones=tuple(self._cones),
            labels=dict(self._labels),
        )
