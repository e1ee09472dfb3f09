"""
离散场 - 网格顶点上的 P1 节点值
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.mesh.model import Mesh, MeshError

# Dirichlet 节点取值的判定容差
DIRICHLET_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class DiscreteField:
    """分片线性函数 (每个顶点一个节点值)"""
    mesh: Mesh
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size != self.mesh.n_vertices:
            raise MeshError(f"节点值个数 {values.size} 与顶点数 {self.mesh.n_vertices} 不一致")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dirichlet_mask(self) -> np.ndarray:
        return self.mesh.dirichlet_mask

    @property
    def free_values(self) -> np.ndarray:
        return self.values[~self.mesh.dirichlet_mask]

    def satisfies_dirichlet(self, tol: float = DIRICHLET_TOL) -> bool:
        """Dirichlet 节点上取值为 0 (齐次问题)"""
        return bool(np.all(np.abs(self.values[self.mesh.dirichlet_mask]) <= tol))

    def with_free_values(self, free: np.ndarray) -> "DiscreteField":
        values = np.zeros(self.mesh.n_vertices)
        values[~self.mesh.dirichlet_mask] = free
        return DiscreteField(self.mesh, values)

    def __sub__(self, other: "DiscreteField") -> "DiscreteField":
        if other.mesh is not self.mesh:
            raise MeshError("两个离散场不在同一网格上")
        return DiscreteField(self.mesh, self.values - other.values)

    def __add__(self, other: "DiscreteField") -> "DiscreteField":
        if other.mesh is not self.mesh:
            raise MeshError("两个离散场不在同一网格上")
        return DiscreteField(self.mesh, self.values + other.values)


def zero_field(mesh: Mesh) -> DiscreteField:
    return DiscreteField(mesh, np.zeros(mesh.n_vertices))


def random_field(mesh: Mesh, box: float, rng: np.random.Generator) -> DiscreteField:
    """自由节点取 [-box, box] 上的均匀随机值, Dirichlet 节点取 0 (多初值实验的初始猜测)"""
    values = rng.uniform(-box, box, size=mesh.n_vertices)
    values[mesh.dirichlet_mask] = 0.0
    return DiscreteField(mesh, values)


def interpolate(
    mesh: Mesh,
    fn: Callable[[np.ndarray], np.ndarray],
    enforce_dirichlet: bool = False,
) -> DiscreteField:
    """
    节点插值

    Args:
        mesh: 网格
        fn: 接收顶点坐标 (N, d) 返回 (N,) 的函数
        enforce_dirichlet: 是否将 Dirichlet 节点置 0
    """
    values = np.array(fn(mesh.points), dtype=float).reshape(-1)
    if enforce_dirichlet:
        values[mesh.dirichlet_mask] = 0.0
    return DiscreteField(mesh, values)


def prolongate(field: DiscreteField, fine_mesh: Mesh) -> DiscreteField:
    """
    将粗网格上的 P1 场精确插值到其一致加密网格上

    新增顶点取两个父节点的平均, 原有顶点保持不变。
    """
    parents = fine_mesh.midpoint_parents
    if parents is None:
        raise MeshError("目标网格不是由一致加密得到的 (缺少 midpoint_parents)")
    if parents.max() >= field.mesh.n_vertices or len(parents) != fine_mesh.n_vertices:
        raise MeshError("目标网格与粗网格不匹配")
    values = 0.5 * (field.values[parents[:, 0]] + field.values[parents[:, 1]])
    return DiscreteField(fine_mesh, values)


def delta_values(field: DiscreteField) -> np.ndarray:
    """每个单元上节点值的最大差 max |φ(a_i) - φ(a_j)|"""
    local = field.values[field.mesh.cells]
    return local.max(axis=1) - local.min(axis=1)
