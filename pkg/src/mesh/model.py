"""
网格模型 - 一维区间剖分与二维协调三角剖分
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import ClassVar, Sequence

import numpy as np

logger = logging.getLogger(__name__)

# 退化三角形判据: 面积 < DEGENERATE_RATIO * 直径^2
DEGENERATE_RATIO = 1e-14

# 内部顶点内角和与 2π 的容许偏差
WINDING_TOL = 1e-8


class MeshError(Exception):
    """网格错误"""
    pass


class MeshParseError(MeshError):
    """网格文件解析错误"""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"第 {line} 行: {message}"
        super().__init__(message)


class MeshValidationError(MeshError):
    """网格校验错误"""

    def __init__(self, message: str, element: int | None = None, line: int | None = None):
        self.element = element
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"第 {line} 行: "
        if element is not None:
            prefix += f"单元 {element}: "
        super().__init__(prefix + message)


class Marker(str, Enum):
    """边界标记"""
    DIRICHLET = "D"
    NEUMANN = "N"


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """
    一维区间剖分 alpha = a_0 < a_1 < ... < a_n = beta

    dirichlet_ends 依次对应左端与右端; neumann_data 给出非 Dirichlet 端的 psi 值。
    midpoint_parents 仅在加密得到的网格上存在, 记录每个顶点在粗网格上的两个父节点 (原有顶点的两个父节点相同)。
    """
    nodes: np.ndarray
    dirichlet_ends: tuple[bool, bool] = (True, True)
    neumann_data: tuple[float | None, float | None] = (None, None)
    midpoint_parents: np.ndarray | None = field(default=None, repr=False)

    dim: ClassVar[int] = 1

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=float).reshape(-1)
        if nodes.size < 2:
            raise MeshValidationError("一维网格至少需要 2 个节点")
        if not np.all(np.isfinite(nodes)):
            raise MeshValidationError("节点坐标必须为有限值")
        bad = np.nonzero(np.diff(nodes) <= 0.0)[0]
        if bad.size:
            raise MeshValidationError(
                f"节点不是严格递增 (non-monotone nodes), 位置 {int(bad[0]) + 1}",
                element=int(bad[0]),
            )
        ends = (bool(self.dirichlet_ends[0]), bool(self.dirichlet_ends[1]))
        if not any(ends):
            raise MeshValidationError("Dirichlet 边界为空 (empty Dirichlet boundary)")
        psi = tuple(
            None if ends[i] else float(self.neumann_data[i] or 0.0) for i in range(2)
        )
        object.__setattr__(self, "nodes", _readonly(nodes))
        object.__setattr__(self, "dirichlet_ends", ends)
        object.__setattr__(self, "neumann_data", psi)
        if self.midpoint_parents is not None:
            parents = np.array(self.midpoint_parents, dtype=np.int64).reshape(-1, 2)
            object.__setattr__(self, "midpoint_parents", _readonly(parents))

    @property
    def n_vertices(self) -> int:
        return int(self.nodes.size)

    @property
    def n_elements(self) -> int:
        return int(self.nodes.size - 1)

    @property
    def points(self) -> np.ndarray:
        """顶点坐标, 形状 (N, 1)"""
        return self.nodes[:, None]

    @cached_property
    def cells(self) -> np.ndarray:
        """单元顶点编号, 形状 (n, 2)"""
        k = np.arange(self.n_elements)
        return _readonly(np.column_stack([k, k + 1]))

    @property
    def h(self) -> np.ndarray:
        """区间长度 h_k"""
        return np.diff(self.nodes)

    @cached_property
    def dirichlet_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[0] = self.dirichlet_ends[0]
        mask[-1] = self.dirichlet_ends[1]
        return _readonly(mask)

    def neumann_loads(self) -> list[tuple[int, float]]:
        """Neumann 端点载荷 (顶点编号, psi)"""
        loads = []
        for end, vertex in ((0, 0), (1, self.n_vertices - 1)):
            if not self.dirichlet_ends[end]:
                loads.append((vertex, float(self.neumann_data[end])))
        return loads


@dataclass(frozen=True, eq=False)
class TriMesh2D:
    """
    二维协调三角剖分

    triangles 按逆时针给出顶点编号; boundary_edges 的每条边恰有一个标记,
    neumann_values 给出每条 Neumann 边上的常数 psi (Dirichlet 边为 0)。

    Γ_N 上的 ψ(x) 按边取分片常数; 沿边变化的 ψ 需要加密边界, 每条边取边中点的值。
    校验拒绝内部顶点处转角和不等于 2π 的折叠扇形; 只涉及边界顶点的几何重叠不做检查。
    """
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_markers: tuple[Marker, ...]
    neumann_values: np.ndarray | None = None
    midpoint_parents: np.ndarray | None = field(default=None, repr=False)

    dim: ClassVar[int] = 2

    def __post_init__(self) -> None:
        vertices = np.array(self.vertices, dtype=float).reshape(-1, 2)
        triangles = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        edges = np.array(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        markers = tuple(Marker(m) for m in self.boundary_markers)
        if len(markers) != len(edges):
            raise MeshValidationError("每条边界边必须恰有一个标记")
        if self.neumann_values is None:
            psi = np.zeros(len(edges))
        else:
            psi = np.array(self.neumann_values, dtype=float).reshape(-1)
            if psi.size != len(edges):
                raise MeshValidationError("neumann_values 长度与边界边数量不一致")
        psi = np.where(np.array([m is Marker.NEUMANN for m in markers], dtype=bool), psi, 0.0)

        _validate_triangulation(vertices, triangles, edges, markers)

        object.__setattr__(self, "vertices", _readonly(vertices))
        object.__setattr__(self, "triangles", _readonly(triangles))
        object.__setattr__(self, "boundary_edges", _readonly(edges))
        object.__setattr__(self, "boundary_markers", markers)
        object.__setattr__(self, "neumann_values", _readonly(np.asarray(psi, dtype=float)))
        if self.midpoint_parents is not None:
            parents = np.array(self.midpoint_parents, dtype=np.int64).reshape(-1, 2)
            object.__setattr__(self, "midpoint_parents", _readonly(parents))

    @property
    def n_vertices(self) -> int:
        return int(len(self.vertices))

    @property
    def n_elements(self) -> int:
        return int(len(self.triangles))

    @property
    def points(self) -> np.ndarray:
        return self.vertices

    @property
    def cells(self) -> np.ndarray:
        return self.triangles

    @cached_property
    def dirichlet_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        for (i, j), marker in zip(self.boundary_edges, self.boundary_markers):
            if marker is Marker.DIRICHLET:
                mask[i] = mask[j] = True
        return _readonly(mask)

    def neumann_edges(self) -> list[tuple[int, int, float]]:
        """Neumann 边 (i, j, psi)"""
        return [
            (int(i), int(j), float(psi))
            for (i, j), marker, psi in zip(self.boundary_edges, self.boundary_markers, self.neumann_values)
            if marker is Marker.NEUMANN
        ]


Mesh = Mesh1D | TriMesh2D


def signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """三角形有向面积 (逆时针为正)"""
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    d1 = p1 - p0
    d2 = p2 - p0
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def _validate_triangulation(
    vertices: np.ndarray,
    triangles: np.ndarray,
    boundary_edges: np.ndarray,
    markers: Sequence[Marker],
) -> None:
    """校验顶点编号、退化与朝向、协调性和边界标记"""
    n = len(vertices)
    if len(triangles) == 0:
        raise MeshValidationError("网格不含三角形")
    if not np.all(np.isfinite(vertices)):
        raise MeshValidationError("顶点坐标必须为有限值")
    for k, tri in enumerate(triangles):
        if tri.min() < 0 or tri.max() >= n:
            raise MeshValidationError(f"顶点编号越界 {tri.tolist()}", element=k)

    areas = signed_areas(vertices, triangles)
    p = vertices[triangles]
    diam2 = np.max(
        np.stack([
            np.sum((p[:, 0] - p[:, 1]) ** 2, axis=1),
            np.sum((p[:, 1] - p[:, 2]) ** 2, axis=1),
            np.sum((p[:, 2] - p[:, 0]) ** 2, axis=1),
        ]),
        axis=0,
    )
    for k in range(len(triangles)):
        if len(set(triangles[k].tolist())) < 3 or abs(areas[k]) < DEGENERATE_RATIO * diam2[k]:
            raise MeshValidationError("退化三角形 (degenerate triangle)", element=k)
        if areas[k] < 0.0:
            raise MeshValidationError("三角形不是逆时针方向 (negative signed area)", element=k)

    referenced = np.zeros(n, dtype=bool)
    referenced[triangles.reshape(-1)] = True
    if not referenced.all():
        raise MeshValidationError(f"顶点 {int(np.argmin(referenced))} 不属于任何三角形")

    # 协调性: 每条边至多被两个三角形共享, 只属于一个三角形的边必须恰好是边界边
    local = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    owners = np.concatenate([np.arange(len(triangles))] * 3)
    keys = np.sort(local, axis=1)
    unique, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if np.any(counts > 2):
        bad = int(np.argmax(counts > 2))
        element = int(owners[np.argmax(inverse == bad)])
        raise MeshValidationError(
            f"非协调网格 (non-conforming): 边 {unique[bad].tolist()} 被超过两个三角形共享",
            element=element,
        )

    outer = {tuple(e) for e in unique[counts == 1].tolist()}
    listed: dict[tuple[int, int], Marker] = {}
    for (i, j), marker in zip(boundary_edges.tolist(), markers):
        key = (min(i, j), max(i, j))
        if key in listed:
            raise MeshValidationError(f"边界边 {key} 有多个标记")
        if key not in outer:
            raise MeshValidationError(f"边界边 {key} 不是三角剖分的边界边")
        listed[key] = marker
    missing = outer - listed.keys()
    if missing:
        edge = sorted(missing)[0]
        raise MeshValidationError(
            f"边界边 {edge} 缺少标记 (或网格非协调, 存在悬挂节点)"
        )
    if not any(m is Marker.DIRICHLET for m in markers):
        raise MeshValidationError("Dirichlet 边界为空 (empty Dirichlet boundary)")

    _check_interior_winding(vertices, triangles, unique[counts == 1])


def _check_interior_winding(vertices: np.ndarray, triangles: np.ndarray, outer_edges: np.ndarray) -> None:
    """内部顶点处各三角形内角之和必须为 2π, 否则三角形绕该顶点折叠重叠"""
    p = vertices[triangles]
    angle_sum = np.zeros(len(vertices))
    for k in range(3):
        a = p[:, (k + 1) % 3] - p[:, k]
        b = p[:, (k + 2) % 3] - p[:, k]
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        dot = np.sum(a * b, axis=1)
        np.add.at(angle_sum, triangles[:, k], np.arctan2(np.abs(cross), dot))

    interior = np.ones(len(vertices), dtype=bool)
    interior[outer_edges.reshape(-1)] = False
    bad = np.flatnonzero(interior & (np.abs(angle_sum - 2.0 * np.pi) > WINDING_TOL))
    if bad.size:
        vertex = int(bad[0])
        element = int(np.argmax(np.any(triangles == vertex, axis=1)))
        raise MeshValidationError(
            f"三角形在内部顶点 {vertex} 处重叠: 内角和 {angle_sum[vertex]:.6g}, 应为 2π",
            element=element,
        )


def build_interval_mesh(
    nodes: Sequence[float],
    bc: tuple[str | Marker, str | Marker] = (Marker.DIRICHLET, Marker.DIRICHLET),
    psi: tuple[float | None, float | None] = (None, None),
) -> Mesh1D:
    """
    构建一维区间网格 (网格间距不要求均匀)

    Args:
        nodes: 严格递增的节点坐标, 至少 2 个
        bc: 左右端点的边界标记 ("D" 或 "N")
        psi: Neumann 端点的 psi 值

    Returns:
        一维网格
    """
    ends = tuple(Marker(m) is Marker.DIRICHLET for m in bc)
    mesh = Mesh1D(np.asarray(nodes, dtype=float), dirichlet_ends=ends, neumann_data=psi)
    logger.debug(f"一维网格已构建: {mesh.n_elements} 个区间")
    return mesh


def with_neumann_psi(mesh: Mesh, psi: float) -> Mesh:
    """返回所有 Neumann 边界 psi 替换为常数 psi 的新网格"""
    if isinstance(mesh, Mesh1D):
        data = tuple(None if mesh.dirichlet_ends[i] else float(psi) for i in range(2))
        return replace(mesh, neumann_data=data)
    return replace(mesh, neumann_values=np.full(len(mesh.boundary_edges), float(psi)))
