"""
单元几何与全局网格质量
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, Field

from src.mesh.model import Mesh, Mesh1D, MeshError, TriMesh2D

logger = logging.getLogger(__name__)

# 极值角并列判定容差
TIE_TOL = 1e-12


@dataclass(frozen=True)
class GeometryTable:
    """所有单元的几何量 (按单元向量化)"""
    area: np.ndarray          # (M,)
    edge_lengths: np.ndarray  # (M, 3), 边 e_i 与顶点 a_i 相对
    angles: np.ndarray        # (M, 3), 顶点 a_i 处的内角
    c_T: np.ndarray           # min cos(theta_i)
    s_T: np.ndarray           # max sin(theta_i)
    r_T: np.ndarray           # min sin(theta_i) / sin(theta_j)


@dataclass(frozen=True)
class ElementGeometry:
    """单个三角形的几何量与局部常数"""
    area: float
    edge_lengths: tuple[float, float, float]
    angles: tuple[float, float, float]
    c_T: float
    s_T: float
    r_T: float

    @property
    def min_cot(self) -> float:
        """最小内角余切 min cot(theta_i) (由最大角给出)"""
        return 1.0 / math.tan(max(self.angles))


class GlobalMeshQuality(BaseModel):
    """全局网格质量 (锐角性判定)"""
    dimension: int
    n_elements: int
    t_min: float | None = Field(None, description="最小内角 (弧度)")
    t_max: float | None = Field(None, description="最大内角 (弧度)")
    s_min: float | None = Field(None, description="sin(t_min)")
    c_min: float | None = Field(None, description="cos(t_max)")
    acute: bool = Field(..., description="t_max < pi/2 且 t_min > 0 (严格)")
    worst_elements: list[int] = Field(default_factory=list, description="达到极值角的单元")


def compute_geometry(vertices: np.ndarray, triangles: np.ndarray) -> GeometryTable:
    """
    计算所有三角形的面积、边长、内角及 c_T, s_T, r_T

    内角由归一化边向量点积的 arccos 得到。
    """
    p = vertices[triangles]  # (M, 3, 2)
    area = 0.5 * np.abs(
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    )
    edge_lengths = np.empty((len(triangles), 3))
    angles = np.empty((len(triangles), 3))
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        edge_lengths[:, i] = np.linalg.norm(p[:, j] - p[:, k], axis=1)
        u = p[:, j] - p[:, i]
        v = p[:, k] - p[:, i]
        cos = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles[:, i] = np.arccos(np.clip(cos, -1.0, 1.0))

    sines = np.sin(angles)
    return GeometryTable(
        area=area,
        edge_lengths=edge_lengths,
        angles=angles,
        c_T=np.min(np.cos(angles), axis=1),
        s_T=np.max(sines, axis=1),
        r_T=np.min(sines, axis=1) / np.max(sines, axis=1),
    )


_geometry_cache: dict[int, tuple[TriMesh2D, GeometryTable]] = {}


def geometry_table(mesh: TriMesh2D) -> GeometryTable:
    """获取网格的几何表 (网格不可变, 结果按网格对象缓存)"""
    cached = _geometry_cache.get(id(mesh))
    if cached is not None and cached[0] is mesh:
        return cached[1]
    table = compute_geometry(mesh.vertices, mesh.triangles)
    if len(_geometry_cache) > 64:
        _geometry_cache.clear()
    _geometry_cache[id(mesh)] = (mesh, table)
    return table


def element_geometry(mesh: TriMesh2D, elem: int) -> ElementGeometry:
    """
    单元几何量

    Args:
        mesh: 二维网格
        elem: 单元编号

    Returns:
        面积、边长、内角以及 c_T, s_T, r_T
    """
    if not isinstance(mesh, TriMesh2D):
        raise MeshError("element_geometry 仅适用于二维网格")
    if not 0 <= elem < mesh.n_elements:
        raise MeshError(f"无效的单元编号: {elem}")
    table = geometry_table(mesh)
    return ElementGeometry(
        area=float(table.area[elem]),
        edge_lengths=tuple(float(x) for x in table.edge_lengths[elem]),
        angles=tuple(float(x) for x in table.angles[elem]),
        c_T=float(table.c_T[elem]),
        s_T=float(table.s_T[elem]),
        r_T=float(table.r_T[elem]),
    )


def mesh_quality(mesh: Mesh) -> GlobalMeshQuality:
    """
    全局网格质量

    一维网格直接给出锐角判定为真; 二维网格取所有单元内角的极值,
    锐角判定使用严格不等式 t_max < pi/2, 数值上恰为直角的网格不通过。
    """
    if isinstance(mesh, Mesh1D):
        return GlobalMeshQuality(dimension=1, n_elements=mesh.n_elements, acute=True)

    table = geometry_table(mesh)
    t_min = float(table.angles.min())
    t_max = float(table.angles.max())
    acute = t_max < math.pi / 2 and t_min > 0.0

    elem_min = table.angles.min(axis=1)
    elem_max = table.angles.max(axis=1)
    worst = (elem_min <= t_min + TIE_TOL) | (elem_max >= t_max - TIE_TOL)
    if not acute:
        worst |= elem_max >= math.pi / 2
    quality = GlobalMeshQuality(
        dimension=2,
        n_elements=mesh.n_elements,
        t_min=t_min,
        t_max=t_max,
        s_min=math.sin(t_min),
        c_min=math.cos(t_max),
        acute=acute,
        worst_elements=np.nonzero(worst)[0].tolist(),
    )
    if not acute:
        logger.warning(f"网格不满足锐角条件: t_max = {t_max:.12g}")
    return quality
