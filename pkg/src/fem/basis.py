"""
P1 基函数梯度与单元数据
"""
from dataclasses import dataclass

import numpy as np

from src.fem.quadrature import AssemblyError, QuadratureRule
from src.mesh.model import DEGENERATE_RATIO, Mesh, Mesh1D


def basis_gradients(tri: np.ndarray) -> np.ndarray:
    """
    三角形上三个节点基函数的 (常数) 梯度

    Args:
        tri: 顶点坐标, 形状 (3, 2)

    Returns:
        形状 (3, 2), 第 i 行为 ∇φ_i; 三行之和为 0
    """
    tri = np.asarray(tri, dtype=float)
    jac = np.column_stack([tri[1] - tri[0], tri[2] - tri[0]])
    det = np.linalg.det(jac)
    diam2 = max(np.sum((tri[i] - tri[j]) ** 2) for i, j in ((0, 1), (1, 2), (2, 0)))
    if abs(det) < 2.0 * DEGENERATE_RATIO * diam2:
        raise AssemblyError("退化三角形, 基函数梯度无定义")
    # ∇φ = J^{-T} ∇φ̂, 参考梯度 (-1,-1), (1,0), (0,1)
    ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    return ref @ np.linalg.inv(jac)


@dataclass(frozen=True)
class ElementData:
    """
    按单元向量化的积分数据

    gradients 形状 (M, d+1, d); measure 形状 (M,) 为 |T| 或 h;
    points 形状 (M, q, d) 为积分点的物理坐标。
    """
    gradients: np.ndarray
    measure: np.ndarray
    points: np.ndarray
    rule: QuadratureRule


def element_gradients(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """所有单元的基函数梯度与测度"""
    if isinstance(mesh, Mesh1D):
        h = mesh.h
        grads = np.stack([-1.0 / h, 1.0 / h], axis=1)[:, :, None]
        return grads, h
    p = mesh.vertices[mesh.triangles]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # (M, 2, 2), 列为边向量
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1] / det
    inv[:, 1, 1] = jac[:, 0, 0] / det
    inv[:, 0, 1] = -jac[:, 0, 1] / det
    inv[:, 1, 0] = -jac[:, 1, 0] / det
    ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    grads = np.einsum("id,mde->mie", ref, inv)
    return grads, 0.5 * np.abs(det)


_element_cache: dict[tuple[int, str], tuple[Mesh, ElementData]] = {}


def element_data(mesh: Mesh, rule: QuadratureRule) -> ElementData:
    """取得网格在给定积分公式下的单元数据 (按网格对象缓存)"""
    key = (id(mesh), rule.name)
    cached = _element_cache.get(key)
    if cached is not None and cached[0] is mesh:
        return cached[1]
    grads, measure = element_gradients(mesh)
    vertices = mesh.points[mesh.cells]  # (M, d+1, d)
    points = np.einsum("qi,mid->mqd", rule.bary, vertices)
    data = ElementData(gradients=grads, measure=measure, points=points, rule=rule)
    if len(_element_cache) > 64:
        _element_cache.clear()
    _element_cache[key] = (mesh, data)
    return data
