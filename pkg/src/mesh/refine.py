"""
一致加密: 一维区间对分, 二维红色加密 (按边中点一分为四)
"""
import logging

import numpy as np

from src.mesh.model import Mesh, Mesh1D, TriMesh2D

logger = logging.getLogger(__name__)


def refine_uniform(mesh: Mesh) -> Mesh:
    """
    一致加密

    一维: 每个区间对分; 二维: 红色加密, 子三角形与父三角形相似,
    内角不变、面积变为四分之一, 边界标记由子边继承。
    新网格的前 N 个顶点与原网格相同, midpoint_parents 记录新增顶点的父节点。
    """
    if isinstance(mesh, Mesh1D):
        refined = _refine_interval(mesh)
    else:
        refined = _refine_red(mesh)
    logger.debug(f"加密完成: {mesh.n_elements} -> {refined.n_elements} 个单元")
    return refined


def _refine_interval(mesh: Mesh1D) -> Mesh1D:
    n = mesh.n_vertices
    mids = 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:])
    nodes = np.empty(2 * n - 1)
    nodes[0::2] = mesh.nodes
    nodes[1::2] = mids
    # 新网格按坐标排序, 父节点信息需按新编号记录
    parents = np.full((2 * n - 1, 2), -1, dtype=np.int64)
    old = np.arange(n)
    parents[0::2] = np.column_stack([old, old])
    parents[1::2] = np.column_stack([old[:-1], old[1:]])
    return Mesh1D(
        nodes=nodes,
        dirichlet_ends=mesh.dirichlet_ends,
        neumann_data=mesh.neumann_data,
        midpoint_parents=parents,
    )


def _refine_red(mesh: TriMesh2D) -> TriMesh2D:
    n = mesh.n_vertices
    tri = mesh.triangles
    local = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    keys = np.sort(local, axis=1)
    unique, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    m = len(tri)
    m_ab = n + inverse[:m]
    m_bc = n + inverse[m:2 * m]
    m_ca = n + inverse[2 * m:]

    vertices = np.vstack([mesh.vertices, 0.5 * (mesh.vertices[unique[:, 0]] + mesh.vertices[unique[:, 1]])])
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    children = np.stack([
        np.column_stack([a, m_ab, m_ca]),
        np.column_stack([m_ab, b, m_bc]),
        np.column_stack([m_ca, m_bc, c]),
        np.column_stack([m_ab, m_bc, m_ca]),
    ], axis=1).reshape(-1, 3)

    lookup = {tuple(e): n + k for k, e in enumerate(unique.tolist())}
    edges, markers, values = [], [], []
    for (i, j), marker, psi in zip(mesh.boundary_edges.tolist(), mesh.boundary_markers, mesh.neumann_values):
        mid = lookup[(min(i, j), max(i, j))]
        edges.extend([(i, mid), (mid, j)])
        markers.extend([marker, marker])
        values.extend([psi, psi])

    parents = np.vstack([np.column_stack([np.arange(n), np.arange(n)]), unique])
    return TriMesh2D(
        vertices=vertices,
        triangles=children,
        boundary_edges=np.asarray(edges),
        boundary_markers=tuple(markers),
        neumann_values=np.asarray(values),
        midpoint_parents=parents,
    )
