"""
标准锐角网格构建
"""
import math
from typing import Iterable

import numpy as np

from src.mesh.model import Marker, TriMesh2D

SIDES = ("bottom", "right", "top", "left")


def build_lattice_mesh(
    nx: int,
    ny: int,
    spacing: float = 1.0,
    jitter: float = 0.0,
    seed: int = 0,
    neumann_sides: Iterable[str] = (),
    psi: float = 0.0,
) -> TriMesh2D:
    """
    由正三角形组成的平行四边形网格

    顶点 p(i, j) = spacing * (i + j/2, j*sqrt(3)/2), 0 <= i <= nx, 0 <= j <= ny。
    jitter > 0 时对内部顶点施加幅度为 jitter*spacing 的均匀扰动 (小扰动保持锐角)。

    Args:
        nx, ny: 两个方向的单元层数
        spacing: 边长
        jitter: 内部顶点扰动幅度 (相对 spacing)
        seed: 扰动随机种子
        neumann_sides: 标记为 Neumann 的边 ("bottom", "right", "top", "left")
        psi: Neumann 边上的常数 psi

    Returns:
        二维网格
    """
    neumann = set(neumann_sides)
    unknown = neumann - set(SIDES)
    if unknown:
        raise ValueError(f"未知的边名称: {sorted(unknown)}")

    height = math.sqrt(3.0) / 2.0
    index = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)  # index[j, i]
    jj, ii = np.meshgrid(np.arange(ny + 1), np.arange(nx + 1), indexing="ij")
    vertices = spacing * np.column_stack([
        (ii + 0.5 * jj).reshape(-1),
        (height * jj).reshape(-1),
    ])
    if jitter > 0.0:
        rng = np.random.default_rng(seed)
        interior = ((ii > 0) & (ii < nx) & (jj > 0) & (jj < ny)).reshape(-1)
        vertices[interior] += spacing * rng.uniform(-jitter, jitter, size=(int(interior.sum()), 2))

    triangles = []
    for j in range(ny):
        for i in range(nx):
            a, b = index[j, i], index[j, i + 1]
            c, d = index[j + 1, i], index[j + 1, i + 1]
            triangles.append((a, b, c))
            triangles.append((b, d, c))

    edges, markers, values = [], [], []

    def add_side(name: str, chain: np.ndarray) -> None:
        marker = Marker.NEUMANN if name in neumann else Marker.DIRICHLET
        for p, q in zip(chain[:-1], chain[1:]):
            edges.append((int(p), int(q)))
            markers.append(marker)
            values.append(psi if marker is Marker.NEUMANN else 0.0)

    add_side("bottom", index[0, :])
    add_side("right", index[:, nx])
    add_side("top", index[ny, ::-1])
    add_side("left", index[::-1, 0])

    return TriMesh2D(
        vertices=vertices,
        triangles=np.asarray(triangles),
        boundary_edges=np.asarray(edges),
        boundary_markers=tuple(markers),
        neumann_values=np.asarray(values),
    )


def build_hexagon_mesh(radius: float = 1.0, center: tuple[float, float] = (0.0, 0.0)) -> TriMesh2D:
    """正六边形网格: 中心点加 6 个正三角形, 全部边界为 Dirichlet"""
    cx, cy = center
    angles = np.arange(6) * math.pi / 3.0
    ring = np.column_stack([cx + radius * np.cos(angles), cy + radius * np.sin(angles)])
    vertices = np.vstack([[cx, cy], ring])
    triangles = [(0, 1 + k, 1 + (k + 1) % 6) for k in range(6)]
    edges = [(1 + k, 1 + (k + 1) % 6) for k in range(6)]
    return TriMesh2D(
        vertices=vertices,
        triangles=np.asarray(triangles),
        boundary_edges=np.asarray(edges),
        boundary_markers=(Marker.DIRICHLET,) * 6,
    )
