"""
网格文本文件读写

格式 (按行, '#' 之后为注释):
    dim <1|2>
    vertices <count>        之后每行 "x" 或 "x y"
    triangles <count>       (仅二维) 之后每行 "i j k", 0 起始, 逆时针
    boundary <count>        之后每行 "i [j] <D|N> [psi]", 一维边界项只给出一个顶点

二维 Neumann 边上的 psi 是该边上的常数, 缺省为 0。
"""
import logging
from pathlib import Path

import numpy as np

from src.mesh.model import (
    Marker,
    Mesh,
    Mesh1D,
    MeshParseError,
    MeshValidationError,
    TriMesh2D,
)

logger = logging.getLogger(__name__)


class _LineReader:
    """跳过注释与空行的逐行读取器, 记录原始行号"""

    def __init__(self, text: str):
        self._lines: list[tuple[int, list[str]]] = []
        for number, raw in enumerate(text.splitlines(), start=1):
            content = raw.split("#", 1)[0].strip()
            if content:
                self._lines.append((number, content.split()))
        self._pos = 0

    def next(self, what: str) -> tuple[int, list[str]]:
        if self._pos >= len(self._lines):
            raise MeshParseError(f"文件意外结束, 缺少 {what}")
        item = self._lines[self._pos]
        self._pos += 1
        return item

    def header(self, keyword: str) -> tuple[int, int]:
        line, tokens = self.next(f"'{keyword}' 段")
        if len(tokens) != 2 or tokens[0] != keyword:
            raise MeshParseError(f"期望 '{keyword} <count>', 实际为 '{' '.join(tokens)}'", line)
        return line, _parse_int(tokens[1], line)

    def at_end(self) -> bool:
        return self._pos >= len(self._lines)


def _parse_int(token: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise MeshParseError(f"无法解析整数 '{token}'", line)


def _parse_float(token: str, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise MeshParseError(f"无法解析数值 '{token}'", line)


def _parse_marker(token: str, line: int) -> Marker:
    try:
        return Marker(token.upper())
    except ValueError:
        raise MeshParseError(f"未知的边界标记 '{token}', 应为 D 或 N", line)


def load_mesh(path: str | Path, dimension: int | None = None) -> Mesh:
    """
    读取网格文件

    Args:
        path: 网格文件路径
        dimension: 期望的维数 (1 或 2), None 表示以文件为准

    Returns:
        校验通过的 Mesh1D 或 TriMesh2D
    """
    path = Path(path)
    if not path.exists():
        raise MeshParseError(f"网格文件不存在: {path}")
    reader = _LineReader(path.read_text(encoding="utf-8"))

    line, tokens = reader.next("'dim' 行")
    if len(tokens) != 2 or tokens[0] != "dim" or tokens[1] not in ("1", "2"):
        raise MeshParseError("第一行应为 'dim <1|2>'", line)
    dim = int(tokens[1])
    if dimension is not None and dim != dimension:
        raise MeshParseError(f"期望 {dimension} 维网格, 文件为 {dim} 维", line)

    _, n_vertices = reader.header("vertices")
    coords = []
    for _ in range(n_vertices):
        line, tokens = reader.next("顶点坐标")
        if len(tokens) != dim:
            raise MeshParseError(f"顶点坐标应有 {dim} 个分量", line)
        coords.append([_parse_float(t, line) for t in tokens])

    mesh = _load_1d(reader, coords) if dim == 1 else _load_2d(reader, coords)
    if not reader.at_end():
        line, _ = reader.next("")
        raise MeshParseError("文件末尾存在多余内容", line)
    logger.info(f"网格已加载: {path} ({dim} 维, {mesh.n_elements} 个单元)")
    return mesh


def _load_1d(reader: _LineReader, coords: list[list[float]]) -> Mesh1D:
    n = len(coords)
    header_line, count = reader.header("boundary")
    ends: dict[int, tuple[Marker, float | None]] = {}
    for _ in range(count):
        line, tokens = reader.next("边界项")
        if len(tokens) not in (2, 3):
            raise MeshParseError("一维边界项应为 'i <D|N> [psi]'", line)
        vertex = _parse_int(tokens[0], line)
        if vertex not in (0, n - 1):
            raise MeshParseError(f"一维边界项必须是端点 0 或 {n - 1}, 实际为 {vertex}", line)
        marker = _parse_marker(tokens[1], line)
        psi = _parse_float(tokens[2], line) if len(tokens) == 3 else None
        end = 0 if vertex == 0 else 1
        if end in ends:
            raise MeshParseError(f"端点 {vertex} 有多个标记", line)
        ends[end] = (marker, psi)
    if len(ends) != 2:
        raise MeshParseError("两个端点都必须给出边界标记", header_line)
    try:
        return Mesh1D(
            nodes=np.asarray(coords, dtype=float).reshape(-1),
            dirichlet_ends=(ends[0][0] is Marker.DIRICHLET, ends[1][0] is Marker.DIRICHLET),
            neumann_data=(ends[0][1], ends[1][1]),
        )
    except MeshValidationError as e:
        raise MeshValidationError(str(e), element=None, line=header_line)


def _load_2d(reader: _LineReader, coords: list[list[float]]) -> TriMesh2D:
    n = len(coords)
    _, n_tri = reader.header("triangles")
    triangles, tri_lines = [], []
    for _ in range(n_tri):
        line, tokens = reader.next("三角形")
        if len(tokens) != 3:
            raise MeshParseError("三角形应为 'i j k'", line)
        tri = [_parse_int(t, line) for t in tokens]
        if min(tri) < 0 or max(tri) >= n:
            raise MeshParseError(f"顶点编号越界 {tri}", line)
        triangles.append(tri)
        tri_lines.append(line)

    header_line, count = reader.header("boundary")
    edges, markers, values = [], [], []
    for _ in range(count):
        line, tokens = reader.next("边界边")
        if len(tokens) not in (3, 4):
            raise MeshParseError("二维边界项应为 'i j <D|N> [psi]'", line)
        i, j = _parse_int(tokens[0], line), _parse_int(tokens[1], line)
        if min(i, j) < 0 or max(i, j) >= n:
            raise MeshParseError(f"顶点编号越界 ({i}, {j})", line)
        marker = _parse_marker(tokens[2], line)
        edges.append((i, j))
        markers.append(marker)
        values.append(_parse_float(tokens[3], line) if len(tokens) == 4 else 0.0)

    try:
        return TriMesh2D(
            vertices=np.asarray(coords, dtype=float),
            triangles=np.asarray(triangles, dtype=np.int64).reshape(-1, 3),
            boundary_edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
            boundary_markers=tuple(markers),
            neumann_values=np.asarray(values, dtype=float),
        )
    except MeshValidationError as e:
        # 追溯到原始行号
        line = tri_lines[e.element] if e.element is not None else header_line
        raise MeshValidationError(str(e), line=line) from e


def save_mesh(mesh: Mesh, path: str | Path) -> None:
    """写出网格文件 (浮点数以 repr 写出, 可精确回读)"""
    lines = [f"dim {mesh.dim}", f"vertices {mesh.n_vertices}"]
    if isinstance(mesh, Mesh1D):
        lines.extend(repr(float(x)) for x in mesh.nodes)
        lines.append("boundary 2")
        for end, vertex in ((0, 0), (1, mesh.n_vertices - 1)):
            if mesh.dirichlet_ends[end]:
                lines.append(f"{vertex} D")
            else:
                lines.append(f"{vertex} N {float(mesh.neumann_data[end])!r}")
    else:
        lines.extend(f"{float(x)!r} {float(y)!r}" for x, y in mesh.vertices)
        lines.append(f"triangles {mesh.n_elements}")
        lines.extend(" ".join(str(int(v)) for v in tri) for tri in mesh.triangles)
        lines.append(f"boundary {len(mesh.boundary_edges)}")
        for (i, j), marker, psi in zip(mesh.boundary_edges, mesh.boundary_markers, mesh.neumann_values):
            if marker is Marker.DIRICHLET:
                lines.append(f"{int(i)} {int(j)} D")
            else:
                lines.append(f"{int(i)} {int(j)} N {float(psi)!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug(f"网格已写出: {path}")
