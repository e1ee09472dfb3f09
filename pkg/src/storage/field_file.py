"""
解文件读写

格式: 首行 "field <count>", 之后每行一个节点值 (顶点顺序与网格文件一致), '#' 之后为注释。
"""
import logging
from pathlib import Path

import numpy as np

from src.fem.field import DiscreteField
from src.mesh.model import Mesh, MeshParseError

logger = logging.getLogger(__name__)


def load_field(path: str | Path, mesh: Mesh) -> DiscreteField:
    """
    读取解文件

    Args:
        path: 解文件路径
        mesh: 配对的网格

    Returns:
        离散场
    """
    path = Path(path)
    if not path.exists():
        raise MeshParseError(f"解文件不存在: {path}")
    rows = []
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            rows.append((number, content.split()))
    if not rows:
        raise MeshParseError("解文件为空")

    line, tokens = rows[0]
    if len(tokens) != 2 or tokens[0] != "field":
        raise MeshParseError("首行应为 'field <count>'", line)
    try:
        count = int(tokens[1])
    except ValueError:
        raise MeshParseError(f"无法解析整数 '{tokens[1]}'", line)
    if count != mesh.n_vertices:
        raise MeshParseError(f"节点值个数 {count} 与网格顶点数 {mesh.n_vertices} 不一致", line)
    if len(rows) - 1 != count:
        raise MeshParseError(f"声明 {count} 个节点值, 实际为 {len(rows) - 1}", line)

    values = np.empty(count)
    for k, (line, tokens) in enumerate(rows[1:]):
        if len(tokens) != 1:
            raise MeshParseError("每行只能有一个节点值", line)
        try:
            values[k] = float(tokens[0])
        except ValueError:
            raise MeshParseError(f"无法解析数值 '{tokens[0]}'", line)
    logger.debug(f"解已加载: {path}")
    return DiscreteField(mesh, values)


def save_field(field: DiscreteField, path: str | Path) -> None:
    """写出解文件 (浮点数以 repr 写出)"""
    lines = [f"field {field.values.size}"]
    lines.extend(repr(float(v)) for v in field.values)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug(f"解已写出: {path}")
