"""
报告输出 - JSON (pydantic 模型) 与 CSV (逐单元审计)
"""
import csv
import logging
from pathlib import Path
from typing import Iterable, Sequence

from pydantic import BaseModel, ConfigDict

logger = logging.getLogger(__name__)


class ReportModel(BaseModel):
    """报告基类: 允许按字段名或别名构造, 无穷大序列化为 Infinity"""
    model_config = ConfigDict(populate_by_name=True, ser_json_inf_nan="constants")


def dump_report(report: BaseModel) -> str:
    """报告序列化为 JSON 文本 (无穷大写作 Infinity)"""
    return report.model_dump_json(indent=2, by_alias=True)


def write_report(report: BaseModel, path: str | Path | None) -> str:
    """
    写出 JSON 报告

    Args:
        report: 报告模型
        path: 输出路径, None 时只返回文本

    Returns:
        JSON 文本
    """
    text = dump_report(report)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")
        logger.info(f"报告已写出: {path}")
    return text


def write_csv(header: Sequence[str], rows: Iterable[Sequence], path: str | Path) -> None:
    """写出 CSV 表格 (浮点数以 repr 写出)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    logger.info(f"表格已写出: {path}")
