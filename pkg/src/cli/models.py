"""
命令行运行参数与实验报告模型
"""
from enum import IntEnum
from typing import Literal

from pydantic import Field

from src.certificate.report import BoundMode, CertificateReport, Theorem
from src.storage.report_file import ReportModel


class ExitCode(IntEnum):
    """退出码"""
    PASS = 0
    FAIL = 1
    INAPPLICABLE = 2
    ERROR = 3


# ==================== 运行参数 ====================

class RunConfig(ReportModel):
    """一次命令行运行的参数 (回显在报告中)"""
    subcommand: str = Field(..., description="子命令")
    inputs: dict[str, str] = Field(default_factory=dict, description="输入文件路径")
    tol: float | None = Field(None, description="Newton 残量容差")
    max_iter: int | None = Field(None, description="Newton 最大迭代次数")
    seed: int | None = Field(None, description="随机种子")
    starts: int | None = Field(None, description="多初值个数")
    theorem: Theorem | None = None
    bound_mode: BoundMode | None = None
    output: str | None = Field(None, description="输出路径")
    format: Literal["json", "csv", "text"] = "json"


# ==================== 求解 ====================

class SolveReport(ReportModel):
    """solve 子命令报告"""
    run: RunConfig
    converged: bool
    iterations: int
    residual_norm: float
    n_vertices: int


# ==================== 多初值实验 ====================

class StartRecord(ReportModel):
    """单个初值的求解结果"""
    start: int
    converged: bool
    iterations: int
    residual_norm: float
    cluster: int | None = Field(None, description="所属解簇, 未收敛时为空")
    certificate_pass: bool | None = None
    certificate_applicable: bool | None = None
    worst_margin: float | None = None


MultistartConclusion = Literal[
    "certified-unique",
    "empirically-unique-uncertified",
    "divergent-solutions-found",
    "no-converged-solution",
]


class MultistartReport(ReportModel):
    """多初值唯一性实验报告"""
    run: RunConfig
    theorem: Theorem
    seed: int
    box: float = Field(..., description="初值取自 [−M, M] 的 M")
    starts: int
    converged: int
    clusters: int
    max_pairwise_difference: float | None = Field(None, description="收敛解之间的最大节点差")
    pairwise_differences: list[list[float]] = Field(default_factory=list)
    records: list[StartRecord] = Field(default_factory=list)
    conclusion: MultistartConclusion


# ==================== 加密流水线 ====================

class PipelineLevel(ReportModel):
    """单个加密层级的求解与证书"""
    level: int
    n_vertices: int
    n_elements: int
    max_area: float | None = Field(None, description="最大单元面积 (一维为最大区间长度)")
    converged: bool
    iterations: int
    global_pass: bool
    applicable: bool
    worst_margin: float | None = None
    worst_element: int | None = None
    interpolated_margin: float | None = Field(None, description="上一层收敛解插值到本层后的最小余量")


class PipelineReport(ReportModel):
    """逐层加密报告"""
    run: RunConfig
    theorem: Theorem
    refinements: int
    levels: list[PipelineLevel] = Field(default_factory=list)
    first_pass_level: int | None = None
    final: CertificateReport | None = None
