"""
检验函数、单元划分与下解/上解检验

下解/上解不等式只需对生成锥 V⁺ 的非负节点基函数 φ_j (自由顶点) 检验, 对一般 v ∈ V⁺ 由线性性得到。
"""
import logging

import numpy as np
from pydantic import Field

from src.fem.assembly import free_dofs, full_residual
from src.fem.field import DiscreteField
from src.mesh.model import Mesh
from src.problem.catalog import CoefficientModel
from src.storage.report_file import ReportModel
from src.utils.config import QuadratureConfig, get_config

logger = logging.getLogger(__name__)


class OracleError(Exception):
    """核验器错误"""
    pass


class ElementPartition(ReportModel):
    """按检验函数 v 的单元划分"""
    t_plus: list[int] = Field(default_factory=list, description="v 在单元上恒为 1")
    t_minus: list[int] = Field(default_factory=list, description="v 在单元上恒为 0")
    t_c: list[int] = Field(default_factory=list, description="v 在单元上非常数")


class SolutionCheck(ReportModel):
    """下解或上解检验结果"""
    kind: str = Field(..., description="subsolution 或 supersolution")
    holds: bool
    worst_residual: float = Field(..., description="最不利的残量分量")
    worst_vertex: int | None = None
    tol: float


class PairVerdict(ReportModel):
    """下解/上解对的检验结果"""
    is_subsolution: bool
    is_supersolution: bool
    subsolution: SolutionCheck
    supersolution: SolutionCheck
    comparison_holds: bool = Field(..., description="u1 <= u2 (逐节点, 容差内)")
    max_difference: float = Field(..., description="max(u1 − u2)")
    tol: float


def indicator_test_function(w: DiscreteField) -> DiscreteField:
    """v(a) = 1 当 w(a) > 0, 否则为 0; Dirichlet 顶点上强制为 0"""
    values = (w.values > 0.0).astype(float)
    values[w.mesh.dirichlet_mask] = 0.0
    return DiscreteField(w.mesh, values)


def partition_elements(w: DiscreteField) -> ElementPartition:
    """
    单元划分

    t_plus: v 在单元所有顶点上为 1; t_minus: 全为 0; t_c: 其余 (v 在单元上非常数)。
    """
    v = indicator_test_function(w).values[w.mesh.cells]
    ones = v.sum(axis=1)
    k = v.shape[1]
    return ElementPartition(
        t_plus=np.nonzero(ones == k)[0].tolist(),
        t_minus=np.nonzero(ones == 0)[0].tolist(),
        t_c=np.nonzero((ones > 0) & (ones < k))[0].tolist(),
    )


def _resolve_tol(tol: float | None) -> float:
    return get_config().oracle.pair_tol if tol is None else tol


def verify_subsolution(
    model: CoefficientModel,
    mesh: Mesh,
    u: DiscreteField,
    tol: float | None = None,
    quadrature: QuadratureConfig | None = None,
) -> SolutionCheck:
    """下解: 对每个自由顶点 j, R_j(u) <= tol"""
    tol = _resolve_tol(tol)
    free = free_dofs(mesh)
    residual = full_residual(model, mesh, u, quadrature)[free]
    if residual.size == 0:
        return SolutionCheck(kind="subsolution", holds=True, worst_residual=0.0, tol=tol)
    k = int(np.argmax(residual))
    return SolutionCheck(
        kind="subsolution",
        holds=bool(residual[k] <= tol),
        worst_residual=float(residual[k]),
        worst_vertex=int(free[k]),
        tol=tol,
    )


def verify_supersolution(
    model: CoefficientModel,
    mesh: Mesh,
    u: DiscreteField,
    tol: float | None = None,
    quadrature: QuadratureConfig | None = None,
) -> SolutionCheck:
    """上解: 对每个自由顶点 j, R_j(u) >= −tol"""
    tol = _resolve_tol(tol)
    free = free_dofs(mesh)
    residual = full_residual(model, mesh, u, quadrature)[free]
    if residual.size == 0:
        return SolutionCheck(kind="supersolution", holds=True, worst_residual=0.0, tol=tol)
    k = int(np.argmin(residual))
    return SolutionCheck(
        kind="supersolution",
        holds=bool(residual[k] >= -tol),
        worst_residual=float(residual[k]),
        worst_vertex=int(free[k]),
        tol=tol,
    )


def verify_pair(
    model: CoefficientModel,
    mesh: Mesh,
    u1: DiscreteField,
    u2: DiscreteField,
    tol: float | None = None,
) -> PairVerdict:
    """检验 u1 为下解、u2 为上解, 并比较 u1 <= u2"""
    tol = _resolve_tol(tol)
    sub = verify_subsolution(model, mesh, u1, tol)
    sup = verify_supersolution(model, mesh, u2, tol)
    difference = float(np.max(u1.values - u2.values))
    verdict = PairVerdict(
        is_subsolution=sub.holds,
        is_supersolution=sup.holds,
        subsolution=sub,
        supersolution=sup,
        comparison_holds=difference <= tol,
        max_difference=difference,
        tol=tol,
    )
    logger.info(
        f"下解/上解检验: 下解={sub.holds}, 上解={sup.holds}, max(u1 − u2) = {difference:.3e}"
    )
    return verdict


def comparison_lhs(
    model: CoefficientModel,
    mesh: Mesh,
    u1: DiscreteField,
    u2: DiscreteField,
    quadrature: QuadratureConfig | None = None,
) -> float:
    """
    ∫ (a(x,u1,∇u1) − a(x,u2,∇u2))·∇v + (b(x,u1) − b(x,u2)) v dx, v = indicator_test_function(u1 − u2)

    对下解/上解对该值 <= 0。Neumann 项在差中抵消。
    """
    v = indicator_test_function(u1 - u2)
    difference = full_residual(model, mesh, u1, quadrature) - full_residual(model, mesh, u2, quadrature)
    return float(difference @ v.values)
