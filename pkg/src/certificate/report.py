"""
证书报告模型
"""
from enum import Enum
from typing import Any

from pydantic import Field

from src.certificate.stieltjes import StieltjesVerdict
from src.problem.constants import ConstantsBundle, Provenance
from src.storage.report_file import ReportModel


class TheoremInapplicableError(Exception):
    """定理的前提不满足 (携带相关数值)"""

    def __init__(self, message: str, values: dict[str, float] | None = None):
        self.values = values or {}
        super().__init__(message)


class Theorem(str, Enum):
    """可检验的条件"""
    COMPARISON_1D = "comparison-1d"
    COMPARISON_2D = "comparison-2d"
    COMPARISON_2D_RELATIVE_G = "comparison-2d-relative-g"
    SEMILINEAR_ENERGY = "semilinear-energy"
    SEMILINEAR_STIELTJES = "semilinear-stieltjes"


class BoundMode(str, Enum):
    """
    证书常数的取法

    corrected-4/3: ∫_T |w| <= (4/3) δ_T(w) |T|, 椭圆性项取 γ_a·r_T (|e_i| >= r_T |e_k|);
    original-7/6: 原始推导中的 7/6 与 γ_a/r_T, 二者只在正三角形上与前者一致。
    """
    CORRECTED = "corrected-4/3"
    ORIGINAL = "original-7/6"

    @property
    def c_w(self) -> float:
        return 4.0 / 3.0 if self is BoundMode.CORRECTED else 7.0 / 6.0

    def ellipticity(self, gamma_a: float, r_T):
        """p*_T 中的椭圆性项"""
        return gamma_a * r_T if self is BoundMode.CORRECTED else gamma_a / r_T


class ElementCertificate(ReportModel):
    """单元证书"""
    elem: int = Field(..., alias="id", description="单元编号")
    delta_u: float = Field(0.0, ge=0, description="δ_T(u)")
    p_star: float | None = Field(None, description="p*_T")
    margin: float = Field(..., description="条件的余量")
    passed: bool = Field(..., alias="pass", description="余量判定结果")
    strict: bool = Field(True, description="True 表示 margin > 0, False 表示 margin >= 0")
    constants_used: dict[str, float] = Field(default_factory=dict, description="单元几何常数")


class CertificateReport(ReportModel):
    """证书报告"""
    theorem: Theorem
    applicable: bool = True
    reason: str | None = Field(None, description="不适用的原因")
    global_pass: bool = False
    bound_constant_mode: BoundMode = BoundMode.CORRECTED
    constants: dict[str, Any] = Field(default_factory=dict, description="使用的常数")
    constants_provenance: Provenance = "user-supplied"
    n_elements: int = 0
    n_failed: int = 0
    elements: list[ElementCertificate] = Field(default_factory=list)
    worst: ElementCertificate | None = None
    matrix_check: StieltjesVerdict | None = Field(None, description="在解上组装的 S + M 的 Stieltjes 检验 (--check-matrix)")

    @property
    def worst_margin(self) -> float | None:
        return self.worst.margin if self.worst is not None else None


def constants_echo(bundle: ConstantsBundle) -> dict[str, Any]:
    """报告中回显的常数 (不含采样记录)"""
    return bundle.model_dump(exclude={"sampling"}, exclude_none=True)


def build_report(
    theorem: Theorem,
    elements: list[ElementCertificate],
    bundle: ConstantsBundle,
    bound_mode: BoundMode,
) -> CertificateReport:
    """汇总单元证书 (按单元编号排序, 余量最小者为 worst)"""
    elements = sorted(elements, key=lambda e: e.elem)
    worst = min(elements, key=lambda e: (e.margin, e.elem)) if elements else None
    failed = sum(1 for e in elements if not e.passed)
    return CertificateReport(
        theorem=theorem,
        applicable=True,
        global_pass=failed == 0,
        bound_constant_mode=bound_mode,
        constants=constants_echo(bundle),
        constants_provenance=bundle.provenance,
        n_elements=len(elements),
        n_failed=failed,
        elements=elements,
        worst=worst,
    )


def inapplicable_report(
    theorem: Theorem,
    reason: str,
    bundle: ConstantsBundle,
    bound_mode: BoundMode,
    n_elements: int = 0,
) -> CertificateReport:
    return CertificateReport(
        theorem=theorem,
        applicable=False,
        reason=reason,
        global_pass=False,
        bound_constant_mode=bound_mode,
        constants=constants_echo(bundle),
        constants_provenance=bundle.provenance,
        n_elements=n_elements,
    )
