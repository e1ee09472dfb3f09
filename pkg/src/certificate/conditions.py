"""
比较原理 / 唯一性条件的逐单元检验

所有余量均为对应不等式 "左端 − 右端" 的未缩放形式; 正的余量表示该单元满足条件。
"""
import logging
import math

import numpy as np

from src.certificate.report import (
    BoundMode,
    CertificateReport,
    ElementCertificate,
    Theorem,
    TheoremInapplicableError,
    build_report,
    inapplicable_report,
)
from src.fem.field import DiscreteField, delta_values
from src.mesh.geometry import ElementGeometry, geometry_table, mesh_quality
from src.mesh.model import Mesh, Mesh1D, MeshError, TriMesh2D
from src.problem.constants import ConstantsBundle
from src.utils.config import get_config

logger = logging.getLogger(__name__)

FULL_G = "full-g"
RELATIVE_G = "relative-g"


def _bound_mode(mode: BoundMode | str | None) -> BoundMode:
    if mode is None:
        return BoundMode(get_config().certificate.cw_mode)
    return BoundMode(mode)


def delta_T(field: DiscreteField, elem: int) -> float:
    """单元上节点值的最大差 max |φ(a_i) − φ(a_j)|"""
    if not 0 <= elem < field.mesh.n_elements:
        raise MeshError(f"无效的单元编号: {elem}")
    local = field.values[field.mesh.cells[elem]]
    return float(local.max() - local.min())


def certify_1d(
    mesh: Mesh1D,
    field: DiscreteField,
    bundle: ConstantsBundle,
    bound_mode: BoundMode | str | None = None,
) -> CertificateReport:
    """
    一维比较条件

    每个区间 margin = 2γ_a/K_η − |u(a_k) − u(a_{k−1})| − (B_η/K_η) h_k², margin > 0 通过。
    K_η = 0 且 B_η = 0 时条件恒成立 (余量记为 +inf); K_η = 0 且 B_η > 0 时定理不适用。
    """
    bound_mode = _bound_mode(bound_mode)
    theorem = Theorem.COMPARISON_1D
    if not isinstance(mesh, Mesh1D):
        return inapplicable_report(theorem, "一维条件需要一维网格", bundle, bound_mode, mesh.n_elements)

    K, B = bundle.K_eta, bundle.B_eta
    if K == 0.0 and B > 0.0:
        reason = f"K_η = 0 而 B_η = {B} > 0, 一维条件不适用"
        logger.warning(reason)
        return inapplicable_report(theorem, reason, bundle, bound_mode, mesh.n_elements)

    delta = delta_values(field)
    h = mesh.h
    if K == 0.0:
        margins = np.full(mesh.n_elements, math.inf)
    else:
        margins = 2.0 * bundle.gamma_a / K - delta - (B / K) * h ** 2

    elements = [
        ElementCertificate(
            elem=k,
            delta_u=float(delta[k]),
            margin=float(margins[k]),
            passed=bool(margins[k] > 0.0),
            constants_used={"h": float(h[k])},
        )
        for k in range(mesh.n_elements)
    ]
    report = build_report(theorem, elements, bundle, bound_mode)
    logger.info(f"一维比较条件: {'通过' if report.global_pass else '未通过'} (最小余量 {report.worst_margin:.6g})")
    return report


def _p_star_values(
    c_T: np.ndarray,
    r_T: np.ndarray,
    bundle: ConstantsBundle,
    mode: str,
    bound_mode: BoundMode,
) -> np.ndarray:
    if mode == RELATIVE_G:
        positivity = bundle.lambda0 * c_T - bundle.Lambda1 * bundle.C_f
    else:
        positivity = bundle.lambda0 * c_T - bundle.growth_term
    return np.minimum(positivity, bound_mode.ellipticity(bundle.gamma_a, r_T))


def _check_relative_growth(bundle: ConstantsBundle, c_min: float) -> None:
    if bundle.C_g_hat is None:
        raise TheoremInapplicableError("相对增长条件需要 C_g_hat", {"c_min": c_min})
    if bundle.C_g_hat > c_min:
        raise TheoremInapplicableError(
            f"Ĉ_g = {bundle.C_g_hat} 超过 c_min = {c_min}",
            {"C_g_hat": bundle.C_g_hat, "c_min": c_min},
        )


def p_star(
    geom: ElementGeometry,
    bundle: ConstantsBundle,
    mode: str = FULL_G,
    c_min: float | None = None,
    bound_mode: BoundMode | str | None = None,
) -> float:
    """
    p*_T = min{λ0 c_T − Λ1 C_f − Λ2 C_g, γ_a·r_T}  (original-7/6 模式为 γ_a / r_T)

    relative-g 模式去掉 Λ2 C_g 项, 并要求 Ĉ_g <= c_min (c_min 缺省时取本单元的 c_T)。
    结果可能非正, 由调用方判定。
    """
    if mode not in (FULL_G, RELATIVE_G):
        raise ValueError(f"未知的模式: {mode}")
    if mode == RELATIVE_G:
        _check_relative_growth(bundle, geom.c_T if c_min is None else c_min)
    value = _p_star_values(
        np.array([geom.c_T]), np.array([geom.r_T]), bundle, mode, _bound_mode(bound_mode)
    )
    return float(value[0])


def certify_2d(
    mesh: TriMesh2D,
    field: DiscreteField,
    bundle: ConstantsBundle,
    mode: str = FULL_G,
    bound_mode: BoundMode | str | None = None,
) -> CertificateReport:
    """
    二维比较条件

    前提: 网格为锐角网格, 且 λ0 c_min − Λ1 C_f − Λ2 C_g > 0 (relative-g 不含 g 项)。
    每个单元 margin = p*_T − δ_T(u)·C_w·K_η·(1 + 1/r_T) − 2·C_w·B_η·|T|·s_T, margin > 0 通过。
    """
    bound_mode = _bound_mode(bound_mode)
    theorem = Theorem.COMPARISON_2D_RELATIVE_G if mode == RELATIVE_G else Theorem.COMPARISON_2D
    if not isinstance(mesh, TriMesh2D):
        return inapplicable_report(theorem, "二维条件需要二维网格", bundle, bound_mode, mesh.n_elements)

    quality = mesh_quality(mesh)
    if not quality.acute:
        reason = f"网格不是锐角网格 (t_max = {quality.t_max:.12g})"
        logger.warning(f"二维比较条件不适用: {reason}")
        return inapplicable_report(theorem, reason, bundle, bound_mode, mesh.n_elements)

    try:
        if mode == RELATIVE_G:
            _check_relative_growth(bundle, quality.c_min)
            hypothesis = bundle.lambda0 * quality.c_min - bundle.Lambda1 * bundle.C_f
        else:
            hypothesis = bundle.lambda0 * quality.c_min - bundle.growth_term
        if hypothesis <= 0.0:
            raise TheoremInapplicableError(
                f"全局正性假设不成立: λ0 c_min − Λ1 C_f − Λ2 C_g = {hypothesis:.6g} <= 0",
                {"hypothesis": hypothesis, "c_min": quality.c_min},
            )
    except TheoremInapplicableError as e:
        logger.warning(f"二维比较条件不适用: {e}")
        return inapplicable_report(theorem, str(e), bundle, bound_mode, mesh.n_elements)

    table = geometry_table(mesh)
    c_w = bound_mode.c_w
    delta = delta_values(field)
    p = _p_star_values(table.c_T, table.r_T, bundle, mode, bound_mode)
    margins = (
        p
        - delta * c_w * bundle.K_eta * (1.0 + 1.0 / table.r_T)
        - 2.0 * c_w * bundle.B_eta * table.area * table.s_T
    )

    elements = [
        ElementCertificate(
            elem=k,
            delta_u=float(delta[k]),
            p_star=float(p[k]),
            margin=float(margins[k]),
            passed=bool(margins[k] > 0.0),
            constants_used={
                "area": float(table.area[k]),
                "c_T": float(table.c_T[k]),
                "s_T": float(table.s_T[k]),
                "r_T": float(table.r_T[k]),
            },
        )
        for k in range(mesh.n_elements)
    ]
    report = build_report(theorem, elements, bundle, bound_mode)
    logger.info(
        f"二维比较条件 ({bound_mode.value}): {'通过' if report.global_pass else '未通过'}, "
        f"{report.n_failed}/{report.n_elements} 个单元失败, 最小余量 {report.worst_margin:.6g}"
    )
    return report


def certify_semilinear(
    mesh: Mesh,
    bundle: ConstantsBundle,
    theorem: Theorem | str = Theorem.SEMILINEAR_STIELTJES,
    bound_mode: BoundMode | str | None = None,
) -> CertificateReport:
    """
    半线性问题 −Δu + b(x,u) = 0 的网格条件

    energy:    一维 2/B_η − h_k² > 0; 二维 min cot θ / (2·C_w·B_η) − |T| > 0
    stieltjes: 一维 6/B_η − h_k² >= 0; 二维 (6/B_η)·min cot θ − |T| >= 0
    B_η = 0 时余量为 +inf (无条件通过)。
    """
    bound_mode = _bound_mode(bound_mode)
    theorem = Theorem(theorem)
    if theorem not in (Theorem.SEMILINEAR_ENERGY, Theorem.SEMILINEAR_STIELTJES):
        raise ValueError(f"不是半线性条件: {theorem.value}")
    stieltjes = theorem is Theorem.SEMILINEAR_STIELTJES
    B = bundle.B_eta

    if isinstance(mesh, Mesh1D):
        size = mesh.h ** 2
        geometry = [{"h": float(h)} for h in mesh.h]
        if B == 0.0:
            margins = np.full(mesh.n_elements, math.inf)
        else:
            margins = (6.0 if stieltjes else 2.0) / B - size
    else:
        quality = mesh_quality(mesh)
        if not quality.acute:
            reason = f"网格不是锐角网格 (t_max = {quality.t_max:.12g})"
            logger.warning(f"半线性条件不适用: {reason}")
            return inapplicable_report(theorem, reason, bundle, bound_mode, mesh.n_elements)
        table = geometry_table(mesh)
        min_cot = 1.0 / np.tan(table.angles.max(axis=1))
        geometry = [
            {"area": float(a), "min_cot": float(c)} for a, c in zip(table.area, min_cot)
        ]
        if B == 0.0:
            margins = np.full(mesh.n_elements, math.inf)
        elif stieltjes:
            margins = 6.0 / B * min_cot - table.area
        else:
            margins = min_cot / (2.0 * bound_mode.c_w * B) - table.area

    passed = margins >= 0.0 if stieltjes else margins > 0.0
    elements = [
        ElementCertificate(
            elem=k,
            margin=float(margins[k]),
            passed=bool(passed[k]),
            strict=not stieltjes,
            constants_used=geometry[k],
        )
        for k in range(mesh.n_elements)
    ]
    report = build_report(theorem, elements, bundle, bound_mode)
    logger.info(f"半线性条件 {theorem.value}: {'通过' if report.global_pass else '未通过'}")
    return report


def certify(
    theorem: Theorem | str,
    mesh: Mesh,
    bundle: ConstantsBundle,
    field: DiscreteField | None = None,
    bound_mode: BoundMode | str | None = None,
) -> CertificateReport:
    """按条件编号分派"""
    theorem = Theorem(theorem)
    if theorem in (Theorem.SEMILINEAR_ENERGY, Theorem.SEMILINEAR_STIELTJES):
        return certify_semilinear(mesh, bundle, theorem, bound_mode)
    if field is None:
        raise ValueError(f"条件 {theorem.value} 需要离散解")
    if theorem is Theorem.COMPARISON_1D:
        return certify_1d(mesh, field, bundle, bound_mode)
    mode = RELATIVE_G if theorem is Theorem.COMPARISON_2D_RELATIVE_G else FULL_G
    return certify_2d(mesh, field, bundle, mode, bound_mode)
