"""
逐单元核验比较原理证明中的三项下界

对 t_c 中的单元 T, w = u1 − u2, z(t) = t·u1 + (1−t)·u2, 直接用数值积分计算
    扩散项   ∫_T ∫_0^1 (∂a/∂ξ(x,u1,∇z(t)) ∇w)·∇v
    η 项     ∫_T ∫_0^1 ∂A/∂η(x,z(t),∇u2) w ∇u2·∇v
    反应项   ∫_T ∫_0^1 ∂b/∂η(x,z(t)) w v
并与对应的下界比较。顶点按 w(a_i) >= w(a_j) >= w(a_k) 排序, 并列时按全局编号升序。
"""
import logging
import math

import numpy as np
from pydantic import Field

from src.certificate.report import BoundMode
from src.fem.basis import element_data
from src.fem.field import DiscreteField
from src.fem.quadrature import gauss_unit, get_quadrature
from src.mesh.geometry import geometry_table
from src.mesh.model import Mesh, Mesh1D
from src.oracle.checks import OracleError, indicator_test_function, partition_elements
from src.problem.catalog import CoefficientModel
from src.problem.constants import ConstantsBundle
from src.problem.flux import evaluate_flux
from src.storage.report_file import ReportModel
from src.utils.config import get_config

logger = logging.getLogger(__name__)

# 下界比较的容差
LEMMA_TOL = 1e-10


class LemmaAudit(ReportModel):
    """单元上三项积分与其下界"""
    elem: int
    ordering: list[int] = Field(..., description="按 w 降序排列的全局顶点编号")
    w_values: list[float]
    delta_w: float
    delta_u2: float
    diffusion_lhs: float
    diffusion_rhs: float
    eta_lhs: float
    eta_rhs: float
    reaction_lhs: float
    reaction_rhs: float
    total_lhs: float
    total_rhs: float = Field(..., description="三项下界之和")
    bound_constant_mode: BoundMode

    def holds(self, tol: float = LEMMA_TOL) -> dict[str, bool]:
        return {
            "diffusion": self.diffusion_lhs >= self.diffusion_rhs - tol,
            "eta": self.eta_lhs >= self.eta_rhs - tol,
            "reaction": self.reaction_lhs >= self.reaction_rhs - tol,
        }


class AbsIntegralBound(ReportModel):
    """∫_T |w| 的精确值与界 C_w δ_T(w) |T|"""
    elem: int
    exact: float
    bound: float
    in_t_c: bool = Field(..., description="界只在 t_c 单元上适用")
    bound_constant_mode: BoundMode


def _ordering(w: DiscreteField, elem: int) -> np.ndarray:
    """单元的局部顶点位置, 按 w 降序, 并列按全局编号升序"""
    cell = w.mesh.cells[elem]
    keys = sorted(range(len(cell)), key=lambda p: (-w.values[cell[p]], cell[p]))
    return np.array(keys)


def _element_integrals(
    model: CoefficientModel,
    mesh: Mesh,
    u1: DiscreteField,
    u2: DiscreteField,
    v: DiscreteField,
    elem: int,
    t_points: int,
) -> tuple[float, float, float]:
    data = element_data(mesh, get_quadrature(mesh.dim))
    rule = data.rule
    cell = mesh.cells[elem]
    G = data.gradients[elem]             # (k, d)
    x = data.points[elem]                # (q, d)
    measure = float(data.measure[elem])

    w_loc = u1.values[cell] - u2.values[cell]
    grad_u1 = u1.values[cell] @ G
    grad_u2 = u2.values[cell] @ G
    grad_w = w_loc @ G
    grad_v = v.values[cell] @ G
    u1_q = rule.bary @ u1.values[cell]
    u2_q = rule.bary @ u2.values[cell]
    w_q = rule.bary @ w_loc
    v_q = rule.bary @ v.values[cell]
    q = rule.n_points

    diffusion = eta = reaction = 0.0
    for t, wt in zip(*gauss_unit(t_points)):
        grad_z = t * grad_u1 + (1.0 - t) * grad_u2
        z_q = t * u1_q + (1.0 - t) * u2_q
        jac = evaluate_flux(model, x, u1_q, np.tile(grad_z, (q, 1))).jacobian
        diffusion += wt * float(rule.weights @ np.einsum("d,qde,e->q", grad_w, jac, grad_v))
        dA = evaluate_flux(model, x, z_q, np.tile(grad_u2, (q, 1))).eta_derivative
        eta += wt * float(rule.weights @ (dA * w_q)) * float(grad_u2 @ grad_v)
        db = model.reaction_derivative(x, z_q)
        reaction += wt * float(rule.weights @ (db * w_q * v_q))
    return diffusion * measure, eta * measure, reaction * measure


def lemma_bound_check(
    model: CoefficientModel,
    mesh: Mesh,
    u1: DiscreteField,
    u2: DiscreteField,
    elem: int,
    bundle: ConstantsBundle,
    bound_mode: BoundMode | str | None = None,
    relative_g: bool = False,
    t_points: int | None = None,
) -> LemmaAudit:
    """
    计算单元 elem 上三项积分及其下界

    二维:
      扩散项 >= 1/(2 sin θ_j)·{(w_i − w_j) e_T + (w_j − w_k) p_T}   (w_j <= 0)
             >= 1/(2 sin θ_j)·{(w_i − w_j) p_T + (w_j − w_k) e_T}   (w_j > 0)
        其中 e_T = γ_a·r_T (original-7/6 模式为 γ_a/r_T)
             p_T = λ0 cos θ_j − Λ1 C_f − Λ2 C_g (relative_g 时不含 g 项)
      η 项   >= −δ_T(w) δ_T(u2) C_w K_η (1 + 1/r_T) / (2 sin θ_j)
      反应项 >= −δ_T(w) C_w B_η |T|
    一维 (h 为区间长度, Δ 表示区间两端之差):
      扩散项 >= γ_a |Δw| / h;  η 项 >= −|Δw| K_η |Δu2| / (2h);  反应项 >= −|Δw| B_η h / 2
    """
    mode = BoundMode(bound_mode or get_config().certificate.cw_mode)
    t_points = t_points or get_config().quadrature.oracle_t_points
    w = u1 - u2
    if elem not in partition_elements(w).t_c:
        raise OracleError(f"单元 {elem} 不在 t_c 中, 引理不适用")
    v = indicator_test_function(w)

    order = _ordering(w, elem)
    cell = mesh.cells[elem]
    wv = w.values[cell][order]
    delta_w = float(wv[0] - wv[-1])
    u2_loc = u2.values[cell]
    delta_u2 = float(u2_loc.max() - u2_loc.min())
    diffusion, eta, reaction = _element_integrals(model, mesh, u1, u2, v, elem, t_points)

    if isinstance(mesh, Mesh1D):
        h = float(mesh.h[elem])
        diffusion_rhs = bundle.gamma_a * delta_w / h
        eta_rhs = -delta_w * bundle.K_eta * delta_u2 / (2.0 * h)
        reaction_rhs = -delta_w * bundle.B_eta * h / 2.0
    else:
        table = geometry_table(mesh)
        j = order[1]
        theta_j = float(table.angles[elem, j])
        r_T = float(table.r_T[elem])
        area = float(table.area[elem])
        growth = bundle.Lambda1 * bundle.C_f if relative_g else bundle.growth_term
        p_T = bundle.lambda0 * math.cos(theta_j) - growth
        ellipticity = mode.ellipticity(bundle.gamma_a, r_T)
        w_i, w_j, w_k = wv
        scale = 1.0 / (2.0 * math.sin(theta_j))
        if w_j <= 0.0:
            diffusion_rhs = scale * ((w_i - w_j) * ellipticity + (w_j - w_k) * p_T)
        else:
            diffusion_rhs = scale * ((w_i - w_j) * p_T + (w_j - w_k) * ellipticity)
        eta_rhs = -delta_w * delta_u2 * mode.c_w * bundle.K_eta * (1.0 + 1.0 / r_T) * scale
        reaction_rhs = -delta_w * mode.c_w * bundle.B_eta * area

    audit = LemmaAudit(
        elem=elem,
        ordering=[int(cell[p]) for p in order],
        w_values=[float(x) for x in wv],
        delta_w=delta_w,
        delta_u2=delta_u2,
        diffusion_lhs=diffusion,
        diffusion_rhs=float(diffusion_rhs),
        eta_lhs=eta,
        eta_rhs=float(eta_rhs),
        reaction_lhs=reaction,
        reaction_rhs=float(reaction_rhs),
        total_lhs=diffusion + eta + reaction,
        total_rhs=float(diffusion_rhs + eta_rhs + reaction_rhs),
        bound_constant_mode=mode,
    )
    logger.debug(f"单元 {elem} 引理核验: {audit.holds()}")
    return audit


def _clip_positive(points: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """按线性函数的零线裁剪凸多边形, 保留 values >= 0 的部分"""
    out_p, out_v = [], []
    n = len(values)
    for a in range(n):
        b = (a + 1) % n
        pa, pb, va, vb = points[a], points[b], values[a], values[b]
        if va >= 0.0:
            out_p.append(pa)
            out_v.append(va)
        if (va > 0.0 and vb < 0.0) or (va < 0.0 and vb > 0.0):
            s = va / (va - vb)
            out_p.append(pa + s * (pb - pa))
            out_v.append(0.0)
    return np.array(out_p), np.array(out_v)


def _positive_integral(points: np.ndarray, values: np.ndarray) -> float:
    """∫ w⁺ 精确值 (线性函数在裁剪后的多边形上按扇形剖分积分)"""
    if points.shape[1] == 1:
        (x0, x1), (a, b) = points[:, 0], values
        h = abs(x1 - x0)
        if a >= 0.0 and b >= 0.0:
            return h * (a + b) / 2.0
        if a <= 0.0 and b <= 0.0:
            return 0.0
        top = max(a, b)
        return h * top / (abs(a) + abs(b)) * top / 2.0
    poly, vals = _clip_positive(points, values)
    total = 0.0
    for m in range(1, len(vals) - 1):
        p0, p1, p2 = poly[0], poly[m], poly[m + 1]
        area = 0.5 * abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]))
        total += area * (vals[0] + vals[m] + vals[m + 1]) / 3.0
    return total


def abs_integral_bound(
    w: DiscreteField,
    elem: int,
    bound_mode: BoundMode | str | None = None,
) -> AbsIntegralBound:
    """
    ∫_T |w| 的精确值 (沿零线剖分) 与界 C_w δ_T(w) |T|

    一维的界为 δ h / 2。∫|w| = 2∫w⁺ − ∫w。
    """
    mode = BoundMode(bound_mode or get_config().certificate.cw_mode)
    mesh = w.mesh
    cell = mesh.cells[elem]
    points = mesh.points[cell]
    values = w.values[cell]
    if isinstance(mesh, Mesh1D):
        measure = float(mesh.h[elem])
        bound_factor = 0.5
    else:
        measure = float(geometry_table(mesh).area[elem])
        bound_factor = mode.c_w
    integral = measure * float(values.mean())
    exact = 2.0 * _positive_integral(points, values) - integral
    delta = float(values.max() - values.min())
    return AbsIntegralBound(
        elem=elem,
        exact=exact,
        bound=bound_factor * delta * measure,
        in_t_c=elem in partition_elements(w).t_c,
        bound_constant_mode=mode,
    )
