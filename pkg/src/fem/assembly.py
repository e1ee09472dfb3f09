"""
残量与雅可比矩阵组装

离散弱形式: 对每个自由顶点 j,
    R_j(u) = Σ_T ∫_T a(x,u,∇u)·∇φ_j + b(x,u) φ_j dx − ∫_{Γ_N} ψ φ_j ds
单元贡献以 numpy.add.at 归约, 结果与单元访问顺序无关。
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from src.fem.basis import ElementData, element_data, element_gradients
from src.fem.field import DiscreteField
from src.fem.quadrature import AssemblyError, get_quadrature, gauss_unit
from src.mesh.model import Mesh, Mesh1D
from src.problem.catalog import CoefficientModel
from src.problem.flux import FluxEvaluation, evaluate_flux
from src.utils.config import QuadratureConfig, get_config

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SparseSystem:
    """
    自由顶点上的稀疏方程组

    matrix 的维数等于自由 (非 Dirichlet) 顶点数; dof_map[k] 为第 k 个未知量对应的顶点编号。
    """
    matrix: csr_matrix
    rhs: np.ndarray
    dof_map: np.ndarray

    @property
    def size(self) -> int:
        return int(self.dof_map.size)


@dataclass(frozen=True)
class SemilinearSystem:
    """半线性问题的 A = S + M, S 与 M 分别保存 (均限制在自由顶点上)"""
    stiffness: csr_matrix
    mass: csr_matrix
    dof_map: np.ndarray

    @property
    def system(self) -> SparseSystem:
        return SparseSystem(
            matrix=(self.stiffness + self.mass).tocsr(),
            rhs=np.zeros(self.dof_map.size),
            dof_map=self.dof_map,
        )


def free_dofs(mesh: Mesh) -> np.ndarray:
    return np.nonzero(~mesh.dirichlet_mask)[0]


def _check_field(mesh: Mesh, u: DiscreteField) -> None:
    if u.mesh is not mesh:
        raise AssemblyError("离散场不属于给定网格")
    if not u.satisfies_dirichlet():
        raise AssemblyError("离散场在 Dirichlet 顶点上不为 0")


def _scatter_matrix(mesh: Mesh, local: np.ndarray) -> csr_matrix:
    """单元矩阵 local[m, j, i] 组装为全局矩阵 (行 j, 列 i)"""
    cells = mesh.cells
    k = cells.shape[1]
    rows = np.repeat(cells, k, axis=1).reshape(-1)
    cols = np.tile(cells, (1, k)).reshape(-1)
    n = mesh.n_vertices
    return coo_matrix((local.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()


def _restrict(matrix: csr_matrix, free: np.ndarray) -> csr_matrix:
    """行列消去 Dirichlet 顶点"""
    return matrix[free][:, free].tocsr()


def neumann_load(mesh: Mesh) -> np.ndarray:
    """∫_{Γ_N} ψ φ_j ds (ψ 在每条边上为常数)"""
    load = np.zeros(mesh.n_vertices)
    if isinstance(mesh, Mesh1D):
        for vertex, psi in mesh.neumann_loads():
            load[vertex] += psi
        return load
    for i, j, psi in mesh.neumann_edges():
        length = float(np.linalg.norm(mesh.vertices[i] - mesh.vertices[j]))
        load[i] += 0.5 * psi * length
        load[j] += 0.5 * psi * length
    return load


def _evaluate(
    model: CoefficientModel,
    mesh: Mesh,
    u: DiscreteField,
    data: ElementData,
) -> tuple[np.ndarray, np.ndarray, FluxEvaluation, np.ndarray, np.ndarray]:
    """在所有积分点上求值, 返回 (u_q, ∇u, 通量, b, ∂b/∂η)"""
    local = u.values[mesh.cells]                                  # (M, d+1)
    grad_u = np.einsum("mi,mid->md", local, data.gradients)       # (M, d)
    u_q = local @ data.rule.bary.T                                # (M, q)
    m, q = u_q.shape
    d = grad_u.shape[1]
    x = data.points.reshape(-1, d)
    eta = u_q.reshape(-1)
    xi = np.repeat(grad_u, q, axis=0)
    flux = evaluate_flux(model, x, eta, xi)
    b = model.reaction_value(x, eta).reshape(m, q)
    db = model.reaction_derivative(x, eta).reshape(m, q)
    return u_q, grad_u, flux, b, db


def _residual_from(
    mesh: Mesh,
    data: ElementData,
    flux: FluxEvaluation,
    b: np.ndarray,
) -> np.ndarray:
    m, k, d = data.gradients.shape
    q = data.rule.n_points
    w = data.rule.weights
    mean_flux = np.einsum("q,mqd->md", w, flux.flux.reshape(m, q, d))
    local = np.einsum("md,mid->mi", mean_flux, data.gradients)
    local += np.einsum("q,mq,qi->mi", w, b, data.rule.bary)
    local *= data.measure[:, None]
    residual = np.zeros(mesh.n_vertices)
    np.add.at(residual, mesh.cells, local)
    return residual - neumann_load(mesh)


def full_residual(
    model: CoefficientModel,
    mesh: Mesh,
    u: DiscreteField,
    config: QuadratureConfig | None = None,
) -> np.ndarray:
    """所有顶点上的残量 (含 Dirichlet 顶点, 供下解/上解检验使用)"""
    if u.mesh is not mesh:
        raise AssemblyError("离散场不属于给定网格")
    data = element_data(mesh, get_quadrature(mesh.dim, config))
    _, _, flux, b, _ = _evaluate(model, mesh, u, data)
    return _residual_from(mesh, data, flux, b)


def assemble_residual(
    model: CoefficientModel,
    mesh: Mesh,
    u: DiscreteField,
    config: QuadratureConfig | None = None,
) -> np.ndarray:
    """
    组装残量

    Args:
        model: 系数模型
        mesh: 网格
        u: 满足 Dirichlet 条件的离散场
        config: 积分配置, 默认取全局配置

    Returns:
        自由顶点上的残量向量, 离散问题的解是其零点
    """
    _check_field(mesh, u)
    return full_residual(model, mesh, u, config)[free_dofs(mesh)]


def assemble_jacobian(
    model: CoefficientModel,
    mesh: Mesh,
    u: DiscreteField,
    config: QuadratureConfig | None = None,
) -> SparseSystem:
    """
    组装雅可比矩阵 (残量的 Gateaux 导数)

    (j, i) 元 = ∫ (∂a/∂ξ ∇φ_i)·∇φ_j + (∂A/∂η φ_i) ∇u·∇φ_j + ∂b/∂η φ_i φ_j dx。
    返回的 rhs 为 −R(u), 即 Newton 方程的右端。
    """
    _check_field(mesh, u)
    data = element_data(mesh, get_quadrature(mesh.dim, config))
    _, grad_u, flux, b, db = _evaluate(model, mesh, u, data)
    m, k, d = data.gradients.shape
    q = data.rule.n_points
    w = data.rule.weights
    G = data.gradients
    bary = data.rule.bary

    mean_jac = np.einsum("q,mqde->mde", w, flux.jacobian.reshape(m, q, d, d))
    local = np.einsum("mjd,mde,mie->mji", G, mean_jac, G)
    # ∂A/∂η 项: 行 j 取 ∇u·∇φ_j, 列 i 取 ∫ ∂A/∂η φ_i
    eta_col = np.einsum("q,mq,qi->mi", w, flux.eta_derivative.reshape(m, q), bary)
    eta_row = np.einsum("md,mjd->mj", grad_u, G)
    local += eta_row[:, :, None] * eta_col[:, None, :]
    local += np.einsum("q,mq,qj,qi->mji", w, db, bary, bary)
    local *= data.measure[:, None, None]

    free = free_dofs(mesh)
    residual = _residual_from(mesh, data, flux, b)
    return SparseSystem(
        matrix=_restrict(_scatter_matrix(mesh, local), free),
        rhs=-residual[free],
        dof_map=free,
    )


def stiffness_matrix(mesh: Mesh) -> csr_matrix:
    """全局刚度矩阵 s_ij = Σ_T ∫_T ∇φ_i·∇φ_j (未消去 Dirichlet 顶点)"""
    grads, measure = element_gradients(mesh)
    local = np.einsum("mjd,mid->mji", grads, grads) * measure[:, None, None]
    return _scatter_matrix(mesh, local)


def mass_matrix(mesh: Mesh) -> csr_matrix:
    """全局质量矩阵 ∫ φ_i φ_j, 单元上精确: |T|(1 + δ_ij)/((d+1)(d+2))"""
    k = mesh.cells.shape[1]
    d = k - 1
    _, measure = element_gradients(mesh)
    ref = (np.ones((k, k)) + np.eye(k)) / ((d + 1) * (d + 2))
    local = measure[:, None, None] * ref[None, :, :]
    return _scatter_matrix(mesh, local)


def assemble_semilinear_system(
    model: CoefficientModel,
    mesh: Mesh,
    u1: DiscreteField,
    u2: DiscreteField,
    config: QuadratureConfig | None = None,
) -> SemilinearSystem:
    """
    半线性问题 −Δu + b(x,u) = 0 的 A = S + M

    m_ij = Σ_T ∫_T ∫_0^1 ∂b/∂η(x, z(t)) φ_i φ_j dt dx, z(t) = t·u1 + (1−t)·u2,
    t 积分使用 Gauss 公式 (quadrature.t_points)。
    """
    if not model.semilinear:
        raise AssemblyError(f"模型 {model.name} 不是半线性的 (需要 A ≡ 1)")
    if u1.mesh is not mesh or u2.mesh is not mesh:
        raise AssemblyError("离散场不属于给定网格")
    config = config or get_config().quadrature
    data = element_data(mesh, get_quadrature(mesh.dim, config))
    t_nodes, t_weights = gauss_unit(config.t_points)
    bary = data.rule.bary
    m, q, d = data.points.shape

    z1 = u1.values[mesh.cells] @ bary.T   # (M, q)
    z2 = u2.values[mesh.cells] @ bary.T
    x = data.points.reshape(-1, d)
    averaged = np.zeros((m, q))
    for t, wt in zip(t_nodes, t_weights):
        z = (t * z1 + (1.0 - t) * z2).reshape(-1)
        averaged += wt * model.reaction_derivative(x, z).reshape(m, q)
    local_mass = np.einsum("q,mq,qj,qi->mji", data.rule.weights, averaged, bary, bary)
    local_mass *= data.measure[:, None, None]

    free = free_dofs(mesh)
    stiffness = _restrict(stiffness_matrix(mesh), free)
    mass = _restrict(_scatter_matrix(mesh, local_mass), free)
    logger.debug(f"半线性方程组已组装: {free.size} 个自由度")
    return SemilinearSystem(stiffness=stiffness, mass=mass, dof_map=free)
