"""
带回溯线搜索的阻尼 Newton 求解器
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import splu

from src.fem.assembly import assemble_jacobian, assemble_residual
from src.fem.field import DiscreteField, zero_field
from src.fem.quadrature import AssemblyError
from src.mesh.model import Mesh
from src.problem.catalog import CoefficientModel
from src.utils.config import QuadratureConfig, SolverConfig, get_config

logger = logging.getLogger(__name__)


class SolverError(Exception):
    """线性求解失败 (奇异雅可比矩阵)"""

    def __init__(self, message: str, iteration: int):
        self.iteration = iteration
        super().__init__(f"第 {iteration} 次迭代: {message}")


@dataclass(frozen=True)
class NewtonStep:
    """单次迭代记录"""
    iteration: int
    residual_norm: float
    damping: float


@dataclass(frozen=True)
class SolveResult:
    """求解结果"""
    field: DiscreteField
    iterations: int
    residual_norm: float
    converged: bool
    history: list[NewtonStep] = field(default_factory=list)


def solve_newton(
    model: CoefficientModel,
    mesh: Mesh,
    config: SolverConfig | None = None,
    u0: DiscreteField | None = None,
    quadrature: QuadratureConfig | None = None,
) -> SolveResult:
    """
    阻尼 Newton 迭代

    步长从 1 开始按 damping_factor 回溯, 残量 ℓ² 范数任意下降即接受;
    步长低于 min_step 仍无下降时停止并返回 converged = False。
    初始残量已满足容差时不做迭代。

    Args:
        model: 系数模型
        mesh: 网格
        config: 求解器配置, 默认取全局配置
        u0: 初始猜测, 默认为零场
        quadrature: 积分配置

    Returns:
        求解结果
    """
    config = config or get_config().solver
    u = u0 if u0 is not None else zero_field(mesh)
    if u.mesh is not mesh:
        raise AssemblyError("初始猜测不属于给定网格")
    if not u.satisfies_dirichlet():
        raise AssemblyError("初始猜测不满足 Dirichlet 条件")

    residual = assemble_residual(model, mesh, u, quadrature)
    norm = float(np.linalg.norm(residual))
    history: list[NewtonStep] = []
    converged = norm <= config.tol
    iteration = 0

    while not converged and iteration < config.max_iter:
        iteration += 1
        system = assemble_jacobian(model, mesh, u, quadrature)
        try:
            lu = splu(system.matrix.tocsc())
            step = lu.solve(system.rhs)
        except RuntimeError as e:
            raise SolverError(f"雅可比矩阵奇异: {e}", iteration)
        if not np.all(np.isfinite(step)):
            raise SolverError("线性求解结果含非有限值", iteration)

        damping = 1.0
        accepted = False
        while damping >= config.min_step:
            trial = u.with_free_values(u.free_values + damping * step)
            trial_residual = assemble_residual(model, mesh, trial, quadrature)
            trial_norm = float(np.linalg.norm(trial_residual))
            if trial_norm < norm:
                accepted = True
                break
            damping *= config.damping_factor

        if not accepted:
            logger.warning(f"线搜索失败, 第 {iteration} 次迭代停止 (残量 {norm:.3e})")
            history.append(NewtonStep(iteration=iteration, residual_norm=norm, damping=0.0))
            break

        u, residual, norm = trial, trial_residual, trial_norm
        history.append(NewtonStep(iteration=iteration, residual_norm=norm, damping=damping))
        logger.debug(f"Newton 第 {iteration} 次迭代: 残量 {norm:.3e}, 步长 {damping:g}")
        converged = norm <= config.tol

    if converged:
        logger.info(f"Newton 收敛: {iteration} 次迭代, 残量 {norm:.3e}")
    else:
        logger.warning(f"Newton 未收敛: {iteration} 次迭代, 残量 {norm:.3e}")
    return SolveResult(
        field=u,
        iterations=iteration,
        residual_norm=norm,
        converged=converged,
        history=history,
    )
