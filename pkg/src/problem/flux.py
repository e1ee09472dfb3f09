"""
通量求值 a(x,η,ξ) = A(x,η,ξ)ξ 及其导数
"""
from dataclasses import dataclass

import numpy as np

from src.problem.catalog import CoefficientModel

# |ξ| 低于该值时取 ∂a/∂ξ 的极限 A·I
ZERO_GRADIENT = 1e-300


@dataclass(frozen=True)
class FluxEvaluation:
    """通量求值结果"""
    diffusion: np.ndarray   # A, 形状 (n,)
    flux: np.ndarray        # a = Aξ, 形状 (n, d)
    jacobian: np.ndarray    # ∂a/∂ξ, 形状 (n, d, d), 按构造对称
    eta_derivative: np.ndarray  # ∂A/∂η, 形状 (n,)


def evaluate_flux(
    model: CoefficientModel,
    x: np.ndarray,
    eta: np.ndarray,
    xi: np.ndarray,
) -> FluxEvaluation:
    """
    批量求值

    ∂a/∂ξ = A·I + (A1·s f'(s) + A2·s g'(s))·n nᵀ, n = ξ/|ξ|; |ξ| < 1e-300 时取 A·I。

    Args:
        model: 系数模型
        x: 空间点, 形状 (n, d)
        eta: 解的取值, 形状 (n,)
        xi: 梯度, 形状 (n, d)
    """
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    s = np.linalg.norm(xi, axis=1)

    A = model.diffusion(x, eta, s)
    sA = model.diffusion_s_derivative(x, eta, s)
    dA = model.diffusion_eta_derivative(x, eta, s)

    d = xi.shape[1]
    nonzero = s >= ZERO_GRADIENT
    n = np.zeros_like(xi)
    n[nonzero] = xi[nonzero] / s[nonzero, None]
    jac = A[:, None, None] * np.eye(d)[None, :, :]
    jac = jac + np.where(nonzero, sA, 0.0)[:, None, None] * n[:, :, None] * n[:, None, :]
    return FluxEvaluation(
        diffusion=A,
        flux=A[:, None] * xi,
        jacobian=jac,
        eta_derivative=dA,
    )


def eval_flux(
    model: CoefficientModel,
    x: np.ndarray | float,
    eta: np.ndarray | float,
    xi: np.ndarray | float,
) -> tuple[np.ndarray, np.ndarray, float]:
    """
    单点通量求值

    Args:
        model: 系数模型
        x: 空间点 (d 维向量, 一维时可为标量)
        eta: 解的取值
        xi: 梯度 (d 维向量, 一维时可为标量)

    Returns:
        (a, ∂a/∂ξ, ∂A/∂η), a 为 d 维向量, ∂a/∂ξ 为 d×d 矩阵
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    result = evaluate_flux(model, x[None, :], np.array([float(eta)]), xi[None, :])
    return result.flux[0], result.jacobian[0], float(result.eta_derivative[0])
