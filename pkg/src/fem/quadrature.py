"""
单纯形上的数值积分公式 (重心坐标形式, 权重之和为 1)
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from src.utils.config import QuadratureConfig, get_config


class AssemblyError(Exception):
    """组装错误 (积分配置、Dirichlet 数据或模型类型不符)"""
    pass


@dataclass(frozen=True)
class QuadratureRule:
    """
    积分公式

    bary 形状 (q, d+1) 为积分点的重心坐标, weights 形状 (q,) 之和为 1,
    单元上的积分为 measure · Σ w_q f(x_q)。
    """
    name: str
    bary: np.ndarray
    weights: np.ndarray

    @property
    def n_points(self) -> int:
        return int(self.weights.size)


def gauss_unit(n: int) -> tuple[np.ndarray, np.ndarray]:
    """[0,1] 上 n 点 Gauss-Legendre 节点与权重 (权重之和为 1)"""
    if n < 1:
        raise AssemblyError(f"Gauss 点数必须为正: {n}")
    nodes, weights = leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights


@lru_cache(maxsize=None)
def interval_rule(points: int) -> QuadratureRule:
    t, w = gauss_unit(points)
    return QuadratureRule(name=f"gauss-{points}", bary=np.column_stack([1.0 - t, t]), weights=w)


def _permutations(a: float, b: float) -> list[tuple[float, float, float]]:
    return [(a, b, b), (b, a, b), (b, b, a)]


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    """
    三角形积分公式

    1 阶: 重心; 2 阶: 3 点; 3-4 阶: 6 点对称公式;
    更高阶: 退化 Gauss 乘积公式 (Duffy 变换)。
    """
    if degree < 1:
        raise AssemblyError(f"积分阶数必须为正: {degree}")
    if degree == 1:
        bary = np.array([[1.0 / 3.0] * 3])
        weights = np.array([1.0])
    elif degree == 2:
        bary = np.array(_permutations(2.0 / 3.0, 1.0 / 6.0))
        weights = np.full(3, 1.0 / 3.0)
    elif degree <= 4:
        bary = np.array(
            _permutations(0.816847572980459, 0.091576213509771)
            + _permutations(0.108103018168070, 0.445948490915965)
        )
        weights = np.array([0.109951743655322] * 3 + [0.223381589678011] * 3)
        weights = weights / weights.sum()
    else:
        n = math.ceil((degree + 2) / 2)
        t, w = gauss_unit(n)
        u, v = np.meshgrid(t, t, indexing="ij")
        wu, wv = np.meshgrid(w, w, indexing="ij")
        xi = u.reshape(-1)
        eta = ((1.0 - u) * v).reshape(-1)
        # 参考三角形面积为 1/2, 归一化后权重乘 2
        weights = (2.0 * wu * wv * (1.0 - u)).reshape(-1)
        bary = np.column_stack([1.0 - xi - eta, xi, eta])
    return QuadratureRule(name=f"triangle-{degree}", bary=bary, weights=weights)


def get_quadrature(dimension: int, config: QuadratureConfig | None = None) -> QuadratureRule:
    """按配置取得 dimension 维单元上的积分公式"""
    config = config or get_config().quadrature
    if dimension == 1:
        if config.interval_points is None:
            raise AssemblyError("未配置区间积分点数 (quadrature.interval_points)")
        return interval_rule(int(config.interval_points))
    if config.triangle_degree is None:
        raise AssemblyError("未配置三角形积分阶数 (quadrature.triangle_degree)")
    return triangle_rule(int(config.triangle_degree))
