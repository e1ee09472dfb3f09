"""
系数模型目录 - A(x,η,ξ) = A0(x,η) + A1(x,η) f(|ξ|) + A2(x) g(|ξ|) 与反应项 b(x,η)

所有函数按样本向量化: x 形状 (n, d), eta 与 s 形状 (n,)。
"""
import importlib
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable

import numpy as np
from scipy.optimize import brentq

logger = logging.getLogger(__name__)

ScalarField = Callable[[np.ndarray, np.ndarray], np.ndarray]
SpatialField = Callable[[np.ndarray], np.ndarray]
Profile = Callable[[np.ndarray], np.ndarray]


class CoefficientError(Exception):
    """系数模型错误 (未知名称或参数越界)"""
    pass


class GrowthMode(str, Enum):
    """g 的增长条件"""
    BOUNDED = "bounded-derivative"   # s|g'(s)| <= C_g
    RELATIVE = "relative-growth"     # s|g'(s)| <= Ĉ_g g(s)
    ABSENT = "absent"


class Slot(str, Enum):
    """梯度非线性项所在位置"""
    F = "f"
    G = "g"


@dataclass(frozen=True)
class Kernel:
    """
    梯度非线性 φ(s), s = |ξ|

    s_derivative 直接给出 s·φ'(s), 该量在 s -> 0 时有界, 雅可比矩阵只使用这一形式。
    """
    name: str
    value: Profile
    s_derivative: Profile
    params: dict[str, float] = field(default_factory=dict)

    def derivative(self, s: np.ndarray) -> np.ndarray:
        """φ'(s), 仅对 s > 0 有意义 (s = 0 处返回 0)"""
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        positive = s > 0.0
        out[positive] = self.s_derivative(s[positive]) / s[positive]
        return out


@dataclass(frozen=True)
class Reaction:
    """反应项 b(x,η) 及 ∂b/∂η"""
    name: str
    value: ScalarField
    derivative: ScalarField
    params: dict[str, float] = field(default_factory=dict)

    def shifted(self, c: float) -> "Reaction":
        """b + c"""
        value = self.value
        params = dict(self.params)
        params["shift"] = params.get("shift", 0.0) + c
        return Reaction(
            name=self.name,
            value=lambda x, eta: value(x, eta) + c,
            derivative=self.derivative,
            params=params,
        )


def _zeros(x: np.ndarray, eta: np.ndarray) -> np.ndarray:
    return np.zeros(np.shape(eta), dtype=float)


def _spatial_constant(value: float) -> SpatialField:
    def fn(x: np.ndarray) -> np.ndarray:
        return np.full(np.shape(x)[0], float(value))
    return fn


def _tanh_profile(base: float, slope: float) -> tuple[ScalarField, ScalarField]:
    """base + slope·tanh(η) 及其 η 导数"""
    def value(x: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return base + slope * np.tanh(eta)

    def derivative(x: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return slope / np.cosh(eta) ** 2

    return value, derivative


@dataclass(frozen=True)
class CoefficientModel:
    """
    拟线性系数模型

    CoefficientModel 不可变, 所有回调必须是纯函数, 可在多个线程中并发求值。
    """
    name: str
    a0: ScalarField
    a0_deta: ScalarField
    a1: ScalarField = _zeros
    a1_deta: ScalarField = _zeros
    a2: SpatialField = _spatial_constant(0.0)
    f: Kernel | None = None
    g: Kernel | None = None
    g_mode: GrowthMode = GrowthMode.ABSENT
    c_g_hat: float | None = None
    reaction: Reaction = field(default_factory=lambda: make_reaction("zero"))
    params: dict[str, Any] = field(default_factory=dict)
    semilinear: bool = False

    def diffusion(self, x: np.ndarray, eta: np.ndarray, s: np.ndarray) -> np.ndarray:
        """A(x,η,ξ), s = |ξ|"""
        value = np.asarray(self.a0(x, eta), dtype=float) + np.zeros(np.shape(s))
        if self.f is not None:
            value = value + self.a1(x, eta) * self.f.value(s)
        if self.g is not None:
            value = value + self.a2(x) * self.g.value(s)
        return value

    def diffusion_s_derivative(self, x: np.ndarray, eta: np.ndarray, s: np.ndarray) -> np.ndarray:
        """s·∂A/∂s = A1·s f'(s) + A2·s g'(s)"""
        value = np.zeros(np.shape(s), dtype=float)
        if self.f is not None:
            value = value + self.a1(x, eta) * self.f.s_derivative(s)
        if self.g is not None:
            value = value + self.a2(x) * self.g.s_derivative(s)
        return value

    def diffusion_eta_derivative(self, x: np.ndarray, eta: np.ndarray, s: np.ndarray) -> np.ndarray:
        """∂A/∂η = ∂A0/∂η + ∂A1/∂η·f(s)"""
        value = np.asarray(self.a0_deta(x, eta), dtype=float) + np.zeros(np.shape(s))
        if self.f is not None:
            value = value + self.a1_deta(x, eta) * self.f.value(s)
        return value

    def reaction_value(self, x: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return np.asarray(self.reaction.value(x, eta), dtype=float) + np.zeros(np.shape(eta))

    def reaction_derivative(self, x: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return np.asarray(self.reaction.derivative(x, eta), dtype=float) + np.zeros(np.shape(eta))

    def with_reaction(self, reaction: Reaction) -> "CoefficientModel":
        return replace(self, reaction=reaction)

    def with_reaction_shift(self, c: float) -> "CoefficientModel":
        """将反应项替换为 b + c (用于构造下解/上解对)"""
        return replace(self, reaction=self.reaction.shifted(c))


# ==================== 梯度非线性目录 ====================

def _power_kernel(kappa: float, alpha: float) -> Kernel:
    if kappa <= 0.0:
        raise CoefficientError(f"power_kernel 要求 kappa > 0, 实际为 {kappa}")
    if alpha < 0.0:
        raise CoefficientError(f"power_kernel 要求 alpha >= 0, 实际为 {alpha}")
    return Kernel(
        name="power_kernel",
        value=lambda s: (kappa + s ** 2) ** (-alpha),
        s_derivative=lambda s: -2.0 * alpha * s ** 2 * (kappa + s ** 2) ** (-alpha - 1.0),
        params={"kappa": kappa, "alpha": alpha},
    )


def _glacier_kernel(k0: float) -> Kernel:
    if k0 <= 0.0:
        raise CoefficientError(f"glacier 要求 K0 > 0, 实际为 {k0}")

    def s_derivative(s: np.ndarray) -> np.ndarray:
        root = np.sqrt(k0 ** 2 + 4.0 * s)
        return -4.0 * s / (root * (k0 + root) ** 2)

    return Kernel(
        name="glacier",
        value=lambda s: 2.0 / (k0 + np.sqrt(k0 ** 2 + 4.0 * s)),
        s_derivative=s_derivative,
        params={"K0": k0},
    )


def _arctan_kernel() -> Kernel:
    return Kernel(
        name="arctan",
        value=np.arctan,
        s_derivative=lambda s: s / (1.0 + s ** 2),
    )


def _tanh_kernel() -> Kernel:
    return Kernel(
        name="tanh",
        value=np.tanh,
        s_derivative=lambda s: s / np.cosh(s) ** 2,
    )


def _log_growth_kernel(kappa: float) -> Kernel:
    if kappa <= 1.0:
        raise CoefficientError(f"log_growth 要求 kappa > 1, 实际为 {kappa}")
    return Kernel(
        name="log_growth",
        value=lambda s: np.log(kappa + s ** 2),
        s_derivative=lambda s: 2.0 * s ** 2 / (kappa + s ** 2),
        params={"kappa": kappa},
    )


def _p_laplacian_kernel(p: float, eps: float) -> Kernel:
    if p <= 1.0:
        raise CoefficientError(f"p_laplacian 要求 p > 1, 实际为 {p}")
    if eps < 0.0:
        raise CoefficientError(f"p_laplacian 要求 eps >= 0, 实际为 {eps}")
    if p < 2.0 and eps == 0.0:
        raise CoefficientError("p < 2 时 |ξ|^(p-2) 在 ξ = 0 处无界, 需要 eps > 0")
    e = 0.5 * (p - 2.0)

    def s_derivative(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        r2 = eps + s ** 2
        # s^2 / (eps + s^2) 在 eps = 0, s = 0 处取极限 0
        ratio = np.divide(s ** 2, r2, out=np.zeros_like(r2), where=r2 > 0.0)
        return (p - 2.0) * ratio * r2 ** e

    return Kernel(
        name="p_laplacian",
        value=lambda s: (eps + np.asarray(s, dtype=float) ** 2) ** e,
        s_derivative=s_derivative,
        params={"p": p, "eps": eps},
    )


KERNELS = ("power_kernel", "mean_curvature", "glacier", "arctan", "tanh", "log_growth", "p_laplacian")
CATALOG = KERNELS + ("constant", "user")

# 默认所在位置: 有界核放在 f, 无界核放在 g
_DEFAULT_SLOT = {
    "power_kernel": Slot.F,
    "mean_curvature": Slot.F,
    "glacier": Slot.F,
    "arctan": Slot.F,
    "tanh": Slot.F,
    "log_growth": Slot.G,
    "p_laplacian": Slot.G,
}


def _build_kernel(name: str, params: dict[str, Any]) -> Kernel:
    if name == "power_kernel":
        return _power_kernel(float(params.get("kappa", 1.0)), float(params.get("alpha", 0.5)))
    if name == "mean_curvature":
        return replace(_power_kernel(1.0, 0.5), name="mean_curvature")
    if name == "glacier":
        return _glacier_kernel(float(params.get("K0", params.get("k0", 1.0))))
    if name == "arctan":
        return _arctan_kernel()
    if name == "tanh":
        return _tanh_kernel()
    if name == "log_growth":
        return _log_growth_kernel(float(params.get("kappa", 2.0)))
    if name == "p_laplacian":
        return _p_laplacian_kernel(float(params.get("p", 2.0)), float(params.get("eps", 0.0)))
    raise CoefficientError(f"未知的系数模型: {name}")


def make_coefficient(
    name: str,
    params: dict[str, Any] | None = None,
    reaction: Reaction | None = None,
) -> CoefficientModel:
    """
    从目录构造系数模型

    公共参数: a0, a0_eta (A0 = a0 + a0_eta·tanh η), a1, a1_eta (A1 同理), a2, slot ("f" 或 "g")。
    p_laplacian 固定放在 g 位置, 以相对增长方式给出 Ĉ_g = |p - 2|。

    Args:
        name: 目录名称, 见 CATALOG
        params: 参数
        reaction: 反应项, 默认 b ≡ 0

    Returns:
        系数模型
    """
    params = dict(params or {})
    reaction = reaction or make_reaction("zero")

    if name == "user":
        return _load_user_model(params, reaction)
    if name not in CATALOG:
        raise CoefficientError(f"未知的系数模型: {name} (可选: {', '.join(CATALOG)})")

    a0 = float(params.get("a0", params.get("value", 1.0)))
    a0_eta = float(params.get("a0_eta", 0.0))
    if a0 - abs(a0_eta) <= 0.0:
        raise CoefficientError(f"A0 必须有正下界: a0 = {a0}, a0_eta = {a0_eta}")
    a0_fn, a0_deta = _tanh_profile(a0, a0_eta)

    if name == "constant":
        model = CoefficientModel(
            name=name,
            a0=a0_fn,
            a0_deta=a0_deta,
            reaction=reaction,
            params=params,
            semilinear=(a0 == 1.0 and a0_eta == 0.0),
        )
        logger.debug(f"系数模型已构造: {name} {params}")
        return model

    kernel = _build_kernel(name, params)
    slot = Slot(params.get("slot", _DEFAULT_SLOT[name].value))
    if name == "p_laplacian" and slot is not Slot.G:
        raise CoefficientError("p_laplacian 只能放在 g 位置 (相对增长条件)")

    if slot is Slot.F:
        a1 = float(params.get("a1", 1.0))
        a1_eta = float(params.get("a1_eta", 0.0))
        if a1 - abs(a1_eta) < 0.0:
            raise CoefficientError(f"A1 必须非负: a1 = {a1}, a1_eta = {a1_eta}")
        a1_fn, a1_deta = _tanh_profile(a1, a1_eta)
        model = CoefficientModel(
            name=name,
            a0=a0_fn,
            a0_deta=a0_deta,
            a1=a1_fn,
            a1_deta=a1_deta,
            f=kernel,
            reaction=reaction,
            params=params,
        )
    else:
        a2 = float(params.get("a2", 1.0))
        if a2 < 0.0:
            raise CoefficientError(f"A2 必须非负: a2 = {a2}")
        relative = name == "p_laplacian"
        model = CoefficientModel(
            name=name,
            a0=a0_fn,
            a0_deta=a0_deta,
            a2=_spatial_constant(a2),
            g=kernel,
            g_mode=GrowthMode.RELATIVE if relative else GrowthMode.BOUNDED,
            c_g_hat=abs(kernel.params["p"] - 2.0) if relative else None,
            reaction=reaction,
            params=params,
        )
    logger.debug(f"系数模型已构造: {name} {params}")
    return model


def _load_user_model(params: dict[str, Any], reaction: Reaction) -> CoefficientModel:
    """通过 "module:function" 回调加载用户自定义模型, 回调接收其余参数并返回 CoefficientModel"""
    target = params.pop("callback", None)
    if not target or ":" not in str(target):
        raise CoefficientError("自定义模型需要参数 callback = 'module:function'")
    module_name, func_name = str(target).split(":", 1)
    try:
        func = getattr(importlib.import_module(module_name), func_name)
    except (ImportError, AttributeError) as e:
        raise CoefficientError(f"无法加载回调 {target}: {e}")
    model = func(**params)
    if not isinstance(model, CoefficientModel):
        raise CoefficientError(f"回调 {target} 未返回 CoefficientModel")
    if reaction.name != "zero":
        model = model.with_reaction(reaction)
    return model


# ==================== 反应项目录 ====================

REACTIONS = ("zero", "constant", "linear", "cubic", "tanh")


def make_reaction(name: str = "zero", params: dict[str, Any] | None = None) -> Reaction:
    """
    构造反应项 b(x,η)

    zero: b = 0; constant: b = c; linear: b = c·η + shift;
    cubic: b = c·η³ + shift; tanh: b = c·tanh η + shift。c 必须非负 (b 关于 η 单调不减)。
    """
    params = dict(params or {})
    c = float(params.get("c", 1.0))
    shift = float(params.get("shift", 0.0))
    record = {"c": c, "shift": shift}

    if name == "zero":
        return Reaction(name=name, value=_zeros, derivative=_zeros, params={})
    if name == "constant":
        return Reaction(
            name=name,
            value=lambda x, eta: np.full(np.shape(eta), c),
            derivative=_zeros,
            params={"c": c},
        )
    if name not in REACTIONS:
        raise CoefficientError(f"未知的反应项: {name} (可选: {', '.join(REACTIONS)})")
    if c < 0.0:
        raise CoefficientError(f"反应项系数必须非负: c = {c}")
    if name == "linear":
        return Reaction(
            name=name,
            value=lambda x, eta: c * eta + shift,
            derivative=lambda x, eta: np.full(np.shape(eta), c),
            params=record,
        )
    if name == "cubic":
        return Reaction(
            name=name,
            value=lambda x, eta: c * eta ** 3 + shift,
            derivative=lambda x, eta: 3.0 * c * eta ** 2,
            params=record,
        )
    return Reaction(
        name=name,
        value=lambda x, eta: c * np.tanh(eta) + shift,
        derivative=lambda x, eta: c / np.cosh(eta) ** 2,
        params=record,
    )


# ==================== 解析增长常数 ====================

def analytic_growth_constant(name: str, params: dict[str, Any] | None = None) -> float:
    """
    sup_{s>=0} s|φ'(s)| 的解析值

    对 p_laplacian 返回相对增长常数 |p - 2|。无解析值的模型抛出 CoefficientError。
    """
    params = dict(params or {})
    if name in ("power_kernel", "mean_curvature"):
        if name == "mean_curvature":
            kappa, alpha = 1.0, 0.5
        else:
            kappa, alpha = float(params.get("kappa", 1.0)), float(params.get("alpha", 0.5))
        if alpha == 0.0:
            return 0.0
        # 极值点 s^2 = kappa / alpha
        return 2.0 * kappa * (kappa * (1.0 + 1.0 / alpha)) ** (-alpha - 1.0)
    if name == "glacier":
        k0 = float(params.get("K0", params.get("k0", 1.0)))
        return math.sqrt(2.0) / (k0 * (4.0 + 3.0 * math.sqrt(2.0)))
    if name == "arctan":
        return 0.5
    if name == "tanh":
        # 极值点满足 s·tanh(s) = 1/2
        s = brentq(lambda t: t * math.tanh(t) - 0.5, 0.1, 2.0, xtol=1e-15)
        return s / math.cosh(s) ** 2
    if name == "log_growth":
        return 2.0
    if name == "p_laplacian":
        return abs(float(params.get("p", 2.0)) - 2.0)
    if name == "constant":
        return 0.0
    raise CoefficientError(f"模型 {name} 没有解析增长常数")
