"""
常数包 - 证书使用的全部常数, 及其采样估计与蒙特卡洛校验
"""
import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.problem.catalog import CoefficientModel, GrowthMode
from src.problem.flux import evaluate_flux
from src.utils.config import SamplingConfig, get_config

logger = logging.getLogger(__name__)

Provenance = Literal["user-supplied", "sampled-heuristic"]

# 校验时的相对容差
VALIDATION_RTOL = 1e-12


class ConstantsEstimationError(Exception):
    """采样发现结构性符号条件被破坏"""

    def __init__(self, message: str, witness: dict):
        self.witness = witness
        super().__init__(f"{message}; 反例: {witness}")


class SamplingBox(BaseModel):
    """采样范围: η 均匀, s = |ξ| 对数均匀, x 在 [x_min, x_max]^d 内均匀"""
    s_min: float = Field(1e-6, gt=0, description="s 下界")
    s_max: float = Field(1e6, gt=0, description="s 上界")
    eta_min: float = Field(-10.0, description="η 下界")
    eta_max: float = Field(10.0, description="η 上界")
    x_min: float = Field(0.0, description="x 各分量下界")
    x_max: float = Field(1.0, description="x 各分量上界")

    @model_validator(mode="after")
    def _check_order(self) -> "SamplingBox":
        if not (self.s_min < self.s_max and self.eta_min <= self.eta_max and self.x_min <= self.x_max):
            raise ValueError("采样范围的下界必须不大于上界")
        return self

    @classmethod
    def from_config(cls, config: SamplingConfig) -> "SamplingBox":
        return cls(
            s_min=config.s_min,
            s_max=config.s_max,
            eta_min=config.eta_min,
            eta_max=config.eta_max,
            x_min=config.x_min,
            x_max=config.x_max,
        )


class ExtremalPoint(BaseModel):
    """取得极值的样本点"""
    value: float
    x: list[float]
    eta: float
    s: float


class SamplingRecord(BaseModel):
    """采样估计记录"""
    samples: int
    seed: int
    dimension: int
    box: SamplingBox
    extremal: dict[str, ExtremalPoint] = Field(default_factory=dict)


class ConstantsBundle(BaseModel):
    """
    证书常数包

    所有条目均视为界: γ_a 与 λ0 为下界, 其余为上界。
    g 为相对增长时使用 C_g_hat, 否则使用 C_g。
    """
    gamma_a: float = Field(..., gt=0, description="椭圆性常数 γ_a")
    K_eta: float = Field(..., ge=0, description="|∂A/∂η| 的上界")
    B_eta: float = Field(0.0, ge=0, description="∂b/∂η 的上界")
    lambda0: float = Field(..., gt=0, description="A0 的下界 λ0")
    Lambda1: float = Field(0.0, ge=0, description="A1 的上界 Λ1")
    Lambda2: float = Field(0.0, ge=0, description="A2 的上界 Λ2")
    C_f: float = Field(0.0, ge=0, description="sup s|f'(s)|")
    C_g: float | None = Field(None, ge=0, description="sup s|g'(s)| (有界导数)")
    C_g_hat: float | None = Field(None, ge=0, description="s|g'(s)| <= Ĉ_g g(s) (相对增长)")
    provenance: Provenance = "user-supplied"
    sampling: SamplingRecord | None = None

    @property
    def growth_term(self) -> float:
        """Λ1·C_f + Λ2·C_g (相对增长时不含 g 项)"""
        return self.Lambda1 * self.C_f + self.Lambda2 * (self.C_g or 0.0)


class ConstantViolation(BaseModel):
    """常数校验违例"""
    constant: str
    claimed: float
    observed: float
    count: int = Field(..., description="违例样本数")
    witness: ExtremalPoint


class ConstantsValidationReport(BaseModel):
    """常数校验报告"""
    samples: int
    seed: int
    provenance: Provenance
    violations: list[ConstantViolation] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class _SampleTable:
    """样本点及其上的各项求值"""
    x: np.ndarray
    eta: np.ndarray
    s: np.ndarray
    a0: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    f: np.ndarray
    g: np.ndarray
    s_df: np.ndarray
    s_dg: np.ndarray
    dA_deta: np.ndarray
    db_deta: np.ndarray
    min_eig: np.ndarray

    def witness(self, index: int, value: float) -> ExtremalPoint:
        return ExtremalPoint(
            value=float(value),
            x=[float(v) for v in self.x[index]],
            eta=float(self.eta[index]),
            s=float(self.s[index]),
        )


def _stratified(rng: np.random.Generator, n: int) -> np.ndarray:
    """[0,1) 上的分层均匀样本 (打乱顺序)"""
    u = (np.arange(n) + rng.random(n)) / n
    return rng.permutation(u)


def _sample(
    model: CoefficientModel,
    box: SamplingBox,
    samples: int,
    rng: np.random.Generator,
    dimension: int,
) -> _SampleTable:
    eta = box.eta_min + (box.eta_max - box.eta_min) * _stratified(rng, samples)
    log_s = np.log(box.s_min) + (np.log(box.s_max) - np.log(box.s_min)) * _stratified(rng, samples)
    s = np.exp(log_s)
    # s = 0 与 η = 0 端点显式加入
    eta = np.concatenate([eta, [0.0 if box.eta_min <= 0.0 <= box.eta_max else box.eta_min]])
    s = np.concatenate([s, [0.0]])
    n = s.size
    x = rng.uniform(box.x_min, box.x_max, size=(n, dimension))
    direction = rng.normal(size=(n, dimension))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    xi = s[:, None] * direction

    zeros = np.zeros(n)
    flux = evaluate_flux(model, x, eta, xi)
    min_eig = np.linalg.eigvalsh(0.5 * (flux.jacobian + np.swapaxes(flux.jacobian, 1, 2)))[:, 0]
    return _SampleTable(
        x=x,
        eta=eta,
        s=s,
        a0=np.asarray(model.a0(x, eta), dtype=float) + zeros,
        a1=(np.asarray(model.a1(x, eta), dtype=float) + zeros) if model.f is not None else zeros,
        a2=(np.asarray(model.a2(x), dtype=float) + zeros) if model.g is not None else zeros,
        f=model.f.value(s) if model.f is not None else zeros,
        g=model.g.value(s) if model.g is not None else zeros,
        s_df=model.f.s_derivative(s) if model.f is not None else zeros,
        s_dg=model.g.s_derivative(s) if model.g is not None else zeros,
        dA_deta=flux.eta_derivative,
        db_deta=model.reaction_derivative(x, eta),
        min_eig=min_eig,
    )


def _relative_growth(table: _SampleTable) -> np.ndarray:
    return np.divide(
        np.abs(table.s_dg), table.g,
        out=np.where(np.abs(table.s_dg) > 0.0, np.inf, 0.0),
        where=table.g > 0.0,
    )


def estimate_constants(
    model: CoefficientModel,
    box: SamplingBox | None = None,
    samples: int | None = None,
    seed: int | None = None,
    dimension: int = 2,
) -> ConstantsBundle:
    """
    采样估计常数包 (启发式)

    有限样本无法证明上确界, 结果的 provenance 固定为 sampled-heuristic。

    Args:
        model: 系数模型
        box: 采样范围, 默认取配置
        samples: 样本数, 默认取配置
        seed: 随机种子, 默认取配置
        dimension: 空间维数

    Returns:
        常数包, 附带采样记录 (样本数与各常数的极值点)
    """
    config = get_config().sampling
    box = box or SamplingBox.from_config(config)
    samples = samples if samples is not None else config.samples
    seed = seed if seed is not None else config.seed
    table = _sample(model, box, samples, np.random.default_rng(seed), dimension)

    # 结构性符号条件
    checks = [
        ("∂b/∂η >= 0", table.db_deta),
        ("f >= 0", table.f),
        ("g >= 0", table.g),
        ("A1 >= 0", table.a1),
        ("A2 >= 0", table.a2),
    ]
    for label, values in checks:
        if np.any(values < 0.0):
            k = int(np.argmin(values))
            raise ConstantsEstimationError(f"违反符号条件 {label}", table.witness(k, values[k]).model_dump())
    if np.min(table.a0) <= 0.0:
        k = int(np.argmin(table.a0))
        raise ConstantsEstimationError("A0 没有正下界", table.witness(k, table.a0[k]).model_dump())
    if np.min(table.min_eig) <= 0.0:
        k = int(np.argmin(table.min_eig))
        raise ConstantsEstimationError("∂a/∂ξ 不是正定的", table.witness(k, table.min_eig[k]).model_dump())

    extremal: dict[str, ExtremalPoint] = {}

    def lowest(name: str, values: np.ndarray) -> float:
        k = int(np.argmin(values))
        extremal[name] = table.witness(k, values[k])
        return float(values[k])

    def highest(name: str, values: np.ndarray) -> float:
        k = int(np.argmax(values))
        extremal[name] = table.witness(k, values[k])
        return float(values[k])

    relative = model.g_mode is GrowthMode.RELATIVE
    bundle = ConstantsBundle(
        gamma_a=lowest("gamma_a", table.min_eig),
        K_eta=highest("K_eta", np.abs(table.dA_deta)),
        B_eta=highest("B_eta", table.db_deta),
        lambda0=lowest("lambda0", table.a0),
        Lambda1=highest("Lambda1", table.a1),
        Lambda2=highest("Lambda2", table.a2),
        C_f=highest("C_f", np.abs(table.s_df)),
        C_g=None if relative or model.g is None else highest("C_g", np.abs(table.s_dg)),
        C_g_hat=highest("C_g_hat", _relative_growth(table)) if relative else None,
        provenance="sampled-heuristic",
        sampling=SamplingRecord(
            samples=int(table.s.size),
            seed=seed,
            dimension=dimension,
            box=box,
            extremal=extremal,
        ),
    )
    logger.warning(
        f"常数由采样估计 (启发式, {table.s.size} 个样本): "
        f"γ_a={bundle.gamma_a:.6g}, K_η={bundle.K_eta:.6g}, B_η={bundle.B_eta:.6g}"
    )
    return bundle


def validate_constants(
    model: CoefficientModel,
    bundle: ConstantsBundle,
    samples: int | None = None,
    seed: int | None = None,
    box: SamplingBox | None = None,
    dimension: int = 2,
) -> ConstantsValidationReport:
    """
    蒙特卡洛抽查常数包

    违例作为报告内容返回, 不抛出异常; 不会提升 provenance。
    """
    config = get_config().sampling
    box = box or SamplingBox.from_config(config)
    samples = samples if samples is not None else config.samples
    seed = seed if seed is not None else config.seed
    table = _sample(model, box, samples, np.random.default_rng(seed), dimension)

    violations: list[ConstantViolation] = []

    def upper(name: str, claimed: float, observed: np.ndarray) -> None:
        bad = observed > claimed + VALIDATION_RTOL * max(abs(claimed), 1.0)
        if np.any(bad):
            k = int(np.argmax(observed))
            violations.append(ConstantViolation(
                constant=name,
                claimed=claimed,
                observed=float(observed[k]),
                count=int(bad.sum()),
                witness=table.witness(k, observed[k]),
            ))

    def lower(name: str, claimed: float, observed: np.ndarray) -> None:
        bad = observed < claimed - VALIDATION_RTOL * max(abs(claimed), 1.0)
        if np.any(bad):
            k = int(np.argmin(observed))
            violations.append(ConstantViolation(
                constant=name,
                claimed=claimed,
                observed=float(observed[k]),
                count=int(bad.sum()),
                witness=table.witness(k, observed[k]),
            ))

    lower("gamma_a", bundle.gamma_a, table.min_eig)
    lower("lambda0", bundle.lambda0, table.a0)
    upper("K_eta", bundle.K_eta, np.abs(table.dA_deta))
    upper("B_eta", bundle.B_eta, table.db_deta)
    lower("B_eta >= 0 (∂b/∂η)", 0.0, table.db_deta)
    if model.f is not None:
        upper("Lambda1", bundle.Lambda1, table.a1)
        lower("A1 >= 0", 0.0, table.a1)
        upper("C_f", bundle.C_f, np.abs(table.s_df))
    if model.g is not None:
        upper("Lambda2", bundle.Lambda2, table.a2)
        lower("A2 >= 0", 0.0, table.a2)
        if model.g_mode is GrowthMode.RELATIVE:
            upper("C_g_hat", bundle.C_g_hat if bundle.C_g_hat is not None else 0.0, _relative_growth(table))
        else:
            upper("C_g", bundle.C_g if bundle.C_g is not None else 0.0, np.abs(table.s_dg))

    report = ConstantsValidationReport(
        samples=int(table.s.size),
        seed=seed,
        provenance=bundle.provenance,
        violations=violations,
    )
    if violations:
        logger.warning(f"常数校验发现 {len(violations)} 项违例: {[v.constant for v in violations]}")
    else:
        logger.info(f"常数校验通过 ({report.samples} 个样本)")
    return report
