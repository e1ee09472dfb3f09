"""
问题定义文件 (YAML)

示例:
    coefficient:
      name: constant
      params: {value: 2.0, a0_eta: 1.0}
    reaction:
      name: zero
    neumann_psi: 0.5          # 可选, 覆盖网格文件中所有 Neumann 边界的 psi
    constants:                # 可选, 用户给出的常数包
      gamma_a: 1.0
      K_eta: 1.0
      lambda0: 1.0
    sampling:                 # 可选, 覆盖配置中的采样范围
      eta_min: -5.0
      eta_max: 5.0
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, Field, ValidationError

from src.problem.catalog import CoefficientError, CoefficientModel, make_coefficient, make_reaction
from src.problem.constants import ConstantsBundle, SamplingBox, estimate_constants
from src.utils.config import get_config

logger = logging.getLogger(__name__)


class ProblemDefinitionError(Exception):
    """问题定义文件错误"""
    pass


class CoefficientSpec(BaseModel):
    """目录模型引用"""
    name: str = Field(..., description="目录名称")
    params: dict[str, Any] = Field(default_factory=dict, description="模型参数")


class ProblemDefinition(BaseModel):
    """问题定义"""
    coefficient: CoefficientSpec
    reaction: CoefficientSpec = CoefficientSpec(name="zero")
    neumann_psi: float | None = Field(None, description="Neumann 边界 psi 覆盖值")
    constants: ConstantsBundle | None = Field(None, description="用户给出的常数包")
    sampling: SamplingBox | None = Field(None, description="采样范围")


@dataclass(frozen=True)
class Problem:
    """已解析的问题: 系数模型与可选常数包"""
    model: CoefficientModel
    definition: ProblemDefinition
    source: Path | None = None

    @property
    def bundle(self) -> ConstantsBundle | None:
        return self.definition.constants

    @property
    def neumann_psi(self) -> float | None:
        return self.definition.neumann_psi

    def sampling_box(self) -> SamplingBox:
        return self.definition.sampling or SamplingBox.from_config(get_config().sampling)

    def resolve_bundle(self, dimension: int) -> ConstantsBundle:
        """返回用户常数包; 未给出时退回采样估计 (启发式)"""
        if self.bundle is not None:
            return self.bundle
        logger.warning("问题定义未给出常数包, 使用采样估计 (sampled-heuristic)")
        return estimate_constants(self.model, box=self.sampling_box(), dimension=dimension)


def build_problem(definition: ProblemDefinition, source: Path | None = None) -> Problem:
    """由问题定义构造系数模型"""
    try:
        reaction = make_reaction(definition.reaction.name, definition.reaction.params)
        model = make_coefficient(definition.coefficient.name, definition.coefficient.params, reaction)
    except CoefficientError as e:
        raise ProblemDefinitionError(str(e))
    return Problem(model=model, definition=definition, source=source)


def load_problem(path: str | Path) -> Problem:
    """
    读取问题定义文件

    Args:
        path: YAML 文件路径

    Returns:
        已解析的问题
    """
    path = Path(path)
    if not path.exists():
        raise ProblemDefinitionError(f"问题定义文件不存在: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        definition = ProblemDefinition(**data)
    except yaml.YAMLError as e:
        raise ProblemDefinitionError(f"YAML 解析失败: {e}")
    except (ValidationError, TypeError) as e:
        raise ProblemDefinitionError(f"问题定义无效: {e}")
    problem = build_problem(definition, source=path)
    logger.info(f"问题已加载: {path} (模型 {problem.model.name}, 反应项 {problem.model.reaction.name})")
    return problem
