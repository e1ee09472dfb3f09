"""
配置加载模块
"""
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class LoggingConfig(BaseModel):
    """日志配置"""
    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class QuadratureConfig(BaseModel):
    """数值积分配置"""
    # 三角形积分阶数，默认 6 点 4 阶对称公式
    triangle_degree: int | None = 4
    # 区间 Gauss 点数
    interval_points: int | None = 3
    # 半线性质量矩阵中 t 积分的 Gauss 点数
    t_points: int = 3
    # 引理核验中 t 积分的 Gauss 点数
    oracle_t_points: int = 5


class SolverConfig(BaseModel):
    """Newton 求解器配置"""
    tol: float = 1e-12
    max_iter: int = 50
    damping_factor: float = 0.5
    min_step: float = 2.0 ** -20


class SamplingConfig(BaseModel):
    """常数采样估计配置"""
    samples: int = 100_000
    s_min: float = 1e-6
    s_max: float = 1e6
    eta_min: float = -10.0
    eta_max: float = 10.0
    x_min: float = 0.0
    x_max: float = 1.0
    seed: int = 0


class CertificateConfig(BaseModel):
    """证书配置"""
    cw_mode: Literal["corrected-4/3", "original-7/6"] = "corrected-4/3"


class OracleConfig(BaseModel):
    """核验器配置"""
    pair_tol: float = 1e-10
    dense_limit: int = 500
    inverse_tol: float = 1e-10


class MultistartConfig(BaseModel):
    """多初值实验配置"""
    starts: int = 10
    box: float = 1.0
    seed: int = 0
    cluster_tol: float = 1e-8


class RuntimeConfig(BaseModel):
    """运行时配置"""
    threads: int | None = Field(None, description="并行线程上限")


class AppConfig(BaseModel):
    """应用配置"""
    logging: LoggingConfig = LoggingConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    solver: SolverConfig = SolverConfig()
    sampling: SamplingConfig = SamplingConfig()
    certificate: CertificateConfig = CertificateConfig()
    oracle: OracleConfig = OracleConfig()
    multistart: MultistartConfig = MultistartConfig()
    runtime: RuntimeConfig = RuntimeConfig()


class EnvSettings(BaseSettings):
    """环境变量覆盖 (QCERT_ 前缀)"""
    model_config = SettingsConfigDict(env_prefix="QCERT_")

    threads: int | None = None
    log_level: str | None = None
    config: str | None = None


def load_config(config_path: str | Path | None = None) -> AppConfig:
    """
    加载配置文件

    Args:
        config_path: 配置文件路径，默认为项目根目录的 config.yaml

    Returns:
        应用配置对象
    """
    env = EnvSettings()

    if config_path is None:
        if env.config:
            config_path = env.config
        else:
            # 默认配置文件路径
            config_path = Path(__file__).parent.parent.parent / "config.yaml"

    config_path = Path(config_path)

    if config_path.exists():
        with open(config_path, "r", encoding="utf-8") as f:
            config_data = yaml.safe_load(f) or {}
    else:
        config_data = {}

    # 环境变量覆盖
    if env.threads is not None:
        config_data.setdefault("runtime", {})["threads"] = env.threads

    if env.log_level:
        config_data.setdefault("logging", {})["level"] = env.log_level

    return AppConfig(**config_data)


# 全局配置实例
_config: AppConfig | None = None


def get_config() -> AppConfig:
    """获取全局配置实例"""
    global _config
    if _config is None:
        _config = load_config()
    return _config


def init_config(config_path: str | Path | None = None) -> AppConfig:
    """
    初始化全局配置

    Args:
        config_path: 配置文件路径

    Returns:
        应用配置对象
    """
    global _config
    _config = load_config(config_path)
    return _config
