"""
测试公共夹具
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.mesh.builders import build_hexagon_mesh, build_lattice_mesh
from src.mesh.model import build_interval_mesh
from src.problem.catalog import make_coefficient, make_reaction
from src.problem.constants import ConstantsBundle
from src.utils.config import init_config


@pytest.fixture(autouse=True)
def default_config(monkeypatch):
    """每个测试使用项目默认配置, 不受环境变量影响"""
    for name in ("QCERT_THREADS", "QCERT_LOG_LEVEL", "QCERT_CONFIG"):
        monkeypatch.delenv(name, raising=False)
    return init_config(project_root / "config.yaml")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def hexagon():
    return build_hexagon_mesh(radius=1.0)


@pytest.fixture
def lattice():
    """4×4 正三角形格子网格 (锐角)"""
    return build_lattice_mesh(4, 4, spacing=0.25)


@pytest.fixture
def jittered_lattice():
    """内部顶点轻微扰动后的格子网格 (仍为锐角, r_T < 1)"""
    return build_lattice_mesh(5, 5, spacing=0.2, jitter=0.04, seed=3)


@pytest.fixture
def interval():
    return build_interval_mesh(np.linspace(0.0, 1.0, 11))


@pytest.fixture
def poisson_model():
    """A ≡ 1, b ≡ 1"""
    return make_coefficient("constant", {"value": 1.0}, make_reaction("constant", {"c": 1.0}))


@pytest.fixture
def tanh_model():
    """A = 2 + tanh(η), b ≡ 0"""
    return make_coefficient("constant", {"a0": 2.0, "a0_eta": 1.0})


@pytest.fixture
def tanh_bundle():
    return ConstantsBundle(gamma_a=1.0, K_eta=1.0, B_eta=0.0, lambda0=1.0)
