"""
线性化系统逆矩阵的非负性检验
"""
import logging

import numpy as np
from scipy.sparse import issparse

from src.fem.assembly import SparseSystem
from src.oracle.checks import OracleError
from src.storage.report_file import ReportModel
from src.utils.config import get_config

logger = logging.getLogger(__name__)


class InverseVerdict(ReportModel):
    """逆矩阵非负性结果"""
    size: int
    nonnegative: bool
    min_entry: float
    min_position: tuple[int, int] | None = None
    tol: float


def inverse_nonnegativity(
    matrix: SparseSystem | np.ndarray,
    tol: float | None = None,
    dense_limit: int | None = None,
) -> InverseVerdict:
    """
    稠密求逆后检查所有元素 >= −tol

    阶数超过 dense_limit 或矩阵奇异时抛出 OracleError。
    """
    oracle = get_config().oracle
    tol = oracle.inverse_tol if tol is None else tol
    dense_limit = oracle.dense_limit if dense_limit is None else dense_limit

    if isinstance(matrix, SparseSystem):
        matrix = matrix.matrix
    dense = matrix.toarray() if issparse(matrix) else np.asarray(matrix, dtype=float)
    n = dense.shape[0]
    if dense.ndim != 2 or dense.shape[1] != n:
        raise OracleError(f"矩阵不是方阵: {dense.shape}")
    if n > dense_limit:
        raise OracleError(f"矩阵阶数 {n} 超过稠密求逆上限 {dense_limit}")
    if n == 0:
        return InverseVerdict(size=0, nonnegative=True, min_entry=0.0, tol=tol)

    try:
        inverse = np.linalg.inv(dense)
    except np.linalg.LinAlgError as e:
        raise OracleError(f"矩阵奇异: {e}") from e
    if not np.all(np.isfinite(inverse)):
        raise OracleError("矩阵奇异: 逆矩阵含非有限值")

    flat = int(np.argmin(inverse))
    row, col = divmod(flat, n)
    min_entry = float(inverse[row, col])
    verdict = InverseVerdict(
        size=n,
        nonnegative=min_entry >= -tol,
        min_entry=min_entry,
        min_position=(row, col),
        tol=tol,
    )
    logger.info(f"逆矩阵非负性: {n} 阶, 最小元 {min_entry:.3e}, {'非负' if verdict.nonnegative else '存在负元'}")
    return verdict
