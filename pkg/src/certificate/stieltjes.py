"""
Stieltjes 矩阵检验: 对称、非对角元非正、正定
"""
import logging

import numpy as np
from scipy import linalg
from scipy.sparse import csr_matrix, issparse
from scipy.sparse.linalg import splu

from src.fem.assembly import SparseSystem
from src.storage.report_file import ReportModel
from src.utils.config import get_config

logger = logging.getLogger(__name__)

# 对称性的数值容差 (相对最大元)
SYMMETRY_TOL = 1e-12


class MatrixEntry(ReportModel):
    row: int
    col: int
    value: float


class StieltjesVerdict(ReportModel):
    """Stieltjes 检验结果"""
    size: int
    symmetric: bool
    offdiag_violations: list[MatrixEntry]
    spd: bool
    is_stieltjes: bool


def _is_positive_definite(matrix: csr_matrix, dense_limit: int) -> bool:
    """对称矩阵的正定性: 小矩阵用稠密 Cholesky, 大矩阵用不选主元的 LU 检查主元符号"""
    n = matrix.shape[0]
    if n == 0:
        return True
    if n <= dense_limit:
        try:
            linalg.cholesky(matrix.toarray(), lower=True, check_finite=True)
            return True
        except linalg.LinAlgError:
            return False
    try:
        lu = splu(
            matrix.tocsc(),
            permc_spec="NATURAL",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError:
        return False
    # 无行交换时对称矩阵的主元全正当且仅当正定
    if not np.array_equal(lu.perm_r, np.arange(n)):
        return False
    return bool(np.all(lu.U.diagonal() > 0.0))


def stieltjes_check(system: SparseSystem | csr_matrix | np.ndarray) -> StieltjesVerdict:
    """
    检验矩阵是否为 Stieltjes 矩阵

    对称性要求结构完全对称且数值差不超过 1e-12 (相对最大元);
    非对角元 > 0 的位置逐一列出。
    """
    matrix = system.matrix if isinstance(system, SparseSystem) else system
    matrix = csr_matrix(matrix) if not issparse(matrix) else matrix.tocsr()
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"矩阵不是方阵: {matrix.shape}")
    n = matrix.shape[0]
    matrix = matrix.copy()
    matrix.eliminate_zeros()

    pattern = (matrix != 0).astype(np.int8)
    structural = (pattern != pattern.T).nnz == 0
    scale = float(abs(matrix).max()) if matrix.nnz else 0.0
    difference = abs(matrix - matrix.T)
    numeric = (float(difference.max()) if difference.nnz else 0.0) <= SYMMETRY_TOL * max(scale, 1e-300)
    symmetric = bool(structural and numeric)

    coo = matrix.tocoo()
    offdiag = (coo.row != coo.col) & (coo.data > 0.0)
    violations = [
        MatrixEntry(row=int(r), col=int(c), value=float(v))
        for r, c, v in zip(coo.row[offdiag], coo.col[offdiag], coo.data[offdiag])
    ]
    violations.sort(key=lambda e: (e.row, e.col))

    spd = symmetric and _is_positive_definite(matrix, get_config().oracle.dense_limit)
    verdict = StieltjesVerdict(
        size=n,
        symmetric=symmetric,
        offdiag_violations=violations,
        spd=spd,
        is_stieltjes=symmetric and not violations and spd,
    )
    logger.info(
        f"Stieltjes 检验: {n} 阶, 对称={symmetric}, 正非对角元 {len(violations)} 个, 正定={spd}"
    )
    return verdict
