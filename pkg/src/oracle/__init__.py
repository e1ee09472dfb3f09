# Oracle Module
from src.oracle.checks import (
    ElementPartition,
    OracleError,
    PairVerdict,
    SolutionCheck,
    comparison_lhs,
    indicator_test_function,
    partition_elements,
    verify_pair,
    verify_subsolution,
    verify_supersolution,
)
from src.oracle.lemmas import (
    LEMMA_TOL,
    AbsIntegralBound,
    LemmaAudit,
    abs_integral_bound,
    lemma_bound_check,
)
from src.oracle.linear import InverseVerdict, inverse_nonnegativity

__all__ = [
    "ElementPartition",
    "OracleError",
    "PairVerdict",
    "SolutionCheck",
    "comparison_lhs",
    "indicator_test_function",
    "partition_elements",
    "verify_pair",
    "verify_subsolution",
    "verify_supersolution",
    "LEMMA_TOL",
    "AbsIntegralBound",
    "LemmaAudit",
    "abs_integral_bound",
    "lemma_bound_check",
    "InverseVerdict",
    "inverse_nonnegativity",
]
