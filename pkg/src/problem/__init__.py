# Problem Module
from src.problem.catalog import (
    CATALOG,
    REACTIONS,
    CoefficientError,
    CoefficientModel,
    GrowthMode,
    Kernel,
    Reaction,
    analytic_growth_constant,
    make_coefficient,
    make_reaction,
)
from src.problem.flux import FluxEvaluation, eval_flux, evaluate_flux
from src.problem.constants import (
    ConstantsBundle,
    ConstantsEstimationError,
    ConstantsValidationReport,
    SamplingBox,
    estimate_constants,
    validate_constants,
)
from src.problem.definition import (
    Problem,
    ProblemDefinition,
    ProblemDefinitionError,
    build_problem,
    load_problem,
)

__all__ = [
    "CATALOG",
    "REACTIONS",
    "CoefficientError",
    "CoefficientModel",
    "GrowthMode",
    "Kernel",
    "Reaction",
    "analytic_growth_constant",
    "make_coefficient",
    "make_reaction",
    "FluxEvaluation",
    "eval_flux",
    "evaluate_flux",
    "ConstantsBundle",
    "ConstantsEstimationError",
    "ConstantsValidationReport",
    "SamplingBox",
    "estimate_constants",
    "validate_constants",
    "Problem",
    "ProblemDefinition",
    "ProblemDefinitionError",
    "build_problem",
    "load_problem",
]
