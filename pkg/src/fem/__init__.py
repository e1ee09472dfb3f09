# FEM Module
from src.fem.quadrature import AssemblyError, QuadratureRule, get_quadrature, interval_rule, triangle_rule
from src.fem.basis import basis_gradients, element_gradients
from src.fem.field import (
    DiscreteField,
    interpolate,
    prolongate,
    random_field,
    zero_field,
)
from src.fem.assembly import (
    SemilinearSystem,
    SparseSystem,
    assemble_jacobian,
    assemble_residual,
    assemble_semilinear_system,
    full_residual,
    mass_matrix,
    stiffness_matrix,
)
from src.fem.newton import NewtonStep, SolveResult, SolverError, solve_newton

__all__ = [
    "AssemblyError",
    "QuadratureRule",
    "get_quadrature",
    "interval_rule",
    "triangle_rule",
    "basis_gradients",
    "element_gradients",
    "DiscreteField",
    "interpolate",
    "prolongate",
    "random_field",
    "zero_field",
    "SemilinearSystem",
    "SparseSystem",
    "assemble_jacobian",
    "assemble_residual",
    "assemble_semilinear_system",
    "full_residual",
    "mass_matrix",
    "stiffness_matrix",
    "NewtonStep",
    "SolveResult",
    "SolverError",
    "solve_newton",
]
