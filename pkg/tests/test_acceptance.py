"""
端到端性质测试: 雅可比一致性、|w| 积分界、引理下界、一维比较、多初值唯一性、半线性阈值与证书单调性
"""
import logging

import numpy as np
import pytest

from src.certificate.conditions import certify_1d, certify_2d, certify_semilinear
from src.certificate.report import BoundMode, Theorem
from src.certificate.stieltjes import stieltjes_check
from src.cli.experiments import cmd_multistart, cmd_pipeline
from src.fem.assembly import assemble_jacobian, assemble_residual, assemble_semilinear_system
from src.fem.field import DiscreteField, interpolate, prolongate, random_field
from src.fem.newton import solve_newton
from src.mesh.builders import build_hexagon_mesh, build_lattice_mesh
from src.mesh.model import build_interval_mesh
from src.mesh.refine import refine_uniform
from src.oracle.checks import partition_elements
from src.oracle.lemmas import abs_integral_bound, lemma_bound_check
from src.oracle.linear import inverse_nonnegativity
from src.problem.catalog import analytic_growth_constant, make_coefficient, make_reaction
from src.problem.constants import ConstantsBundle
from src.problem.definition import CoefficientSpec, ProblemDefinition, build_problem

logger = logging.getLogger(__name__)

CATALOG_CASES = [
    ("constant", {"a0": 1.5, "a0_eta": 0.5}),
    ("power_kernel", {"a0": 1.0, "kappa": 2.0, "alpha": 1.5, "a1": 0.5}),
    ("mean_curvature", {"a0": 1.0, "a0_eta": 0.5, "a1": 0.2}),
    ("glacier", {"a0": 1.0, "K0": 0.5}),
    ("arctan", {"a0": 1.0, "a1": 0.5, "a1_eta": 0.25}),
    ("tanh", {"a0": 1.0, "a1": 0.5}),
    ("log_growth", {"a0": 1.0, "a2": 0.2}),
    ("p_laplacian", {"a0": 1.0, "p": 3.0, "eps": 0.01}),
    ("p_laplacian", {"a0": 1.0, "p": 1.5, "eps": 0.1}),
]


@pytest.fixture(scope="module")
def refined_lattice():
    return refine_uniform(build_lattice_mesh(3, 3, spacing=1.0 / 3.0, jitter=0.05, seed=5))


# ==================== 雅可比一致性 ====================

@pytest.mark.parametrize("name, params", CATALOG_CASES)
def test_jacobian_directional_derivatives(refined_lattice, rng, name, params):
    model = make_coefficient(name, params, make_reaction("tanh", {"c": 1.0}))
    h = 1e-6
    for _ in range(10):
        u = random_field(refined_lattice, 1.0, rng)
        direction = rng.normal(size=u.free_values.size)
        system = assemble_jacobian(model, refined_lattice, u)
        plus = assemble_residual(model, refined_lattice, u.with_free_values(u.free_values + h * direction))
        minus = assemble_residual(model, refined_lattice, u.with_free_values(u.free_values - h * direction))
        fd = (plus - minus) / (2.0 * h)
        exact = system.matrix @ direction
        assert np.linalg.norm(exact - fd) <= 1e-5 * np.linalg.norm(exact)


# ==================== |w| 积分界 ====================

def test_abs_integral_bound_audit(rng):
    mesh = build_hexagon_mesh()
    worst = 0.0
    above_original = 0
    for _ in range(5000):
        values = np.zeros(mesh.n_vertices)
        local = rng.uniform(-1.0, 1.0, 3)
        if local.max() <= 0.0 or local.min() >= 0.0:
            continue
        values[mesh.triangles[0]] = local
        result = abs_integral_bound(DiscreteField(mesh, values), 0)
        ratio = result.exact / (result.bound / BoundMode.CORRECTED.c_w)
        worst = max(worst, ratio)
        above_original += ratio > 7.0 / 6.0 * (1.0 - 1e-9)
        assert result.exact <= result.bound * (1.0 + 1e-12)
    logger.info(f"∫|w| / (δ|T|) 最大值 {worst:.6f}, 超过 7/6 的单元 {above_original} 个")
    # 变号单元上 |w| <= δ, 比值不超过 1
    assert worst <= 1.0 + 1e-12
    assert above_original == 0


def test_abs_integral_bound_audit_1d(rng):
    mesh = build_interval_mesh([0.0, 0.3])
    for _ in range(1000):
        a, b = rng.uniform(0.0, 1.0), -rng.uniform(0.0, 1.0)
        result = abs_integral_bound(DiscreteField(mesh, [a, b]), 0)
        assert result.exact == pytest.approx(0.3 * (a * a + b * b) / (2.0 * (a - b)))
        assert result.exact <= result.bound * (1.0 + 1e-12)


# ==================== 引理下界 ====================

LEMMA_CASES = [
    (
        ("constant", {"value": 1.0}),
        ConstantsBundle(gamma_a=1.0, K_eta=0.0, lambda0=1.0),
    ),
    (
        ("constant", {"a0": 2.0, "a0_eta": 1.0}),
        ConstantsBundle(gamma_a=1.0, K_eta=1.0, B_eta=1.0, lambda0=1.0),
    ),
    (
        ("mean_curvature", {"a0": 1.0, "a0_eta": 0.5, "a1": 0.2}),
        ConstantsBundle(
            gamma_a=0.5, K_eta=0.5, B_eta=1.0, lambda0=0.5,
            Lambda1=0.2, C_f=analytic_growth_constant("mean_curvature"),
        ),
    ),
]


@pytest.mark.parametrize("coefficient, bundle", LEMMA_CASES)
def test_lemma_bounds_on_perturbed_solutions(refined_lattice, rng, coefficient, bundle):
    reaction = make_reaction("linear", {"c": bundle.B_eta}) if bundle.B_eta else make_reaction("zero")
    model = make_coefficient(*coefficient, reaction=reaction).with_reaction_shift(-2.0)
    solution = solve_newton(model, refined_lattice).field
    checked = 0
    for _ in range(20):
        shift = random_field(refined_lattice, 0.2, rng)
        u1 = solution + shift
        for elem in partition_elements(u1 - solution).t_c:
            audit = lemma_bound_check(model, refined_lattice, u1, solution, elem, bundle)
            assert all(audit.holds().values()), audit
            checked += 1
    assert checked > 0


# ==================== 一维比较原理 ====================

def test_1d_comparison_on_random_meshes(rng):
    model = make_coefficient("constant", {"a0": 2.0, "a0_eta": 1.0}, make_reaction("linear", {"c": 1.0}))
    bundle = ConstantsBundle(gamma_a=1.0, K_eta=1.0, B_eta=1.0, lambda0=1.0)
    for _ in range(50):
        inner = np.sort(rng.uniform(0.0, 1.0, rng.integers(4, 20)))
        mesh = build_interval_mesh(np.concatenate([[0.0], inner, [1.0]]))
        if mesh.h.min() < 1e-3:
            continue
        c = rng.uniform(0.1, 2.0)
        sub = solve_newton(model.with_reaction_shift(c), mesh)
        sup = solve_newton(model.with_reaction_shift(-c), mesh)
        assert sub.converged and sup.converged
        assert certify_1d(mesh, sub.field, bundle).global_pass
        assert np.all(sub.field.values <= sup.field.values + 1e-10)


# ==================== 二维唯一性实验 ====================

def _tanh_problem(reaction_c):
    definition = ProblemDefinition(
        coefficient=CoefficientSpec(name="constant", params={"a0": 2.0, "a0_eta": 1.0}),
        reaction=CoefficientSpec(name="constant", params={"c": reaction_c}),
        constants=ConstantsBundle(gamma_a=1.0, K_eta=1.0, lambda0=1.0),
    )
    return build_problem(definition)


@pytest.mark.parametrize("reaction_c", [0.0, -1.0])
def test_2d_uniqueness_experiment(reaction_c):
    problem = _tanh_problem(reaction_c)
    pipeline = cmd_pipeline(problem, build_hexagon_mesh(), refinements=2, bound_mode=BoundMode.CORRECTED)
    assert pipeline.first_pass_level is not None
    assert pipeline.final.global_pass

    mesh = build_lattice_mesh(4, 4, spacing=0.25)
    report = cmd_multistart(problem, mesh, starts=10, seed=3, bound_mode=BoundMode.CORRECTED)
    assert report.converged == 10
    assert report.clusters == 1
    assert report.max_pairwise_difference <= 1e-8
    assert report.conclusion == "certified-unique"


# ==================== 半线性 ====================

SEMILINEAR_MESHES = {
    "lattice": lambda: build_lattice_mesh(4, 4, spacing=0.25),
    "refined-jittered": lambda: refine_uniform(build_lattice_mesh(4, 4, spacing=0.25, jitter=0.05, seed=1)),
    "fine-lattice": lambda: build_lattice_mesh(14, 14, spacing=1.0 / 14.0),
}


@pytest.mark.parametrize("mesh_name", sorted(SEMILINEAR_MESHES))
def test_semilinear_stieltjes_and_inverse(mesh_name):
    mesh = SEMILINEAR_MESHES[mesh_name]()
    model = make_coefficient("constant", {"value": 1.0}, make_reaction("linear", {"c": 1.0}))
    bundle = ConstantsBundle(gamma_a=1.0, K_eta=0.0, B_eta=1.0, lambda0=1.0)
    assert certify_semilinear(mesh, bundle, Theorem.SEMILINEAR_STIELTJES).global_pass
    u1 = random_field(mesh, 1.0, np.random.default_rng(0))
    u2 = random_field(mesh, 1.0, np.random.default_rng(1))
    system = assemble_semilinear_system(model, mesh, u1, u2).system
    assert system.size <= 200
    assert stieltjes_check(system).is_stieltjes
    assert inverse_nonnegativity(system).nonnegative


def test_semilinear_threshold_ordering():
    hexagon = build_hexagon_mesh()
    line = build_interval_mesh(np.linspace(0.0, 1.0, 4))
    for b_eta in np.logspace(-2, 3, 60):
        bundle = ConstantsBundle(gamma_a=1.0, K_eta=0.0, B_eta=float(b_eta), lambda0=1.0)
        for mesh in (hexagon, line):
            energy = certify_semilinear(mesh, bundle, Theorem.SEMILINEAR_ENERGY)
            stieltjes = certify_semilinear(mesh, bundle, Theorem.SEMILINEAR_STIELTJES)
            if energy.global_pass:
                assert stieltjes.global_pass
            assert stieltjes.worst_margin >= energy.worst_margin


# ==================== 证书单调性 ====================

def test_certificate_monotonicity_sweep(rng):
    mesh = build_lattice_mesh(4, 4, spacing=0.25, jitter=0.05, seed=9)
    fine = refine_uniform(mesh)
    for _ in range(100):
        base = random_field(mesh, 0.1, rng)
        bundle = ConstantsBundle(
            gamma_a=rng.uniform(0.5, 2.0),
            K_eta=rng.uniform(0.1, 2.0),
            B_eta=rng.uniform(0.0, 2.0),
            lambda0=rng.uniform(0.5, 2.0),
        )
        reference = certify_2d(mesh, base, bundle).worst_margin

        scaled = DiscreteField(mesh, 2.0 * base.values)
        assert certify_2d(mesh, scaled, bundle).worst_margin <= reference + 1e-12

        stronger = bundle.model_copy(update={"K_eta": 2.0 * bundle.K_eta, "B_eta": 2.0 * bundle.B_eta})
        assert certify_2d(mesh, base, stronger).worst_margin <= reference + 1e-12

        original = certify_2d(mesh, base, bundle, bound_mode=BoundMode.ORIGINAL).worst_margin
        assert original >= reference - 1e-12

        assert certify_2d(fine, prolongate(base, fine), bundle).worst_margin >= reference - 1e-12


def test_smooth_field_margins_improve_under_refinement():
    bundle = ConstantsBundle(gamma_a=1.0, K_eta=1.0, lambda0=1.0)
    mesh = build_lattice_mesh(4, 4, spacing=0.25)
    margins = []
    for _ in range(3):
        field = interpolate(mesh, lambda p: np.sin(3.0 * p[:, 0]) * np.cos(2.0 * p[:, 1]))
        margins.append(certify_2d(mesh, field, bundle).worst_margin)
        mesh = refine_uniform(mesh)
    assert margins[0] < margins[1] < margins[2]
