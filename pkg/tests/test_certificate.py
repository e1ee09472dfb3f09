"""
逐单元证书、p*_T 与 Stieltjes 检验测试
"""
import json
import math

import numpy as np
import pytest
from scipy.sparse import diags

from src.certificate.conditions import (
    RELATIVE_G,
    certify,
    certify_1d,
    certify_2d,
    certify_semilinear,
    delta_T,
    p_star,
)
from src.certificate.report import BoundMode, Theorem, TheoremInapplicableError
from src.certificate.stieltjes import stieltjes_check
from src.fem.assembly import assemble_semilinear_system
from src.fem.field import DiscreteField, interpolate, prolongate, zero_field
from src.mesh.geometry import element_geometry
from src.mesh.model import MeshError, TriMesh2D, build_interval_mesh
from src.mesh.refine import refine_uniform
from src.problem.catalog import make_coefficient, make_reaction
from src.problem.constants import ConstantsBundle
from src.storage.report_file import write_report


def _center_field(hexagon, value):
    values = np.zeros(hexagon.n_vertices)
    values[0] = value
    return DiscreteField(hexagon, values)


def _right_triangle():
    return TriMesh2D(
        vertices=[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        triangles=[[0, 1, 2]],
        boundary_edges=[[0, 1], [1, 2], [2, 0]],
        boundary_markers=("D", "D", "D"),
    )


# ==================== 一维 ====================

def test_certify_1d_margins(interval, tanh_bundle):
    values = np.zeros(interval.n_vertices)
    values[5] = 0.5
    report = certify_1d(interval, DiscreteField(interval, values), tanh_bundle)
    assert report.applicable and report.global_pass
    assert report.theorem is Theorem.COMPARISON_1D
    assert report.worst.margin == pytest.approx(2.0 - 0.5)
    assert report.worst.elem == 4
    assert report.elements[0].margin == pytest.approx(2.0)


def test_certify_1d_fails_on_large_jump(interval, tanh_bundle):
    values = np.zeros(interval.n_vertices)
    values[3] = 2.5
    report = certify_1d(interval, DiscreteField(interval, values), tanh_bundle)
    assert not report.global_pass
    assert report.n_failed == 2
    assert report.worst_margin == pytest.approx(-0.5)


def test_certify_1d_reaction_term(interval):
    bundle = ConstantsBundle(gamma_a=1.0, K_eta=2.0, B_eta=50.0, lambda0=1.0)
    report = certify_1d(interval, zero_field(interval), bundle)
    # 2γ/K − (B/K) h² = 1 − 25 · 0.01
    assert report.worst_margin == pytest.approx(0.75)


def test_certify_1d_without_eta_dependence(interval):
    report = certify_1d(interval, zero_field(interval), ConstantsBundle(gamma_a=1.0, K_eta=0.0, lambda0=1.0))
    assert report.global_pass
    assert math.isinf(report.worst_margin)

    report = certify_1d(
        interval, zero_field(interval), ConstantsBundle(gamma_a=1.0, K_eta=0.0, B_eta=1.0, lambda0=1.0)
    )
    assert not report.applicable
    assert not report.global_pass
    assert report.elements == []


def test_certify_1d_on_2d_mesh_is_inapplicable(hexagon, tanh_bundle):
    assert not certify_1d(hexagon, zero_field(hexagon), tanh_bundle).applicable
    assert not certify_2d(build_interval_mesh([0.0, 1.0]), None, tanh_bundle).applicable


# ==================== 二维 ====================

def test_p_star_on_equilateral(hexagon, tanh_bundle):
    geom = element_geometry(hexagon, 0)
    assert p_star(geom, tanh_bundle) == pytest.approx(0.5)
    weak = tanh_bundle.model_copy(update={"gamma_a": 0.3})
    assert p_star(geom, weak) == pytest.approx(0.3)
    growth = tanh_bundle.model_copy(update={"Lambda1": 0.5, "C_f": 0.2, "Lambda2": 1.0, "C_g": 0.1})
    assert p_star(geom, growth) == pytest.approx(0.5 - 0.1 - 0.1)


def test_p_star_ellipticity_modes(jittered_lattice, tanh_bundle):
    strong = tanh_bundle.model_copy(update={"gamma_a": 0.1, "lambda0": 10.0})
    geom = element_geometry(jittered_lattice, 0)
    assert geom.r_T < 1.0
    assert p_star(geom, strong, bound_mode=BoundMode.CORRECTED) == pytest.approx(0.1 * geom.r_T)
    assert p_star(geom, strong, bound_mode=BoundMode.ORIGINAL) == pytest.approx(0.1 / geom.r_T)


def test_p_star_relative_mode(hexagon, tanh_bundle):
    geom = element_geometry(hexagon, 0)
    bundle = tanh_bundle.model_copy(update={"Lambda2": 5.0, "C_g_hat": 0.4})
    assert p_star(geom, bundle, mode=RELATIVE_G) == pytest.approx(0.5)
    with pytest.raises(TheoremInapplicableError):
        p_star(geom, bundle.model_copy(update={"C_g_hat": 0.6}), mode=RELATIVE_G)
    with pytest.raises(ValueError):
        p_star(geom, bundle, mode="half-g")


def test_certify_2d_hexagon_margins(hexagon, tanh_bundle):
    report = certify_2d(hexagon, _center_field(hexagon, 0.1), tanh_bundle)
    assert report.global_pass
    assert report.n_elements == 6
    for element in report.elements:
        assert element.p_star == pytest.approx(0.5)
        assert element.margin == pytest.approx(0.5 - 0.1 * (4.0 / 3.0) * 2.0)
        assert element.constants_used["r_T"] == pytest.approx(1.0)


def test_certify_2d_bound_modes_disagree(hexagon, tanh_bundle):
    field = _center_field(hexagon, 0.2)
    corrected = certify_2d(hexagon, field, tanh_bundle, bound_mode=BoundMode.CORRECTED)
    original = certify_2d(hexagon, field, tanh_bundle, bound_mode=BoundMode.ORIGINAL)
    assert not corrected.global_pass
    assert corrected.worst_margin == pytest.approx(0.5 - 0.2 * 8.0 / 3.0)
    assert original.global_pass
    assert original.worst_margin == pytest.approx(0.5 - 0.2 * 7.0 / 3.0)
    assert original.bound_constant_mode is BoundMode.ORIGINAL


def test_certify_2d_reaction_term(hexagon, tanh_bundle):
    bundle = tanh_bundle.model_copy(update={"B_eta": 0.1})
    report = certify_2d(hexagon, zero_field(hexagon), bundle)
    # 2·(4/3)·B·|T|·s_T = (8/3)·0.1·(3/8)
    assert report.worst_margin == pytest.approx(0.5 - 0.1)


def test_certify_2d_non_acute_is_inapplicable(tanh_bundle):
    mesh = _right_triangle()
    report = certify_2d(mesh, zero_field(mesh), tanh_bundle)
    assert not report.applicable
    assert "t_max" in report.reason
    assert report.elements == []


def test_certify_2d_hypothesis_failure(hexagon, tanh_bundle):
    bundle = tanh_bundle.model_copy(update={"Lambda1": 1.0, "C_f": 0.6})
    report = certify_2d(hexagon, zero_field(hexagon), bundle)
    assert not report.applicable
    assert not report.global_pass


def test_certify_2d_relative_growth(hexagon, tanh_bundle):
    field = _center_field(hexagon, 0.1)
    bundle = tanh_bundle.model_copy(update={"Lambda2": 10.0, "C_g_hat": 0.4})
    report = certify(Theorem.COMPARISON_2D_RELATIVE_G, hexagon, bundle, field)
    assert report.applicable and report.global_pass
    assert report.theorem is Theorem.COMPARISON_2D_RELATIVE_G

    assert not certify(Theorem.COMPARISON_2D_RELATIVE_G, hexagon, tanh_bundle, field).applicable
    too_fast = bundle.model_copy(update={"C_g_hat": 0.6})
    assert not certify(Theorem.COMPARISON_2D_RELATIVE_G, hexagon, too_fast, field).applicable


def test_refinement_does_not_decrease_worst_margin(jittered_lattice, tanh_bundle):
    def bump(p):
        return 0.5 * np.sin(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1])

    coarse = interpolate(jittered_lattice, bump)
    fine_mesh = refine_uniform(jittered_lattice)
    fine = prolongate(coarse, fine_mesh)
    coarse_report = certify_2d(jittered_lattice, coarse, tanh_bundle)
    fine_report = certify_2d(fine_mesh, fine, tanh_bundle)
    assert fine_report.worst_margin >= coarse_report.worst_margin - 1e-12


def test_larger_oscillation_lowers_margins(hexagon, tanh_bundle):
    margins = [certify_2d(hexagon, _center_field(hexagon, a), tanh_bundle).worst_margin for a in (0.0, 0.05, 0.1)]
    assert margins[0] > margins[1] > margins[2]


def test_certify_requires_field(hexagon, tanh_bundle):
    with pytest.raises(ValueError):
        certify(Theorem.COMPARISON_2D, hexagon, tanh_bundle)
    with pytest.raises(MeshError):
        delta_T(zero_field(hexagon), 6)


# ==================== 半线性 ====================

def test_semilinear_1d_thresholds():
    mesh = build_interval_mesh([0.0, 1.5])
    bundle = ConstantsBundle(gamma_a=1.0, K_eta=0.0, B_eta=1.0, lambda0=1.0)
    energy = certify_semilinear(mesh, bundle, Theorem.SEMILINEAR_ENERGY)
    stieltjes = certify_semilinear(mesh, bundle, Theorem.SEMILINEAR_STIELTJES)
    assert not energy.global_pass
    assert energy.worst_margin == pytest.approx(2.0 - 2.25)
    assert stieltjes.global_pass
    assert stieltjes.worst_margin == pytest.approx(6.0 - 2.25)
    assert not stieltjes.worst.strict


def test_semilinear_2d_energy_threshold(hexagon):
    # min cot θ / (2·(4/3)·B) > |T| 当且仅当 B < 1/2
    passing = ConstantsBundle(gamma_a=1.0, K_eta=0.0, B_eta=0.4, lambda0=1.0)
    failing = passing.model_copy(update={"B_eta": 0.6})
    assert certify(Theorem.SEMILINEAR_ENERGY, hexagon, passing).global_pass
    assert not certify(Theorem.SEMILINEAR_ENERGY, hexagon, failing).global_pass


def test_semilinear_without_reaction_growth(hexagon):
    report = certify(Theorem.SEMILINEAR_STIELTJES, hexagon, ConstantsBundle(gamma_a=1.0, K_eta=0.0, lambda0=1.0))
    assert report.global_pass
    assert math.isinf(report.worst_margin)


def test_semilinear_rejects_other_theorems(hexagon, tanh_bundle):
    with pytest.raises(ValueError):
        certify_semilinear(hexagon, tanh_bundle, Theorem.COMPARISON_2D)
    assert not certify_semilinear(_right_triangle(), tanh_bundle).applicable


@pytest.mark.parametrize("b_eta, expected", [(100.0, True), (200.0, False)])
def test_stieltjes_certificate_agrees_with_matrix(lattice, b_eta, expected):
    model = make_coefficient("constant", {"value": 1.0}, make_reaction("linear", {"c": b_eta}))
    bundle = ConstantsBundle(gamma_a=1.0, K_eta=0.0, B_eta=b_eta, lambda0=1.0)
    report = certify(Theorem.SEMILINEAR_STIELTJES, lattice, bundle)
    u = zero_field(lattice)
    verdict = stieltjes_check(assemble_semilinear_system(model, lattice, u, u).system)
    assert report.global_pass is expected
    assert verdict.is_stieltjes is expected
    assert verdict.symmetric and verdict.spd
    assert bool(verdict.offdiag_violations) is not expected


# ==================== Stieltjes 检验 ====================

def test_stieltjes_check_small_matrices():
    assert stieltjes_check(np.array([[2.0, -1.0], [-1.0, 2.0]])).is_stieltjes

    positive = stieltjes_check(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert not positive.is_stieltjes
    assert [(e.row, e.col) for e in positive.offdiag_violations] == [(0, 1), (1, 0)]
    assert not positive.spd

    indefinite = stieltjes_check(np.array([[1.0, -2.0], [-2.0, 1.0]]))
    assert indefinite.symmetric and not indefinite.offdiag_violations
    assert not indefinite.spd

    assert not stieltjes_check(np.array([[2.0, -1.0], [0.0, 2.0]])).symmetric
    with pytest.raises(ValueError):
        stieltjes_check(np.ones((2, 3)))


def test_stieltjes_check_sparse_path():
    n = 600
    matrix = diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]).tocsr()
    verdict = stieltjes_check(matrix)
    assert verdict.size == n
    assert verdict.is_stieltjes


# ==================== 报告 ====================

def test_report_json_uses_aliases_and_infinity(interval):
    report = certify_1d(interval, zero_field(interval), ConstantsBundle(gamma_a=1.0, K_eta=0.0, lambda0=1.0))
    text = write_report(report, None)
    assert "Infinity" in text
    data = json.loads(text)
    assert data["theorem"] == "comparison-1d"
    assert data["bound_constant_mode"] == "corrected-4/3"
    assert data["constants_provenance"] == "user-supplied"
    assert {"id", "pass", "margin"} <= set(data["elements"][0])
    assert data["worst"]["id"] == 0
