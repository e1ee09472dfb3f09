"""
网格模型、几何量、加密与网格文件测试
"""
import math

import numpy as np
import pytest

from src.fem.assembly import neumann_load
from src.fem.basis import basis_gradients
from src.mesh.builders import build_lattice_mesh
from src.mesh.geometry import compute_geometry, element_geometry, geometry_table, mesh_quality
from src.mesh.model import (
    Mesh1D,
    MeshParseError,
    MeshValidationError,
    TriMesh2D,
    build_interval_mesh,
    with_neumann_psi,
)
from src.mesh.refine import refine_uniform
from src.storage.mesh_file import load_mesh, save_mesh


def _random_acute_triangles(rng, count):
    tris = []
    while len(tris) < count:
        p = rng.uniform(0.0, 1.0, size=(3, 2))
        table = compute_geometry(p, np.array([[0, 1, 2]]))
        angles = table.angles[0]
        if angles.max() < math.pi / 2 - 1e-3 and angles.min() > 0.05:
            tris.append(p)
    return tris


# ==================== 几何恒等式 ====================

def test_equilateral_constants():
    p = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
    table = compute_geometry(p, np.array([[0, 1, 2]]))
    assert table.area[0] == pytest.approx(math.sqrt(3.0) / 4.0)
    assert table.angles[0] == pytest.approx([math.pi / 3] * 3)
    assert table.c_T[0] == pytest.approx(0.5)
    assert table.s_T[0] == pytest.approx(math.sqrt(3.0) / 2.0)
    assert table.r_T[0] == pytest.approx(1.0)


def test_right_triangle_constants():
    p = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    table = compute_geometry(p, np.array([[0, 1, 2]]))
    assert table.angles[0, 0] == pytest.approx(math.pi / 2)
    assert table.c_T[0] == pytest.approx(0.0, abs=1e-15)
    assert table.r_T[0] == pytest.approx(1.0 / math.sqrt(2.0))


def test_gradient_identities_on_random_acute_triangles(rng):
    for p in _random_acute_triangles(rng, 2000):
        table = compute_geometry(p, np.array([[0, 1, 2]]))
        area = table.area[0]
        theta = table.angles[0]
        edges = table.edge_lengths[0]
        grads = basis_gradients(p)

        assert np.abs(grads.sum(axis=0)).max() <= 1e-12 * np.abs(grads).max()
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            assert grads[i] @ grads[i] == pytest.approx(edges[i] ** 2 / (4.0 * area ** 2), rel=1e-11)
            assert grads[i] @ grads[j] == pytest.approx(-1.0 / math.tan(theta[k]) / (2.0 * area), rel=1e-10)

        r = table.r_T[0]
        for i in range(3):
            for j in range(3):
                assert r * edges[i] <= edges[j] * (1.0 + 1e-12)
                assert edges[j] <= edges[i] / r * (1.0 + 1e-12)
        assert 0.0 < table.c_T[0] < 1.0
        assert 0.0 < table.s_T[0] <= 1.0
        assert 0.0 < r <= 1.0


def test_element_geometry_min_cot(hexagon):
    geom = element_geometry(hexagon, 0)
    assert geom.min_cot == pytest.approx(1.0 / math.sqrt(3.0))
    assert geom.area == pytest.approx(math.sqrt(3.0) / 4.0)


# ==================== 网格质量 ====================

def test_mesh_quality_acute_hexagon(hexagon):
    quality = mesh_quality(hexagon)
    assert quality.acute
    assert quality.t_max == pytest.approx(math.pi / 3)
    assert quality.c_min == pytest.approx(0.5)
    assert quality.n_elements == 6


def test_mesh_quality_right_angle_is_not_acute():
    mesh = TriMesh2D(
        vertices=[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        triangles=[[0, 1, 2]],
        boundary_edges=[[0, 1], [1, 2], [2, 0]],
        boundary_markers=("D", "D", "D"),
    )
    quality = mesh_quality(mesh)
    assert not quality.acute
    assert quality.worst_elements == [0]


def test_mesh_quality_1d_is_trivially_acute(interval):
    quality = mesh_quality(interval)
    assert quality.acute
    assert quality.dimension == 1


# ==================== 校验 ====================

def test_interval_rejects_non_monotone_nodes():
    with pytest.raises(MeshValidationError):
        build_interval_mesh([0.0, 0.5, 0.4, 1.0])


def test_interval_rejects_empty_dirichlet_boundary():
    with pytest.raises(MeshValidationError):
        build_interval_mesh([0.0, 1.0], bc=("N", "N"))


def test_clockwise_triangle_rejected():
    with pytest.raises(MeshValidationError) as e:
        TriMesh2D(
            vertices=[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
            triangles=[[0, 1, 2]],
            boundary_edges=[[0, 1], [1, 2], [2, 0]],
            boundary_markers=("D", "D", "D"),
        )
    assert e.value.element == 0


def test_hanging_node_rejected():
    vertices = [[0.0, 0.0], [2.0, 0.0], [1.0, 2.0], [1.0, 0.0], [1.0, -1.5]]
    with pytest.raises(MeshValidationError):
        TriMesh2D(
            vertices=vertices,
            triangles=[[0, 1, 2], [0, 4, 3], [3, 4, 1]],
            boundary_edges=[[1, 2], [2, 0], [0, 4], [4, 1]],
            boundary_markers=("D",) * 4,
        )


def test_folded_fan_rejected():
    # 外圈绕中心转两周, 每条内部边恰被两个正向三角形共享
    degrees = [0, 90, 180, 270, 45, 135, 225, 315]
    ring = [[math.cos(math.radians(d)), math.sin(math.radians(d))] for d in degrees]
    n = len(ring)
    with pytest.raises(MeshValidationError) as e:
        TriMesh2D(
            vertices=[[0.0, 0.0]] + ring,
            triangles=[[0, k + 1, (k + 1) % n + 1] for k in range(n)],
            boundary_edges=[[k + 1, (k + 1) % n + 1] for k in range(n)],
            boundary_markers=("D",) * n,
        )
    assert e.value.element == 0
    assert "重叠" in str(e.value)


def test_neumann_override():
    mesh = build_lattice_mesh(2, 2, neumann_sides=("top",), psi=0.0)
    updated = with_neumann_psi(mesh, 0.75)
    assert {psi for _, _, psi in updated.neumann_edges()} == {0.75}
    assert len(updated.neumann_edges()) == 2

    line = build_interval_mesh([0.0, 0.5, 1.0], bc=("D", "N"))
    assert with_neumann_psi(line, -2.0).neumann_loads() == [(2, -2.0)]


# ==================== 加密 ====================

def test_red_refinement_preserves_angles(jittered_lattice):
    fine = refine_uniform(jittered_lattice)
    coarse_table = geometry_table(jittered_lattice)
    fine_table = geometry_table(fine)
    assert fine.n_elements == 4 * jittered_lattice.n_elements
    for m in range(jittered_lattice.n_elements):
        parent = np.sort(coarse_table.angles[m])
        for child in range(4 * m, 4 * m + 4):
            assert np.sort(fine_table.angles[child]) == pytest.approx(parent, abs=1e-12)
            assert fine_table.area[child] == pytest.approx(coarse_table.area[m] / 4.0, rel=1e-12)
    assert mesh_quality(fine).t_max == pytest.approx(mesh_quality(jittered_lattice).t_max, abs=1e-12)


def test_red_refinement_keeps_coarse_vertices(lattice):
    fine = refine_uniform(lattice)
    n = lattice.n_vertices
    assert np.array_equal(fine.vertices[:n], lattice.vertices)
    assert np.array_equal(fine.midpoint_parents[:n, 0], np.arange(n))
    assert np.array_equal(fine.dirichlet_mask[:n], lattice.dirichlet_mask)


def test_interval_refinement_halves_spacing(interval):
    fine = refine_uniform(interval)
    assert isinstance(fine, Mesh1D)
    assert fine.n_elements == 2 * interval.n_elements
    assert fine.h == pytest.approx(np.full(fine.n_elements, 0.05))


# ==================== 网格文件 ====================

def test_mesh_file_save_load(tmp_path, jittered_lattice):
    path = tmp_path / "mesh.txt"
    save_mesh(jittered_lattice, path)
    loaded = load_mesh(path)
    assert np.array_equal(loaded.vertices, jittered_lattice.vertices)
    assert np.array_equal(loaded.triangles, jittered_lattice.triangles)
    assert loaded.boundary_markers == jittered_lattice.boundary_markers


def test_mesh_file_1d_neumann(tmp_path):
    path = tmp_path / "line.txt"
    path.write_text("dim 1\nvertices 3\n0.0\n0.5\n1.0\nboundary 2\n0 D\n2 N 0.25\n", encoding="utf-8")
    mesh = load_mesh(path)
    assert mesh.dirichlet_ends == (True, False)
    assert mesh.neumann_loads() == [(2, 0.25)]


def test_mesh_file_psi_is_constant_per_edge(tmp_path):
    path = tmp_path / "square.txt"
    path.write_text(
        "dim 2\n"
        "vertices 4\n0 0\n1 0\n1 1\n0 1\n"
        "triangles 2\n0 1 2\n0 2 3\n"
        "boundary 4\n0 1 D\n1 2 N 2.0\n2 3 N -1.0\n3 0 D 5.0\n",
        encoding="utf-8",
    )
    mesh = load_mesh(path)
    assert mesh.neumann_edges() == [(1, 2, 2.0), (2, 3, -1.0)]
    # 每条边的 ψ|e|/2 分到两个端点, Dirichlet 边上的 psi 被忽略
    assert np.allclose(neumann_load(mesh), [0.0, 1.0, 0.5, -0.5])


def test_mesh_file_reports_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("dim 2\nvertices 3\n0 0\n1 0\n0 x\n", encoding="utf-8")
    with pytest.raises(MeshParseError) as e:
        load_mesh(path)
    assert e.value.line == 5


def test_mesh_file_degenerate_triangle_line(tmp_path):
    path = tmp_path / "degenerate.txt"
    path.write_text(
        "dim 2\n"
        "vertices 3\n0 0\n1 0\n2 0\n"
        "triangles 1\n0 1 2\n"
        "boundary 3\n0 1 D\n1 2 D\n2 0 D\n",
        encoding="utf-8",
    )
    with pytest.raises(MeshValidationError) as e:
        load_mesh(path)
    assert e.value.line == 7


def test_mesh_file_wrong_dimension(tmp_path, interval):
    path = tmp_path / "line.txt"
    save_mesh(interval, path)
    with pytest.raises(MeshParseError):
        load_mesh(path, dimension=2)
    assert isinstance(load_mesh(path, dimension=1), Mesh1D)
