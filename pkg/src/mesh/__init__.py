# Mesh Module
from src.mesh.model import (
    Marker,
    Mesh,
    Mesh1D,
    MeshError,
    MeshParseError,
    MeshValidationError,
    TriMesh2D,
    build_interval_mesh,
    with_neumann_psi,
)
from src.mesh.geometry import (
    ElementGeometry,
    GlobalMeshQuality,
    element_geometry,
    geometry_table,
    mesh_quality,
)
from src.mesh.builders import build_hexagon_mesh, build_lattice_mesh
from src.mesh.refine import refine_uniform

__all__ = [
    "Marker",
    "Mesh",
    "Mesh1D",
    "MeshError",
    "MeshParseError",
    "MeshValidationError",
    "TriMesh2D",
    "build_interval_mesh",
    "with_neumann_psi",
    "ElementGeometry",
    "GlobalMeshQuality",
    "element_geometry",
    "geometry_table",
    "mesh_quality",
    "build_hexagon_mesh",
    "build_lattice_mesh",
    "refine_uniform",
]
