"""mesh: triangle meshes, their file formats, adjacency and synthetic primitives."""

from .mesh import (
    Mesh,
    Adjacency,
    validate_mesh,
    build_adjacency,
    normalize_mesh,
    merge_vertices,
    midpoint_subdivide,
    signed_volume,
    is_watertight,
)
from .io import MeshFormat, parse_mesh, write_mesh, load_mesh, save_mesh
from .synthetic import (
    ShapeClass,
    SyntheticParams,
    SphereParams,
    BoxParams,
    CylinderParams,
    ConeParams,
    TorusParams,
    make_params,
    gen_synthetic,
    random_rotation,
)


__all__ = [
    "Mesh",
    "Adjacency",
    "validate_mesh",
    "build_adjacency",
    "normalize_mesh",
    "merge_vertices",
    "midpoint_subdivide",
    "signed_volume",
    "is_watertight",
    "MeshFormat",
    "parse_mesh",
    "write_mesh",
    "load_mesh",
    "save_mesh",
    "ShapeClass",
    "SyntheticParams",
    "SphereParams",
    "BoxParams",
    "CylinderParams",
    "ConeParams",
    "TorusParams",
    "make_params",
    "gen_synthetic",
    "random_rotation",
]
