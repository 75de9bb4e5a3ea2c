"""
Copyright 2024 The walkssl authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""

"""Triangle mesh and vertex adjacency types."""

import numpy as np
from pydantic import Field, field_validator, model_validator

from walkssl.core.abc import ArrayModel, DegenerateMeshError, MeshInvariantError


class Mesh(ArrayModel):
    """
    A triangular surface mesh.

    Attributes:
        vertices (np.ndarray): (V, 3) float64 positions in model units.
        faces (np.ndarray): (F, 3) int64 vertex-index triples.
        source_id (str): Identifier of the original model, shared by all of
            its resampled augmentations.
        label (str | None): Class tag. Only evaluation code may read it.
    """

    vertices: np.ndarray
    faces: np.ndarray
    source_id: str = ""
    label: str | None = Field(default=None)

    @field_validator("vertices", mode="before")
    @classmethod
    def _coerce_vertices(cls, value):
        return cls.as_array(value, np.float64, ndim=2, width=3)

    @field_validator("faces", mode="before")
    @classmethod
    def _coerce_faces(cls, value):
        return cls.as_array(value, np.int64, ndim=2, width=3)

    @model_validator(mode="after")
    def _check_invariants(self):
        validate_mesh(self)
        return self

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_faces(self) -> int:
        return int(self.faces.shape[0])

    def with_geometry(self, vertices, faces=None) -> "Mesh":
        """Return a copy with new geometry, keeping source_id and label."""
        return Mesh(
            vertices=vertices,
            faces=self.faces if faces is None else faces,
            source_id=self.source_id,
            label=self.label,
        )

    def without_label(self) -> "Mesh":
        return Mesh.model_construct(
            vertices=self.vertices,
            faces=self.faces,
            source_id=self.source_id,
            label=None,
        )

    def edges(self) -> np.ndarray:
        """Unique undirected edges as an (E, 2) array with ``e[:, 0] < e[:, 1]``."""
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]], axis=0)
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def face_normals(self, unit: bool = True) -> np.ndarray:
        v = self.vertices[self.faces]
        n = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
        if not unit:
            return n
        norm = np.linalg.norm(n, axis=1, keepdims=True)
        return n / np.where(norm > 0, norm, 1.0)

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_normals(unit=False), axis=1)

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def bounding_radius(self, center=None) -> float:
        """Largest vertex distance from ``center`` (default: the vertex centroid)."""
        c = self.centroid() if center is None else np.asarray(center, dtype=np.float64)
        return float(np.linalg.norm(self.vertices - c, axis=1).max())


class Adjacency(ArrayModel):
    """
    Vertex adjacency derived from face edges.

    ``neighbors[i]`` is the sorted array of vertices sharing an edge with ``i``.
    The relation is symmetric, has no self-loops and no duplicates.
    """

    neighbors: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.neighbors)

    def degree(self, i: int) -> int:
        return int(self.neighbors[i].shape[0])

    def is_edge(self, i: int, j: int) -> bool:
        nbrs = self.neighbors[i]
        k = np.searchsorted(nbrs, j)
        return bool(k < nbrs.shape[0] and nbrs[k] == j)

    def is_symmetric(self) -> bool:
        return all(self.is_edge(int(j), i) for i, nbrs in enumerate(self.neighbors) for j in nbrs)


def validate_mesh(mesh: Mesh) -> None:
    """
    Check the structural invariants of ``mesh``.

    Raises:
        MeshInvariantError: On empty geometry, out-of-range or repeated face
            indices, or non-finite coordinates.
    """
    v, f = mesh.vertices, mesh.faces
    if v.ndim != 2 or v.shape[0] < 3:
        raise MeshInvariantError(f"a mesh needs at least 3 vertices, got {v.shape[0] if v.ndim else 0}")
    if f.ndim != 2 or f.shape[0] < 1:
        raise MeshInvariantError("a mesh needs at least one face")
    if not np.isfinite(v).all():
        raise MeshInvariantError("vertex coordinates must be finite")
    if f.min() < 0 or f.max() >= v.shape[0]:
        raise MeshInvariantError(
            f"face index out of range [0, {v.shape[0]}): min {f.min()}, max {f.max()}"
        )
    degenerate = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
    if degenerate.any():
        raise MeshInvariantError(
            f"face {int(np.flatnonzero(degenerate)[0])} repeats a vertex index"
        )


def build_adjacency(mesh: Mesh) -> Adjacency:
    """
    Build the vertex adjacency of ``mesh`` from its face edges.

    Vertices that belong to no face get an empty neighbor list.
    """
    e = mesh.edges()
    both = np.concatenate([e, e[:, ::-1]], axis=0)
    order = np.lexsort((both[:, 1], both[:, 0]))
    both = both[order]
    counts = np.bincount(both[:, 0], minlength=mesh.n_vertices)
    splits = np.cumsum(counts)[:-1]
    neighbors = tuple(np.split(both[:, 1], splits))
    return Adjacency(neighbors=neighbors)


def normalize_mesh(mesh: Mesh) -> Mesh:
    """
    Translate the vertex centroid to the origin and scale uniformly so the
    largest vertex distance from the origin is 1. Connectivity is unchanged.

    Raises:
        DegenerateMeshError: If all vertices coincide.
    """
    v = mesh.vertices - mesh.vertices.mean(axis=0)
    radius = np.linalg.norm(v, axis=1).max()
    if not np.isfinite(radius) or radius <= 1e-12:
        raise DegenerateMeshError()
    v = v / radius
    # second centering pass removes the rounding left by the first
    v = v - v.mean(axis=0)
    v = v / np.linalg.norm(v, axis=1).max()
    return mesh.with_geometry(v)


def merge_vertices(vertices, faces, decimals: int = 9) -> tuple[np.ndarray, np.ndarray]:
    """
    Weld vertices that coincide after rounding to ``decimals`` places, drop
    faces that collapse and unused vertices.

    Returns:
        (vertices, faces) with vertices in first-occurrence order.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    faces = np.asarray(faces, dtype=np.int64)
    key = np.round(vertices, decimals) + 0.0  # +0.0 folds -0.0 into 0.0
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    # relabel unique rows by first occurrence to keep a stable order
    rank = np.empty_like(first)
    rank[np.argsort(first)] = np.arange(first.shape[0])
    new_index = rank[inverse]
    merged = vertices[np.sort(first)]
    f = new_index[faces]
    keep = (f[:, 0] != f[:, 1]) & (f[:, 1] != f[:, 2]) & (f[:, 0] != f[:, 2])
    f = f[keep]
    used = np.unique(f)
    remap = -np.ones(merged.shape[0], dtype=np.int64)
    remap[used] = np.arange(used.shape[0])
    return merged[used], remap[f]


def midpoint_subdivide(vertices, faces) -> tuple[np.ndarray, np.ndarray]:
    """
    Split every triangle (a, b, c) into four through its edge midpoints.

    Midpoints of shared edges are created once. New vertices follow the
    original ones in sorted-edge order. Children of face ``i`` are faces
    ``4i .. 4i+3``: (a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca).
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    faces = np.asarray(faces, dtype=np.int64)
    n_faces = faces.shape[0]
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]], axis=0)
    e.sort(axis=1)
    uniq, inverse = np.unique(e, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    mids = 0.5 * (vertices[uniq[:, 0]] + vertices[uniq[:, 1]])
    mid_index = vertices.shape[0] + inverse
    ab = mid_index[:n_faces]
    bc = mid_index[n_faces : 2 * n_faces]
    ca = mid_index[2 * n_faces :]
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    children = np.stack(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ],
        axis=1,
    ).reshape(-1, 3)
    return np.concatenate([vertices, mids], axis=0), children


def signed_volume(vertices, faces) -> float:
    """Signed enclosed volume; positive for a closed, outward-oriented surface."""
    v = np.asarray(vertices, dtype=np.float64)[np.asarray(faces)]
    return float(np.einsum("ij,ij->i", v[:, 0], np.cross(v[:, 1], v[:, 2])).sum() / 6.0)


def is_watertight(mesh: Mesh) -> bool:
    """True if every undirected edge is shared by exactly two faces."""
    f = mesh.faces
    e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]], axis=0)
    e.sort(axis=1)
    _, counts = np.unique(e, axis=0, return_counts=True)
    return bool((counts == 2).all())
