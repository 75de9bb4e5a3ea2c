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

"""
Seeded generators for watertight primitive shapes.

Every generator draws its tessellation (unless given explicitly), then a
per-axis aspect scaling and a random rotation, all from one generator seeded
by ``seed``, so the output is a pure function of (class, params, seed).
"""

from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from walkssl.core.abc import ShapeParameterError

from .mesh import Mesh, merge_vertices, midpoint_subdivide


class ShapeClass(str, Enum):
    SPHERE = "sphere"
    BOX = "box"
    CYLINDER = "cylinder"
    TORUS = "torus"
    CONE = "cone"


class SyntheticParams(BaseModel):
    """Parameters shared by every shape class."""

    model_config = ConfigDict(extra="forbid")

    aspect_low: float = Field(default=0.7, gt=0)
    aspect_high: float = Field(default=1.3, gt=0)
    rotate: bool = True

    @model_validator(mode="after")
    def _check_aspect(self):
        if self.aspect_high < self.aspect_low:
            raise ValueError("aspect_high must not be smaller than aspect_low")
        return self


class SphereParams(SyntheticParams):
    subdivisions: int | None = Field(default=None, ge=0, le=5)


class BoxParams(SyntheticParams):
    segments: int | None = Field(default=None, ge=1, le=32)


class CylinderParams(SyntheticParams):
    segments: int | None = Field(default=None, ge=3, le=256)
    rings: int | None = Field(default=None, ge=1, le=64)


class ConeParams(CylinderParams):
    pass


class TorusParams(SyntheticParams):
    tube_ratio: float | None = Field(default=None, gt=0, lt=1)
    major_segments: int | None = Field(default=None, ge=3, le=256)
    minor_segments: int | None = Field(default=None, ge=3, le=128)


PARAMS_BY_CLASS: dict[ShapeClass, type[SyntheticParams]] = {
    ShapeClass.SPHERE: SphereParams,
    ShapeClass.BOX: BoxParams,
    ShapeClass.CYLINDER: CylinderParams,
    ShapeClass.TORUS: TorusParams,
    ShapeClass.CONE: ConeParams,
}


def _grid_faces(rows: int, cols: int, offset: int = 0) -> np.ndarray:
    """Two triangles per cell of a (rows+1) x (cols+1) point grid."""
    r, c = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    p00 = (r * (cols + 1) + c).ravel() + offset
    p01 = p00 + 1
    p10 = p00 + cols + 1
    p11 = p10 + 1
    return np.concatenate(
        [np.stack([p00, p10, p11], axis=1), np.stack([p00, p11, p01], axis=1)], axis=0
    )


def _revolve(radius, z, segments):
    """Grid points of a surface of revolution, rows along ``z``, seam duplicated."""
    theta = np.linspace(0.0, 2.0 * np.pi, segments + 1)
    x = np.outer(radius, np.cos(theta))
    y = np.outer(radius, np.sin(theta))
    zz = np.repeat(np.asarray(z, dtype=np.float64)[:, None], segments + 1, axis=1)
    return np.stack([x, y, zz], axis=-1).reshape(-1, 3)


def _stack(parts):
    vertices, faces, offset = [], [], 0
    for v, f in parts:
        vertices.append(v)
        faces.append(f + offset)
        offset += v.shape[0]
    return np.concatenate(vertices), np.concatenate(faces)


def _orient(vertices, faces, reference) -> np.ndarray:
    """Flip faces whose normal points against ``reference`` (one direction per face)."""
    tri = vertices[faces]
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    flip = np.einsum("ij,ij->i", n, reference) < 0
    faces = faces.copy()
    faces[flip] = faces[flip][:, ::-1]
    return faces


def _star_orient(vertices, faces):
    # convex shapes around the origin: outward means away from it
    return _orient(vertices, faces, vertices[faces].mean(axis=1))


def _icosahedron():
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=np.float64,
    )
    f = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def _sphere(p: SphereParams, rng):
    s = p.subdivisions if p.subdivisions is not None else int(rng.integers(1, 4))
    v, f = _icosahedron()
    for _ in range(s):
        v, f = midpoint_subdivide(v, f)
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
    return v, _star_orient(v, f)


def _box(p: BoxParams, rng):
    n = p.segments if p.segments is not None else int(rng.integers(2, 9))
    u, w = np.meshgrid(np.linspace(-1, 1, n + 1), np.linspace(-1, 1, n + 1), indexing="ij")
    parts = []
    for axis in range(3):
        b, c = (axis + 1) % 3, (axis + 2) % 3
        for side in (-1.0, 1.0):
            pts = np.zeros(((n + 1) ** 2, 3))
            pts[:, axis] = side
            pts[:, b] = u.ravel()
            pts[:, c] = w.ravel()
            parts.append((pts, _grid_faces(n, n)))
    v, f = merge_vertices(*_stack(parts))
    return v, _star_orient(v, f)


def _cylinder(p: CylinderParams, rng):
    m = p.segments if p.segments is not None else int(rng.integers(12, 49))
    h = p.rings if p.rings is not None else int(rng.integers(2, 13))
    side = _revolve(np.ones(h + 1), np.linspace(-1, 1, h + 1), m)
    bottom = _revolve(np.array([1.0, 0.0]), np.array([-1.0, -1.0]), m)
    top = _revolve(np.array([1.0, 0.0]), np.array([1.0, 1.0]), m)
    v, f = merge_vertices(
        *_stack([(side, _grid_faces(h, m)), (bottom, _grid_faces(1, m)), (top, _grid_faces(1, m))])
    )
    return v, _star_orient(v, f)


def _cone(p: ConeParams, rng):
    m = p.segments if p.segments is not None else int(rng.integers(12, 49))
    h = p.rings if p.rings is not None else int(rng.integers(2, 13))
    t = np.linspace(0, 1, h + 1)
    side = _revolve(1.0 - t, -1.0 + 2.0 * t, m)
    base = _revolve(np.array([1.0, 0.0]), np.array([-1.0, -1.0]), m)
    v, f = merge_vertices(*_stack([(side, _grid_faces(h, m)), (base, _grid_faces(1, m))]))
    return v, _star_orient(v, f)


def _torus(p: TorusParams, rng):
    r = p.tube_ratio if p.tube_ratio is not None else float(rng.uniform(0.2, 0.5))
    big = p.major_segments if p.major_segments is not None else int(rng.integers(16, 49))
    small = p.minor_segments if p.minor_segments is not None else int(rng.integers(8, 25))
    theta = np.linspace(0.0, 2.0 * np.pi, big + 1)
    phi = np.linspace(0.0, 2.0 * np.pi, small + 1)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    ring = 1.0 + r * np.cos(ph)
    pts = np.stack([ring * np.cos(th), ring * np.sin(th), r * np.sin(ph)], axis=-1).reshape(-1, 3)
    v, f = merge_vertices(pts, _grid_faces(big, small))
    # outward is away from the nearest point of the core circle
    c = v[f].mean(axis=1)
    core = np.zeros_like(c)
    core[:, :2] = c[:, :2] / np.linalg.norm(c[:, :2], axis=1, keepdims=True)
    return v, _orient(v, f, c - core)


_BUILDERS = {
    ShapeClass.SPHERE: _sphere,
    ShapeClass.BOX: _box,
    ShapeClass.CYLINDER: _cylinder,
    ShapeClass.TORUS: _torus,
    ShapeClass.CONE: _cone,
}


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """A uniformly distributed proper rotation matrix."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def make_params(shape_class: ShapeClass | str, params: Any = None) -> SyntheticParams:
    """
    Validate ``params`` (a dict, a params model or None) for ``shape_class``.

    Raises:
        ShapeParameterError: Unknown class, unknown parameter or value out of range.
    """
    try:
        shape_class = ShapeClass(shape_class)
    except ValueError:
        raise ShapeParameterError("class", f"Unknown shape class '{shape_class}'") from None
    model = PARAMS_BY_CLASS[shape_class]
    if isinstance(params, model):
        return params
    if isinstance(params, BaseModel):
        params = params.model_dump(exclude_unset=True)
    try:
        return model(**(params or {}))
    except ValidationError as e:
        err = e.errors()[0]
        field = ".".join(str(x) for x in err["loc"]) or shape_class.value
        raise ShapeParameterError(field, err["msg"]) from None


def gen_synthetic(
    shape_class: ShapeClass | str,
    params: Any = None,
    seed: int = 0,
    source_id: str | None = None,
) -> Mesh:
    """
    Generate a watertight, outward-oriented primitive.

    Args:
        shape_class: One of sphere, box, cylinder, torus, cone.
        params: Per-class parameters; tessellation left as None is drawn from
            the seed.
        seed: Generator seed.
        source_id: Defaults to ``"<class>-<seed>"``.

    Returns:
        Mesh: labelled with the class name.
    """
    p = make_params(shape_class, params)
    shape_class = ShapeClass(shape_class)
    rng = np.random.default_rng(seed)
    vertices, faces = _BUILDERS[shape_class](p, rng)
    vertices = vertices * rng.uniform(p.aspect_low, p.aspect_high, size=3)
    if p.rotate:
        vertices = vertices @ random_rotation(rng).T
    return Mesh(
        vertices=vertices,
        faces=faces,
        source_id=source_id or f"{shape_class.value}-{seed}",
        label=shape_class.value,
    )
