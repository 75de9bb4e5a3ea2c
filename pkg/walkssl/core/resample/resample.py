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

import logging

from pydantic import BaseModel, Field, field_validator

from walkssl.core.mesh import Mesh, midpoint_subdivide

from .simplify import simplify, within_tolerance

logger = logging.getLogger(__name__)


class ResampleTargets(BaseModel):
    """
    Face budgets of the resolution augmentations.

    Attributes:
        face_counts (list[int]): Positive face counts, ascending.
        tolerance (float): Fractional deviation allowed on each achieved count.
    """

    face_counts: list[int] = Field(default_factory=lambda: [1000, 2000, 4000], min_length=1)
    tolerance: float = Field(default=0.02, ge=0, lt=1)

    @field_validator("face_counts")
    @classmethod
    def _check_counts(cls, value):
        if any(c <= 0 for c in value):
            raise ValueError("face counts must be strictly positive")
        if value != sorted(value):
            raise ValueError("face counts must be sorted ascending")
        return value


def subdivide(mesh: Mesh) -> Mesh:
    """Midpoint 1-to-4 subdivision; the face count becomes exactly four times larger."""
    vertices, faces = midpoint_subdivide(mesh.vertices, mesh.faces)
    return mesh.with_geometry(vertices, faces)


def resample_to(mesh: Mesh, targets: ResampleTargets | None = None) -> list[Mesh]:
    """
    One augmentation of ``mesh`` per target face count.

    A mesh with fewer faces than a target is subdivided until it has at least
    that many, then simplified down unless it is already within tolerance.
    Placement during simplification is bounded by the input's bounding
    sphere: every output vertex lies within 1.05 times the input's bounding
    radius of the input's vertex centroid. The bound is not measured about
    the output's own centroid, which may drift. All outputs keep
    ``mesh.source_id`` and ``mesh.label``.

    Raises:
        SimplificationError: Propagated from :func:`simplify`.
    """
    targets = targets or ResampleTargets()
    levels = [mesh]
    out = []
    for target in targets.face_counts:
        level = 0
        while levels[level].n_faces < target:
            level += 1
            if level == len(levels):
                levels.append(subdivide(levels[-1]))
        base = levels[level]
        if within_tolerance(base.n_faces, target, targets.tolerance):
            out.append(base)
            continue
        logger.debug(
            f"{mesh.source_id or 'mesh'}: {base.n_faces} -> {target} faces "
            f"after {level} subdivision(s)"
        )
        out.append(simplify(base, target, targets.tolerance, reference=mesh))
    return out
