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

"""Quadric-error edge collapse."""

import heapq
import itertools
import logging

import numpy as np

from walkssl.core.abc import ResamplePreconditionError, SimplificationError
from walkssl.core.mesh import Mesh

logger = logging.getLogger(__name__)


def within_tolerance(count: int, target: int, tolerance: float) -> bool:
    """
    True if ``count`` is acceptably close to ``target``.

    The allowed deviation is ``tolerance * target`` but never less than one
    face, since a collapse removes faces two at a time.
    """
    return abs(count - target) <= max(tolerance * target, 1.0)


class QuadricSimplifier:
    """
    Greedy edge collapse ordered by quadric error.

    Each vertex carries the area-weighted sum of the plane quadrics of its
    faces. Edges sit in a heap keyed by the cheapest placement among the
    quadric optimum, both endpoints and the midpoint; placements farther than
    ``max_radius_ratio`` times the reference bounding radius from the reference
    center are never used. Heap entries carry the version stamps of both
    endpoints and are discarded once either endpoint changes.

    A collapse is rejected when it would
      - break the link condition (create a non-manifold edge),
      - flip or squash a face (normal dot product below ``min_normal_dot``),
      - create a duplicate face,
      - leave fewer than ``min_vertices`` vertices.
    """

    def __init__(
        self,
        mesh: Mesh,
        *,
        max_radius_ratio: float = 1.05,
        min_normal_dot: float = 0.1,
        min_vertices: int = 4,
        reference: Mesh | None = None,
    ):
        reference = reference or mesh
        self.mesh = mesh
        self.positions = np.array(mesh.vertices, dtype=np.float64)
        self.faces = np.array(mesh.faces, dtype=np.int64)
        self.face_alive = np.ones(self.faces.shape[0], dtype=bool)
        self.vertex_alive = np.zeros(self.positions.shape[0], dtype=bool)
        self.vertex_alive[np.unique(self.faces)] = True
        self.n_faces = int(self.faces.shape[0])
        self.n_vertices = int(self.vertex_alive.sum())
        self.min_normal_dot = min_normal_dot
        self.min_vertices = min_vertices

        self.center = reference.centroid()
        radius = reference.bounding_radius()
        self.max_radius = max_radius_ratio * radius
        self._area_eps = 1e-14 * max(radius, 1e-300) ** 2

        self.vertex_faces = [set() for _ in range(self.positions.shape[0])]
        for fi, tri in enumerate(self.faces.tolist()):
            for x in tri:
                self.vertex_faces[x].add(fi)
        self.version = np.zeros(self.positions.shape[0], dtype=np.int64)
        self.quadrics = self._vertex_quadrics()
        self._counter = itertools.count()
        self.heap = self._entries(mesh.edges())
        heapq.heapify(self.heap)

    def _vertex_quadrics(self) -> np.ndarray:
        tri = self.positions[self.faces]
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        double_area = np.linalg.norm(n, axis=1)
        unit = n / np.where(double_area > 0, double_area, 1.0)[:, None]
        d = -np.einsum("ij,ij->i", unit, tri[:, 0])
        plane = np.concatenate([unit, d[:, None]], axis=1)
        k = 0.5 * double_area[:, None, None] * plane[:, :, None] * plane[:, None, :]
        q = np.zeros((self.positions.shape[0], 4, 4))
        for corner in range(3):
            np.add.at(q, self.faces[:, corner], k)
        return q

    def placements(self, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Best placement and its quadric cost for each edge in ``edges`` (E, 2)."""
        u, v = edges[:, 0], edges[:, 1]
        q = self.quadrics[u] + self.quadrics[v]
        a, b = q[:, :3, :3], q[:, :3, 3]
        det = np.linalg.det(a)
        scale = np.maximum(np.abs(a).max(axis=(1, 2)), 1e-300) ** 3
        solvable = np.abs(det) > 1e-10 * scale
        a_safe = np.where(solvable[:, None, None], a, np.eye(3))
        optimum = np.linalg.solve(a_safe, -b[..., None])[..., 0]

        pu, pv = self.positions[u], self.positions[v]
        cand = np.stack([optimum, pu, pv, 0.5 * (pu + pv)], axis=1)
        h = np.concatenate([cand, np.ones(cand.shape[:2] + (1,))], axis=2)
        cost = np.einsum("eki,eij,ekj->ek", h, q, h)

        valid = np.ones(cost.shape, dtype=bool)
        valid[:, 0] = solvable
        valid &= np.linalg.norm(cand - self.center, axis=2) <= self.max_radius
        cost = np.where(valid, cost, np.inf)
        best = np.argmin(cost, axis=1)
        rows = np.arange(edges.shape[0])
        return cand[rows, best], cost[rows, best]

    def _entries(self, edges) -> list[tuple]:
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.shape[0] == 0:
            return []
        targets, costs = self.placements(edges)
        return [
            (cost, next(self._counter), u, v, int(self.version[u]), int(self.version[v]), target)
            for (u, v), target, cost in zip(edges.tolist(), targets, costs.tolist())
        ]

    def neighbors(self, x: int) -> set[int]:
        out = set()
        for fi in self.vertex_faces[x]:
            out.update(self.faces[fi].tolist())
        out.discard(x)
        return out

    def _acceptable(self, u: int, v: int, target: np.ndarray) -> bool:
        shared = self.vertex_faces[u] & self.vertex_faces[v]
        if not shared:
            return False
        if self.n_vertices - 1 < self.min_vertices or self.n_faces - len(shared) < 1:
            return False

        # link condition
        opposite = {x for fi in shared for x in self.faces[fi].tolist() if x != u and x != v}
        if self.neighbors(u) & self.neighbors(v) != opposite:
            return False

        moved = np.fromiter((self.vertex_faces[u] | self.vertex_faces[v]) - shared, dtype=np.int64)
        if moved.size == 0:
            return True
        tris = self.faces[moved]
        merged = np.where(tris == v, u, tris)
        keys = {frozenset(t) for t in merged.tolist()}
        if len(keys) != merged.shape[0]:
            return False

        old = self.positions[tris]
        new = self.positions[merged]
        new[merged == u] = target
        n0 = np.cross(old[:, 1] - old[:, 0], old[:, 2] - old[:, 0])
        n1 = np.cross(new[:, 1] - new[:, 0], new[:, 2] - new[:, 0])
        len0 = np.linalg.norm(n0, axis=1)
        len1 = np.linalg.norm(n1, axis=1)
        if (len1 <= self._area_eps).any():
            return False
        live = len0 > self._area_eps
        dots = np.einsum("ij,ij->i", n0[live], n1[live]) / (len0[live] * len1[live])
        return bool((dots >= self.min_normal_dot).all())

    def _collapse(self, u: int, v: int, target: np.ndarray) -> None:
        shared = self.vertex_faces[u] & self.vertex_faces[v]
        for fi in shared:
            self.face_alive[fi] = False
            for x in self.faces[fi].tolist():
                self.vertex_faces[x].discard(fi)
        for fi in self.vertex_faces[v]:
            tri = self.faces[fi]
            tri[tri == v] = u
            self.vertex_faces[u].add(fi)
        self.vertex_faces[v] = set()
        self.vertex_alive[v] = False
        self.positions[u] = target
        self.quadrics[u] += self.quadrics[v]
        self.version[u] += 1
        self.version[v] += 1
        self.n_faces -= len(shared)
        self.n_vertices -= 1
        for entry in self._entries([(u, w) for w in sorted(self.neighbors(u))]):
            heapq.heappush(self.heap, entry)

    def run(self, target_faces: int) -> int:
        """Collapse edges until at most ``target_faces`` remain or no edge can go. Returns the face count."""
        collapses = 0
        while self.n_faces > target_faces and self.heap:
            _, _, u, v, ver_u, ver_v, target = heapq.heappop(self.heap)
            if not (self.vertex_alive[u] and self.vertex_alive[v]):
                continue
            if self.version[u] != ver_u or self.version[v] != ver_v:
                continue
            if not self._acceptable(u, v, target):
                continue
            self._collapse(u, v, target)
            collapses += 1
        logger.debug(f"{collapses} collapses on {self.mesh.source_id or 'mesh'}: {self.n_faces} faces left")
        return self.n_faces

    def result(self) -> Mesh:
        faces = self.faces[self.face_alive]
        used = np.unique(faces)
        remap = -np.ones(self.positions.shape[0], dtype=np.int64)
        remap[used] = np.arange(used.shape[0])
        return self.mesh.with_geometry(self.positions[used], remap[faces])


def simplify(
    mesh: Mesh,
    target_faces: int,
    tolerance: float = 0.02,
    *,
    reference: Mesh | None = None,
    max_radius_ratio: float = 1.05,
    min_normal_dot: float = 0.1,
) -> Mesh:
    """
    Reduce ``mesh`` to about ``target_faces`` faces by quadric-error edge collapse.

    Args:
        mesh: Input mesh.
        target_faces: Face budget, smaller than the current face count.
        tolerance: Fractional deviation accepted on the achieved count.
        reference: Mesh whose centroid and bounding radius bound vertex
            placement (defaults to ``mesh``).

    Raises:
        ResamplePreconditionError: If ``target_faces`` is not below the current count.
        SimplificationError: If the budget cannot be met without degenerate
            geometry; carries the best achievable count.
    """
    if target_faces < 1 or target_faces >= mesh.n_faces:
        raise ResamplePreconditionError(
            f"Target of {target_faces} faces must be positive and below the current "
            f"{mesh.n_faces} faces."
        )
    simplifier = QuadricSimplifier(
        mesh,
        max_radius_ratio=max_radius_ratio,
        min_normal_dot=min_normal_dot,
        reference=reference,
    )
    count = simplifier.run(target_faces)
    if not within_tolerance(count, target_faces, tolerance):
        raise SimplificationError(target_faces, count)
    return simplifier.result()
