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

"""Random surface walks and the coordinate sequences fed to the encoder."""

import numpy as np
from pydantic import Field, field_validator, model_validator

from walkssl.core.abc import ArrayModel, WalkInvariantError
from walkssl.core.mesh import Adjacency, Mesh

DEFAULT_WALK_LEN = 128
DEFAULT_JUMP_PROB = 0.05


class Walk(ArrayModel):
    """
    An ordered sequence of vertex visits.

    Attributes:
        vertex_indices (np.ndarray): (L,) visited vertices.
        jump_flags (np.ndarray): (L,) True where the step was a random jump;
            the first step is always a jump.
        source_id (str): Model the walk was taken on.
        seed (int | None): Seed of the generator that produced the walk.
    """

    vertex_indices: np.ndarray
    jump_flags: np.ndarray
    source_id: str = ""
    seed: int | None = Field(default=None)

    @field_validator("vertex_indices", mode="before")
    @classmethod
    def _coerce_indices(cls, value):
        return cls.as_array(value, np.int64, ndim=1)

    @field_validator("jump_flags", mode="before")
    @classmethod
    def _coerce_flags(cls, value):
        return cls.as_array(value, bool, ndim=1)

    @model_validator(mode="after")
    def _check_shape(self):
        if self.vertex_indices.shape != self.jump_flags.shape:
            raise WalkInvariantError(
                f"walk has {self.vertex_indices.shape[0]} vertices but "
                f"{self.jump_flags.shape[0]} jump flags"
            )
        if self.vertex_indices.shape[0] < 1:
            raise WalkInvariantError("a walk needs at least one step")
        return self

    def __len__(self) -> int:
        return int(self.vertex_indices.shape[0])

    def check(self, adj: Adjacency) -> None:
        """
        Raise WalkInvariantError unless every non-jump step follows a mesh edge.
        """
        idx, jumps = self.vertex_indices, self.jump_flags
        if not jumps[0]:
            raise WalkInvariantError("the first step of a walk must be a jump")
        if idx.min() < 0 or idx.max() >= len(adj):
            raise WalkInvariantError(f"walk visits a vertex outside [0, {len(adj)})")
        for t in np.flatnonzero(~jumps):
            if not adj.is_edge(int(idx[t - 1]), int(idx[t])):
                raise WalkInvariantError(
                    f"step {t} moves from {idx[t - 1]} to {idx[t]} along no edge"
                )

    def to_record(self) -> dict:
        return {
            "source_id": self.source_id,
            "seed": self.seed,
            "vertices": self.vertex_indices.tolist(),
            "jumps": self.jump_flags.tolist(),
        }


class StepSequence(ArrayModel):
    """(L, 3) coordinates of the vertices visited by a walk."""

    steps: np.ndarray

    @field_validator("steps", mode="before")
    @classmethod
    def _coerce_steps(cls, value):
        return cls.as_array(value, np.float64, ndim=2, width=3)

    def __len__(self) -> int:
        return int(self.steps.shape[0])


class WalkBatch(ArrayModel):
    """
    2N walk sequences with positive-pair bookkeeping.

    ``sequences[2i]`` and ``sequences[2i + 1]`` come from augmentations of
    the model ``pair_ids[i]``.
    """

    sequences: np.ndarray
    pair_ids: list[str]
    walks: tuple[Walk, ...] = ()

    @field_validator("sequences", mode="before")
    @classmethod
    def _coerce_sequences(cls, value):
        return cls.as_array(value, np.float64, ndim=3)

    @model_validator(mode="after")
    def _check_pairs(self):
        if self.sequences.shape[0] != 2 * len(self.pair_ids):
            raise WalkInvariantError(
                f"{self.sequences.shape[0]} sequences cannot form {len(self.pair_ids)} pairs"
            )
        if self.sequences.shape[-1] != 3:
            raise WalkInvariantError("walk steps must carry 3 coordinates")
        if self.walks:
            if len(self.walks) != self.sequences.shape[0]:
                raise WalkInvariantError("one walk per sequence is required")
            for i, pid in enumerate(self.pair_ids):
                if self.walks[2 * i].source_id != pid or self.walks[2 * i + 1].source_id != pid:
                    raise WalkInvariantError(f"pair {i} mixes walks of different models")
        return self

    @property
    def n_pairs(self) -> int:
        return len(self.pair_ids)

    @property
    def walk_len(self) -> int:
        return int(self.sequences.shape[1])


def random_walk(
    mesh: Mesh,
    adj: Adjacency,
    length: int = DEFAULT_WALK_LEN,
    jump_prob: float = DEFAULT_JUMP_PROB,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
) -> Walk:
    """
    Walk ``length`` steps over the surface of ``mesh``.

    The walk starts at a uniformly drawn vertex. At every later step one
    uniform number decides: below ``jump_prob``, or whenever the current vertex
    has no unvisited neighbor, the walk jumps to a uniformly drawn vertex;
    otherwise it moves to a uniformly drawn unvisited neighbor. Once every
    vertex has been visited the bookkeeping restarts from the current vertex.

    Args:
        mesh: Mesh to walk on.
        adj: Its adjacency.
        length: Number of steps, at least 2.
        jump_prob: Jump probability in [0, 1].
        rng: Generator; when omitted one is built from ``seed``.
        seed: Recorded on the walk, and used when ``rng`` is omitted.

    Raises:
        WalkInvariantError: If ``length`` or ``jump_prob`` is out of range or
            ``adj`` does not belong to ``mesh``.
    """
    if length < 2:
        raise WalkInvariantError(f"walk length must be at least 2, got {length}")
    if not 0.0 <= jump_prob <= 1.0:
        raise WalkInvariantError(f"jump probability must be in [0, 1], got {jump_prob}")
    n = mesh.n_vertices
    if len(adj) != n:
        raise WalkInvariantError(f"adjacency covers {len(adj)} vertices, mesh has {n}")
    rng = rng if rng is not None else np.random.default_rng(seed)

    idx = np.empty(length, dtype=np.int64)
    jumps = np.zeros(length, dtype=bool)
    visited = np.zeros(n, dtype=bool)

    current = int(rng.integers(n))
    idx[0], jumps[0] = current, True
    visited[current] = True
    n_visited = 1
    for t in range(1, length):
        u = rng.random()
        nbrs = adj.neighbors[current]
        fresh = nbrs[~visited[nbrs]]
        if u < jump_prob or fresh.size == 0:
            current = int(rng.integers(n))
            jumps[t] = True
        else:
            current = int(fresh[rng.integers(fresh.size)])
        idx[t] = current
        if not visited[current]:
            visited[current] = True
            n_visited += 1
        if n_visited == n:
            visited[:] = False
            visited[current] = True
            n_visited = 1
    return Walk(vertex_indices=idx, jump_flags=jumps, source_id=mesh.source_id, seed=seed)


def walk_to_sequence(mesh: Mesh, walk: Walk) -> StepSequence:
    """
    Coordinates of the visited vertices, one row per step.

    Raises:
        WalkInvariantError: If the walk visits a vertex the mesh does not have.
    """
    idx = walk.vertex_indices
    if idx.min() < 0 or idx.max() >= mesh.n_vertices:
        raise WalkInvariantError(
            f"walk visits vertex {int(idx.max())} but the mesh has {mesh.n_vertices} vertices"
        )
    return StepSequence(steps=mesh.vertices[idx])


def walk_coverage(walk: Walk, n_vertices: int) -> float:
    """Fraction of the ``n_vertices`` mesh vertices the walk visits."""
    return float(np.unique(walk.vertex_indices).shape[0]) / float(n_vertices)
