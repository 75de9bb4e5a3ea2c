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
from typing import Iterable, Sequence

import numpy as np

from walkssl.core.abc import DatasetError, ItemNotFoundError
from walkssl.core.mesh import Adjacency, Mesh, build_adjacency
from walkssl.libs import lcall

from .walk import DEFAULT_JUMP_PROB, DEFAULT_WALK_LEN, WalkBatch, random_walk, walk_to_sequence

logger = logging.getLogger(__name__)


class MeshDataset:
    """
    Resampled meshes grouped by ``source_id``.

    Models keep the order in which their first augmentation appears;
    augmentations of one model keep their input order. Adjacency is built
    once per mesh.
    """

    def __init__(
        self,
        meshes: Iterable[Mesh],
        threads: int = 1,
        adjacency: Sequence[Adjacency] | None = None,
    ):
        self.meshes: list[Mesh] = list(meshes)
        self._groups: dict[str, list[int]] = {}
        for i, mesh in enumerate(self.meshes):
            self._groups.setdefault(mesh.source_id, []).append(i)
        if adjacency is None:
            adjacency = lcall(self.meshes, build_adjacency, threads=threads)
        if len(adjacency) != len(self.meshes):
            raise DatasetError("one adjacency per mesh is required")
        self._adjacency: list[Adjacency] = list(adjacency)

    def __len__(self) -> int:
        return len(self._groups)

    def __contains__(self, source_id: str) -> bool:
        return source_id in self._groups

    @property
    def source_ids(self) -> list[str]:
        return list(self._groups)

    @property
    def n_meshes(self) -> int:
        return len(self.meshes)

    def _indices(self, source_id: str) -> list[int]:
        try:
            return self._groups[source_id]
        except KeyError:
            raise ItemNotFoundError(source_id) from None

    def augmentations(self, source_id: str) -> list[tuple[Mesh, Adjacency]]:
        return [(self.meshes[i], self._adjacency[i]) for i in self._indices(source_id)]

    def largest(self, source_id: str) -> tuple[Mesh, Adjacency]:
        """The augmentation with the most faces; the first one wins ties."""
        idx = self._indices(source_id)
        best = max(idx, key=lambda i: (self.meshes[i].n_faces, -i))
        return self.meshes[best], self._adjacency[best]

    def labels(self) -> dict[str, str | None]:
        """Class label per model, for evaluation code only."""
        return {sid: self.meshes[idx[0]].label for sid, idx in self._groups.items()}

    def training_view(self) -> "TrainingSet":
        return TrainingSet(self.meshes, adjacency=self._adjacency)


class TrainingSet(MeshDataset):
    """A :class:`MeshDataset` whose meshes carry no labels. Training accepts only this type."""

    def __init__(
        self,
        meshes: Iterable[Mesh],
        threads: int = 1,
        adjacency: Sequence[Adjacency] | None = None,
    ):
        super().__init__([m.without_label() for m in meshes], threads=threads, adjacency=adjacency)

    def labels(self) -> dict[str, None]:
        return {sid: None for sid in self._groups}


def _walk_task(task, walk_len, jump_prob):
    mesh, adj, seed = task
    walk = random_walk(mesh, adj, walk_len, jump_prob, seed=seed)
    return walk, walk_to_sequence(mesh, walk).steps


def make_batch(
    dataset: MeshDataset,
    batch_size: int,
    walk_len: int = DEFAULT_WALK_LEN,
    jump_prob: float = DEFAULT_JUMP_PROB,
    rng: np.random.Generator | None = None,
    *,
    source_ids: Sequence[str] | None = None,
    threads: int = 1,
) -> WalkBatch:
    """
    Two walks per model for ``batch_size`` distinct models.

    Models are drawn from ``rng`` without replacement unless ``source_ids``
    names them. Each walk independently picks one augmentation of its model.
    Every walk gets its own integer seed drawn from ``rng``, so the batch is
    the same for any number of ``threads``.

    Raises:
        DatasetError: If the dataset holds fewer than ``batch_size`` models
            or ``source_ids`` repeats a model.
    """
    rng = rng if rng is not None else np.random.default_rng()
    if source_ids is None:
        if batch_size < 1 or len(dataset) < batch_size:
            raise DatasetError(
                f"Batch of {batch_size} models requested from a dataset of {len(dataset)} models."
            )
        ids = dataset.source_ids
        chosen = [ids[i] for i in rng.choice(len(ids), size=batch_size, replace=False)]
    else:
        chosen = list(source_ids)
        if len(set(chosen)) != len(chosen):
            raise DatasetError("A batch must not repeat a model.")
        if not chosen:
            raise DatasetError("A batch needs at least one model.")

    tasks = []
    for sid in chosen:
        augs = dataset.augmentations(sid)
        for _ in range(2):
            mesh, adj = augs[int(rng.integers(len(augs)))]
            tasks.append([mesh, adj])
    seeds = rng.integers(0, 2**63 - 1, size=len(tasks))
    for task, seed in zip(tasks, seeds.tolist()):
        task.append(seed)

    results = lcall(tasks, _walk_task, threads=threads, walk_len=walk_len, jump_prob=jump_prob)
    walks = tuple(w for w, _ in results)
    sequences = np.stack([s for _, s in results])
    return WalkBatch(sequences=sequences, pair_ids=chosen, walks=walks)
