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

"""Per-mesh feature vectors from a trained encoder, and their JSON-lines / CSV export."""

import math
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, field_validator

from walkssl.core.abc import ArrayModel, ConfigError, NumericError
from walkssl.core.mesh import Adjacency, Mesh, build_adjacency
from walkssl.core.nn import encoder_forward
from walkssl.core.walker import MeshDataset, random_walk, walk_to_sequence
from walkssl.libs import dataframe, lcall

from .checkpoint import Checkpoint

DEFAULT_INFERENCE_WALKS = 32


class FeatureVector(ArrayModel):
    """
    Pre-projection encoder feature of one model.

    Attributes:
        values (np.ndarray): (F,) feature.
        source_id (str): Model the feature describes.
        label (str | None): Class label, when known.
    """

    values: np.ndarray
    source_id: str
    label: str | None = None

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, value):
        arr = cls.as_array(value, np.float64, ndim=1)
        if not np.isfinite(arr).all():
            raise NumericError(layer="feature")
        return arr

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


class EmbeddingRecord(BaseModel):
    """One line of an embeddings file."""

    source_id: str
    label: str | None = None
    split: str | None = None
    vector: list[float]


def select_central_walks(features: np.ndarray, keep: int | None = None) -> np.ndarray:
    """
    Mask of the ``keep`` features closest to the mean feature.

    ``keep`` defaults to ``ceil(n / 2)``. Distances are compared after
    rounding to nine significant digits of the largest one, and equal
    distances keep the lower index.
    """
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    keep = math.ceil(n / 2) if keep is None else keep
    dist = np.linalg.norm(features - features.mean(axis=0), axis=1)
    scale = dist.max()
    key = np.round(dist / scale * 1e9) if scale > 0 else np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    mask[np.argsort(key, kind="stable")[:keep]] = True
    return mask


def embed_mesh(
    checkpoint: Checkpoint,
    mesh: Mesh,
    n_walks: int = DEFAULT_INFERENCE_WALKS,
    rng: np.random.Generator | None = None,
    adj: Adjacency | None = None,
) -> FeatureVector:
    """
    Average feature of the ``ceil(n_walks / 2)`` walks closest to the mean walk feature.

    Walk length and jump probability come from the checkpoint's config.

    Raises:
        ConfigError: If ``n_walks`` is below 2.
    """
    if n_walks < 2:
        raise ConfigError(f"Embedding needs at least 2 walks, got {n_walks}.")
    rng = rng if rng is not None else np.random.default_rng()
    adj = adj if adj is not None else build_adjacency(mesh)
    cfg = checkpoint.config
    seeds = rng.integers(0, 2**63 - 1, size=n_walks).tolist()
    seqs = np.stack(
        [
            walk_to_sequence(mesh, random_walk(mesh, adj, cfg.walk_len, cfg.jump_prob, seed=s)).steps
            for s in seeds
        ]
    )
    feats, _ = encoder_forward(checkpoint.encoder, seqs.astype(checkpoint.encoder.dtype))
    feats = feats.astype(np.float64)
    mask = select_central_walks(feats)
    return FeatureVector(values=feats[mask].mean(axis=0), source_id=mesh.source_id, label=mesh.label)


def embed_dataset(
    checkpoint: Checkpoint,
    dataset: MeshDataset,
    n_walks: int = DEFAULT_INFERENCE_WALKS,
    rng: np.random.Generator | None = None,
    threads: int = 1,
) -> list[FeatureVector]:
    """
    One feature per model, in dataset order, computed on its largest augmentation.

    Each model gets its own seed drawn from ``rng``, so results do not depend
    on ``threads``.
    """
    rng = rng if rng is not None else np.random.default_rng()
    ids = dataset.source_ids
    seeds = rng.integers(0, 2**63 - 1, size=len(ids)).tolist()

    def _embed(task):
        sid, seed = task
        mesh, adj = dataset.largest(sid)
        return embed_mesh(checkpoint, mesh, n_walks, np.random.default_rng(seed), adj)

    return lcall(list(zip(ids, seeds)), _embed, threads=threads)


def to_records(
    features: Sequence[FeatureVector], splits: dict[str, str] | None = None
) -> list[EmbeddingRecord]:
    splits = splits or {}
    return [
        EmbeddingRecord(
            source_id=f.source_id,
            label=f.label,
            split=splits.get(f.source_id),
            vector=f.values.tolist(),
        )
        for f in features
    ]


def save_embeddings(
    features: Sequence[FeatureVector], path: str | Path, splits: dict[str, str] | None = None
) -> Path:
    """Write features as JSON lines ``{source_id, label, split, vector}``."""
    return dataframe.write_jsonl(to_records(features, splits), path)


def load_embeddings(path: str | Path) -> tuple[list[FeatureVector], dict[str, str | None]]:
    """
    Returns:
        The features and the split of every source_id.
    """
    records = [EmbeddingRecord.model_validate(r) for r in dataframe.read_jsonl(path)]
    features = [FeatureVector(values=r.vector, source_id=r.source_id, label=r.label) for r in records]
    return features, {r.source_id: r.split for r in records}


def embeddings_to_df(
    features: Sequence[FeatureVector], splits: dict[str, str] | None = None
) -> pd.DataFrame:
    """Wide table with ``source_id``, ``label``, ``split`` and one ``f<i>`` column per dimension."""
    splits = splits or {}
    meta = pd.DataFrame(
        {
            "source_id": [f.source_id for f in features],
            "label": [f.label for f in features],
            "split": [splits.get(f.source_id) for f in features],
        }
    )
    if not features:
        return meta
    values = np.stack([f.values for f in features])
    cols = pd.DataFrame(values, columns=[f"f{i}" for i in range(values.shape[1])])
    return pd.concat([meta, cols], axis=1)
