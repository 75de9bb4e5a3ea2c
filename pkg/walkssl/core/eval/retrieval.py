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

"""Euclidean retrieval over feature vectors and its mean-average-precision evaluation."""

import logging
from typing import Iterable, Literal, Sequence

import numpy as np
from pydantic import field_validator, model_validator

from walkssl.core.abc import ArrayModel, DatasetError, ItemNotFoundError, NumericError
from walkssl.libs import lcall

logger = logging.getLogger(__name__)


class RetrievalIndex(ArrayModel):
    """
    Attributes:
        source_ids (list[str]): Unique id of every entry.
        labels (list[str | None]): Class label of every entry.
        features (np.ndarray): (n, F) features, one row per entry.
    """

    source_ids: list[str]
    labels: list[str | None]
    features: np.ndarray

    @field_validator("features", mode="before")
    @classmethod
    def _coerce_features(cls, value):
        return cls.as_array(value, np.float64, ndim=2)

    @model_validator(mode="after")
    def _check(self):
        n = self.features.shape[0]
        if len(self.source_ids) != n or len(self.labels) != n:
            raise DatasetError("one source_id and one label per feature row are required")
        if len(set(self.source_ids)) != n:
            raise DatasetError("source_ids of a retrieval index must be unique")
        if not np.isfinite(self.features).all():
            raise NumericError(layer="retrieval index")
        return self

    @classmethod
    def from_features(cls, features: Iterable) -> "RetrievalIndex":
        """Build from objects with ``values``, ``source_id`` and ``label``."""
        features = list(features)
        if not features:
            raise DatasetError("A retrieval index needs at least one feature.")
        return cls(
            source_ids=[f.source_id for f in features],
            labels=[f.label for f in features],
            features=np.stack([np.asarray(f.values, dtype=np.float64) for f in features]),
        )

    def __len__(self) -> int:
        return len(self.source_ids)

    def position(self, source_id: str) -> int:
        try:
            return self.source_ids.index(source_id)
        except ValueError:
            raise ItemNotFoundError(source_id) from None

    def ranking(self, source_id: str) -> np.ndarray:
        """Positions of every other entry, nearest first, ties by source_id."""
        q = self.position(source_id)
        dist = np.linalg.norm(self.features - self.features[q], axis=1)
        order = np.lexsort((np.array(self.source_ids, dtype=object).astype(str), dist))
        return order[order != q]


def build_index(
    features: Sequence,
    splits: dict[str, str | None] | None = None,
    scope: Literal["all", "test"] = "all",
) -> tuple[RetrievalIndex, list[str]]:
    """
    Index and query ids for a retrieval evaluation.

    With ``scope="all"`` the index holds every feature, otherwise only the test
    split. Queries are the test entries; without split information every entry
    is a query.
    """
    splits = splits or {}
    if scope == "test":
        features = [f for f in features if splits.get(f.source_id) == "test"]
    index = RetrievalIndex.from_features(features)
    queries = [sid for sid in index.source_ids if splits.get(sid) == "test"]
    return index, (queries or list(index.source_ids))


def retrieve(index: RetrievalIndex, query_id: str, k: int) -> list[str]:
    """
    The ``k`` nearest entries to ``query_id``, the query itself excluded.

    Raises:
        ItemNotFoundError: If ``query_id`` is not in the index.
    """
    ranked = index.ranking(query_id)[: max(k, 0)]
    return [index.source_ids[i] for i in ranked]


def average_precision(relevance: Sequence[int | bool], n_relevant: int) -> float:
    """
    ``(1 / R) * sum_k precision(k) * rel(k)`` over the ranked relevance list.

    Raises:
        DatasetError: If ``n_relevant`` is below 1.
    """
    if n_relevant < 1:
        raise DatasetError("Average precision needs at least one relevant item.")
    rel = np.asarray(relevance, dtype=bool)
    if not rel.any():
        return 0.0
    hits = np.cumsum(rel)
    ranks = np.arange(1, rel.shape[0] + 1)
    return float(np.sum(hits[rel] / ranks[rel]) / n_relevant)


def query_ap(index: RetrievalIndex, query_id: str) -> float:
    q = index.position(query_id)
    label = index.labels[q]
    ranked = index.ranking(query_id)
    rel = [index.labels[i] == label for i in ranked]
    return average_precision(rel, sum(rel))


def precision_at_k(index: RetrievalIndex, query_id: str, k: int) -> float:
    """Fraction of the ``k`` nearest entries that share the query's label."""
    label = index.labels[index.position(query_id)]
    top = index.ranking(query_id)[:k]
    if top.size == 0:
        return 0.0
    return float(np.mean([index.labels[i] == label for i in top]))


def _valid_queries(index: RetrievalIndex, queries: Iterable[str]) -> tuple[list[str], list[str]]:
    counts: dict = {}
    for label in index.labels:
        counts[label] = counts.get(label, 0) + 1
    kept, excluded = [], []
    for sid in queries:
        label = index.labels[index.position(sid)]
        if label is None or counts[label] < 2:
            excluded.append(sid)
        else:
            kept.append(sid)
    if excluded:
        logger.warning(f"Excluded {len(excluded)} queries without another member of their class")
    return kept, excluded


def retrieval_report(
    index: RetrievalIndex, queries: Iterable[str] | None = None, threads: int = 1
) -> dict:
    """
    Returns:
        ``{"map", "per_class_ap", "n_queries", "excluded"}``; per-class values
        are the mean AP of the queries of each class.

    Raises:
        DatasetError: If no query has another member of its class.
    """
    queries = list(index.source_ids) if queries is None else list(queries)
    kept, excluded = _valid_queries(index, queries)
    if not kept:
        raise DatasetError("No retrieval query has another member of its class.")
    aps = lcall(kept, lambda sid: query_ap(index, sid), threads=threads)
    per_class: dict[str, list[float]] = {}
    for sid, ap in zip(kept, aps):
        per_class.setdefault(index.labels[index.position(sid)], []).append(ap)
    return {
        "map": float(np.mean(aps)),
        "per_class_ap": {c: float(np.mean(v)) for c, v in sorted(per_class.items())},
        "n_queries": len(kept),
        "excluded": excluded,
    }


def mean_average_precision(index: RetrievalIndex, queries: Iterable[str] | None = None) -> float:
    """Mean AP over ``queries`` (all entries by default), each ranking the whole index."""
    return retrieval_report(index, queries)["map"]
