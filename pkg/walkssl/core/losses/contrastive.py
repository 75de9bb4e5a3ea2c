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

"""Cosine similarity, row normalization and the normalized temperature-scaled cross-entropy loss."""

import numpy as np
from pydantic import field_validator, model_validator

from walkssl.core.abc import ArrayModel, DimensionError, NumericError, ZeroNormError


class EmbeddingBatch(ArrayModel):
    """
    2N projected embeddings; rows ``2i`` and ``2i + 1`` are positive pair ``i``.
    """

    vectors: np.ndarray

    @field_validator("vectors", mode="before")
    @classmethod
    def _coerce(cls, value):
        return cls.as_array(value, np.float64, ndim=2)

    @model_validator(mode="after")
    def _check(self):
        check_embeddings(self.vectors)
        return self

    @property
    def n_pairs(self) -> int:
        return self.vectors.shape[0] // 2


def check_embeddings(z) -> np.ndarray:
    """
    Return ``z`` as a 2-d array with an even, nonzero row count and finite values.
    """
    if isinstance(z, EmbeddingBatch):
        return z.vectors
    z = np.asarray(z)
    if z.ndim != 2 or z.shape[0] == 0 or z.shape[0] % 2:
        raise DimensionError("(2N, d) with N >= 1", z.shape)
    if not np.isfinite(z).all():
        raise NumericError(layer="embeddings")
    return z


def cosine_sim(a, b) -> float:
    """
    Raises:
        ZeroNormError: If either vector is zero.
    """
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroNormError("cosine_sim")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def l2_normalize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Scale every row to unit length.

    Returns:
        The normalized rows and the (n, 1) row norms, which
        :func:`l2_normalize_backward` needs.
    """
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if (norms == 0).any():
        raise ZeroNormError("l2_normalize")
    return x / norms, norms


def l2_normalize_backward(u: np.ndarray, norms: np.ndarray, du: np.ndarray) -> np.ndarray:
    return (du - u * np.sum(u * du, axis=1, keepdims=True)) / norms


def partner_index(n_rows: int) -> np.ndarray:
    """Index of the positive partner of every row: 1, 0, 3, 2, ..."""
    return np.arange(n_rows) ^ 1


def nt_xent(z, temperature: float = 0.5) -> tuple[float, np.ndarray]:
    """
    Contrastive loss over 2N embeddings.

    Every row is an anchor whose positive is its pair partner; the other
    2N - 2 rows are negatives and the anchor itself is left out of the
    denominator. Similarities are cosines divided by ``temperature``; the
    loss is the mean of the 2N cross-entropy terms.

    Returns:
        ``(loss, grads)`` with grads shaped like ``z``.

    Raises:
        ZeroNormError: If a row has zero norm.
    """
    z = check_embeddings(z)
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    n = z.shape[0]
    u, norms = l2_normalize(z)
    logits = (u @ u.T) / temperature
    np.fill_diagonal(logits, -np.inf)
    pos = partner_index(n)
    rows = np.arange(n)

    top = logits.max(axis=1, keepdims=True)
    exp = np.exp(logits - top)
    denom = exp.sum(axis=1, keepdims=True)
    lse = top[:, 0] + np.log(denom[:, 0])
    loss = float(np.mean(lse - logits[rows, pos]))

    # d loss / d logits
    g = exp / denom
    g[rows, pos] -= 1.0
    g /= n
    du = (g + g.T) @ u / temperature
    return loss, l2_normalize_backward(u, norms, du)
