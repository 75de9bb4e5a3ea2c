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
K-means clustering term: seeding, pair assignment, the within-cluster loss
and the periodic means update.
"""

import logging

import numpy as np

from walkssl.core.abc import ClusterIndexError, DatasetError, DimensionError

from .contrastive import check_embeddings

logger = logging.getLogger(__name__)


class ClusterState:
    """
    Cluster means plus the accumulators the next means update consumes.

    Means stay constant between updates and receive no gradient.

    Attributes:
        means (np.ndarray): (K, d) current means.
        accum_sum (np.ndarray): (K, d) sum of rows assigned since the last update.
        accum_count (np.ndarray): (K,) number of rows assigned since the last update.
        accum_rows (list[np.ndarray]): Rows seen since the last update, for re-seeding.
        epoch_of_last_update (int): Epoch of the last update or initialization.
    """

    def __init__(
        self,
        means: np.ndarray,
        accum_sum: np.ndarray | None = None,
        accum_count: np.ndarray | None = None,
        accum_rows: list[np.ndarray] | None = None,
        epoch_of_last_update: int = 0,
    ):
        means = np.array(means, dtype=np.float64)
        if means.ndim != 2 or means.shape[0] < 2:
            raise DimensionError("(K, d) with K >= 2", means.shape)
        self.means = means
        self.accum_sum = (
            np.zeros_like(means) if accum_sum is None else np.array(accum_sum, dtype=np.float64)
        )
        self.accum_count = (
            np.zeros(means.shape[0], dtype=np.int64)
            if accum_count is None
            else np.array(accum_count, dtype=np.int64)
        )
        if self.accum_sum.shape != means.shape or self.accum_count.shape != (means.shape[0],):
            raise DimensionError(means.shape, (self.accum_sum.shape, self.accum_count.shape))
        self.accum_rows: list[np.ndarray] = list(accum_rows or [])
        self.epoch_of_last_update = epoch_of_last_update

    @property
    def n_clusters(self) -> int:
        return int(self.means.shape[0])

    def accumulate(self, rows: np.ndarray, assignments: np.ndarray) -> None:
        """Add both rows of every pair to the accumulator of the pair's cluster."""
        labels = np.repeat(np.asarray(assignments, dtype=np.int64), 2)
        np.add.at(self.accum_sum, labels, rows)
        self.accum_count += np.bincount(labels, minlength=self.n_clusters)
        self.accum_rows.append(np.array(rows, dtype=np.float64))

    def reset_accumulators(self) -> None:
        self.accum_sum[:] = 0
        self.accum_count[:] = 0
        self.accum_rows = []

    def summary(self) -> dict:
        return {
            "n_clusters": self.n_clusters,
            "epoch_of_last_update": self.epoch_of_last_update,
            "counts": self.accum_count.tolist(),
            "means": self.means.tolist(),
        }


def kmeans_init(features: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """
    k-means++ seeding.

    The first mean is a uniformly drawn sample; every next one is drawn with
    probability proportional to the squared distance to its nearest chosen mean.

    Raises:
        DatasetError: If there are fewer samples than ``k``.
    """
    x = np.asarray(features, dtype=np.float64)
    if k < 1 or x.shape[0] < k:
        raise DatasetError(f"k-means seeding needs at least {k} samples, got {x.shape[0]}.")
    chosen = [int(rng.integers(x.shape[0]))]
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(x.shape[0], p=d2 / total))
        else:
            idx = int(rng.integers(x.shape[0]))
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return x[chosen].copy()


def _sq_dists(x: np.ndarray, means: np.ndarray) -> np.ndarray:
    return np.sum((x[:, None, :] - means[None, :, :]) ** 2, axis=-1)


def assign_pair(x1, x2, means) -> int:
    """
    Cluster nearest to either embedding of a pair; lowest index wins ties.
    """
    means = np.asarray(means, dtype=np.float64)
    d = np.minimum(
        np.sum((means - np.asarray(x1)) ** 2, axis=1),
        np.sum((means - np.asarray(x2)) ** 2, axis=1),
    )
    return int(np.argmin(d))


def assign_pairs(z: np.ndarray, means: np.ndarray) -> np.ndarray:
    """:func:`assign_pair` for every pair of a (2N, d) batch."""
    z = check_embeddings(z)
    d = _sq_dists(z, np.asarray(means))
    return np.argmin(np.minimum(d[0::2], d[1::2]), axis=1)


def kmeans_loss(z, assignments, means) -> tuple[float, np.ndarray]:
    """
    Within-cluster squared distance of every row to its pair's mean, over 2N.

    Raises:
        DimensionError: If there is not one assignment per pair.
        ClusterIndexError: If an assignment is outside the range of means.
    """
    z = check_embeddings(z)
    means = np.asarray(means, dtype=np.float64)
    assignments = np.asarray(assignments, dtype=np.int64)
    if assignments.shape != (z.shape[0] // 2,):
        raise DimensionError(z.shape[0] // 2, assignments.shape)
    bad = (assignments < 0) | (assignments >= means.shape[0])
    if bad.any():
        raise ClusterIndexError(int(assignments[bad][0]), means.shape[0])
    diff = z - means[np.repeat(assignments, 2)]
    n = z.shape[0]
    return float(np.sum(diff * diff) / n), 2.0 * diff / n


def wcss(rows: np.ndarray, labels: np.ndarray, means: np.ndarray) -> float:
    """Within-cluster sum of squares of ``rows`` labelled into ``means``."""
    diff = np.asarray(rows) - np.asarray(means)[np.asarray(labels)]
    return float(np.sum(diff * diff))


def update_means(state: ClusterState, epoch: int | None = None) -> ClusterState:
    """
    Replace every mean by the average of the rows assigned since the last update.

    A cluster that received no row is re-seeded to the accumulated row
    farthest from its nearest mean. Accumulators are reset afterwards.
    """
    hit = state.accum_count > 0
    state.means[hit] = state.accum_sum[hit] / state.accum_count[hit, None]
    empty = np.flatnonzero(~hit)
    if empty.size:
        if state.accum_rows:
            rows = np.concatenate(state.accum_rows)
            nearest = _sq_dists(rows, state.means[hit]).min(axis=1) if hit.any() else None
            for c in empty:
                if nearest is None:
                    pick = 0
                    nearest = np.sum((rows - rows[0]) ** 2, axis=1)
                else:
                    pick = int(np.argmax(nearest))
                    nearest = np.minimum(nearest, np.sum((rows - rows[pick]) ** 2, axis=1))
                state.means[c] = rows[pick]
            logger.warning(f"Re-seeded {empty.size} empty cluster(s): {empty.tolist()}")
        else:
            logger.warning("No accumulated rows; empty clusters keep their means.")
    if epoch is not None:
        state.epoch_of_last_update = epoch
    state.reset_accumulators()
    return state
