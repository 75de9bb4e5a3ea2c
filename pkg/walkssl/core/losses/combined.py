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

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from walkssl.core.abc import ConfigError

from .clustering import ClusterState, assign_pairs, kmeans_loss
from .contrastive import check_embeddings, l2_normalize, l2_normalize_backward, nt_xent


class LossConfig(BaseModel):
    """
    Attributes:
        temperature (float): Similarity temperature of the contrastive term.
        alpha (float): Weight of the clustering term.
        n_clusters (int): Number of means.
        cluster_start_epoch (int): First epoch that uses the clustering term.
        means_update_period (int): Epochs between means updates.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    temperature: float = Field(default=0.5, gt=0)
    alpha: float = Field(default=1.0, ge=0)
    n_clusters: int = Field(default=80, ge=2)
    cluster_start_epoch: int = Field(default=50, ge=0)
    means_update_period: int = Field(default=5, ge=1)

    def clustering_active(self, epoch: int) -> bool:
        return epoch >= self.cluster_start_epoch


@dataclass
class LossResult:
    total: float
    nt_xent: float
    kmeans: float
    grads: np.ndarray
    assignments: np.ndarray | None = None


def combined_loss(
    z,
    state: ClusterState | None,
    config: LossConfig,
    epoch: int,
    *,
    assignments: np.ndarray | None = None,
    accumulate: bool = True,
) -> LossResult:
    """
    Contrastive loss, plus ``alpha`` times the clustering loss once clustering is active.

    The clustering term works on the L2-normalized rows. Pairs are assigned
    against the current means unless ``assignments`` is given, and with
    ``accumulate`` the detached normalized rows feed the next means update.

    Raises:
        ConfigError: If clustering is active but ``state`` is None.
    """
    z = check_embeddings(z)
    nt, grads = nt_xent(z, config.temperature)
    if not config.clustering_active(epoch):
        return LossResult(total=nt, nt_xent=nt, kmeans=0.0, grads=grads)
    if state is None:
        raise ConfigError(f"Clustering is active at epoch {epoch} but no cluster state exists.")

    u, norms = l2_normalize(z)
    if assignments is None:
        assignments = assign_pairs(u, state.means)
    km, du = kmeans_loss(u, assignments, state.means)
    if accumulate:
        state.accumulate(u, assignments)
    if config.alpha == 0:
        return LossResult(total=nt, nt_xent=nt, kmeans=km, grads=grads, assignments=assignments)
    grads = grads + config.alpha * l2_normalize_backward(u, norms, du)
    return LossResult(
        total=nt + config.alpha * km,
        nt_xent=nt,
        kmeans=km,
        grads=grads,
        assignments=assignments,
    )
