"""losses: contrastive and clustering objectives over projected walk embeddings."""

from .contrastive import (
    EmbeddingBatch,
    check_embeddings,
    cosine_sim,
    l2_normalize,
    l2_normalize_backward,
    partner_index,
    nt_xent,
)
from .clustering import (
    ClusterState,
    kmeans_init,
    assign_pair,
    assign_pairs,
    kmeans_loss,
    wcss,
    update_means,
)
from .combined import LossConfig, LossResult, combined_loss


__all__ = [
    "EmbeddingBatch",
    "check_embeddings",
    "cosine_sim",
    "l2_normalize",
    "l2_normalize_backward",
    "partner_index",
    "nt_xent",
    "ClusterState",
    "kmeans_init",
    "assign_pair",
    "assign_pairs",
    "kmeans_loss",
    "wcss",
    "update_means",
    "LossConfig",
    "LossResult",
    "combined_loss",
]
