"""pipeline: configuration, training with checkpoints, and per-mesh feature extraction."""

from .config import (
    RUNTIME_KEYS,
    TrainConfig,
    RunConfig,
    parse_key_values,
    build_config,
    load_config,
)
from .trace import TRACE_COLUMNS, TraceRecord, TraceLogger
from .checkpoint import CHECKPOINT_FILE, TRACE_FILE, FORMAT_VERSION, Checkpoint
from .train import (
    TrainResult,
    evaluate_loss,
    train_step,
    epoch_batches,
    init_clusters,
    train,
)
from .embed import (
    DEFAULT_INFERENCE_WALKS,
    FeatureVector,
    EmbeddingRecord,
    select_central_walks,
    embed_mesh,
    embed_dataset,
    to_records,
    save_embeddings,
    load_embeddings,
    embeddings_to_df,
)


__all__ = [
    "RUNTIME_KEYS",
    "TrainConfig",
    "RunConfig",
    "parse_key_values",
    "build_config",
    "load_config",
    "TRACE_COLUMNS",
    "TraceRecord",
    "TraceLogger",
    "CHECKPOINT_FILE",
    "TRACE_FILE",
    "FORMAT_VERSION",
    "Checkpoint",
    "TrainResult",
    "evaluate_loss",
    "train_step",
    "epoch_batches",
    "init_clusters",
    "train",
    "DEFAULT_INFERENCE_WALKS",
    "FeatureVector",
    "EmbeddingRecord",
    "select_central_walks",
    "embed_mesh",
    "embed_dataset",
    "to_records",
    "save_embeddings",
    "load_embeddings",
    "embeddings_to_df",
]
