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
Self-supervised training loop.

Random streams are keyed on ``(seed, stream, epoch, batch)``, so a run
resumed from a checkpoint replays the exact trajectory of an uninterrupted
run, whatever the thread count.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from walkssl.core.abc import CheckpointError, DatasetError, NumericDivergenceError
from walkssl.core.losses import (
    ClusterState,
    LossResult,
    combined_loss,
    kmeans_init,
    l2_normalize,
    update_means,
)
from walkssl.core.nn import (
    adam_step,
    encoder_backward,
    encoder_forward,
    projection_backward,
    projection_forward,
)
from walkssl.core.walker import TrainingSet, WalkBatch, make_batch
from walkssl.libs import SysUtil

from .checkpoint import CHECKPOINT_FILE, TRACE_FILE, Checkpoint
from .config import TrainConfig
from .trace import TraceLogger

logger = logging.getLogger(__name__)

STREAM_INIT = 0
STREAM_SHUFFLE = 1
STREAM_BATCH = 2
STREAM_CLUSTER_WALKS = 3
STREAM_CLUSTER_SEED = 4


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    trace: TraceLogger
    checkpoint_path: Path | None = None


def _forward(ckpt: Checkpoint, sequences: np.ndarray):
    dtype = np.dtype(ckpt.config.dtype)
    feat, enc_cache = encoder_forward(ckpt.encoder, sequences.astype(dtype))
    z, proj_cache = projection_forward(ckpt.projection, feat)
    return z, enc_cache, proj_cache


def evaluate_loss(ckpt: Checkpoint, batch: WalkBatch, epoch: int) -> LossResult:
    """Loss of ``batch`` under the current state; nothing is updated."""
    z, _, _ = _forward(ckpt, batch.sequences)
    return combined_loss(
        z.astype(np.float64), ckpt.clusters, ckpt.config.loss, epoch, accumulate=False
    )


def train_step(ckpt: Checkpoint, batch: WalkBatch, epoch: int, batch_index: int = 0) -> LossResult:
    """
    One forward, backward and optimizer step on ``batch``.

    Raises:
        NumericDivergenceError: If the loss is not finite; parameters are left untouched.
    """
    z, enc_cache, proj_cache = _forward(ckpt, batch.sequences)
    res = combined_loss(z.astype(np.float64), ckpt.clusters, ckpt.config.loss, epoch)
    if not np.isfinite(res.total) or not np.isfinite(res.grads).all():
        raise NumericDivergenceError(
            epoch, batch_index, {"nt_xent": res.nt_xent, "kmeans": res.kmeans}
        )
    dz = res.grads.astype(z.dtype)
    proj_grads, dfeat = projection_backward(proj_cache, dz)
    enc_grads, _ = encoder_backward(enc_cache, dfeat)
    adam_step(ckpt.parameters(), {**enc_grads, **proj_grads}, ckpt.optimizer)
    return res


def epoch_batches(config: TrainConfig, source_ids: list[str], epoch: int) -> list[list[str]]:
    """Shuffled split of every model into batches of ``batch_size``; the last may be smaller."""
    order = SysUtil.rng(config.seed, STREAM_SHUFFLE, epoch).permutation(len(source_ids))
    ids = [source_ids[i] for i in order]
    return [ids[i : i + config.batch_size] for i in range(0, len(ids), config.batch_size)]


def init_clusters(ckpt: Checkpoint, dataset: TrainingSet, epoch: int) -> ClusterState:
    """
    k-means++ seeding on the normalized projected embeddings of one walk pair per model.

    Raises:
        DatasetError: If the dataset yields fewer rows than clusters.
    """
    config = ckpt.config
    rows = []
    ids = dataset.source_ids
    for b, start in enumerate(range(0, len(ids), config.batch_size)):
        chunk = ids[start : start + config.batch_size]
        batch = make_batch(
            dataset,
            len(chunk),
            config.walk_len,
            config.jump_prob,
            rng=SysUtil.rng(config.seed, STREAM_CLUSTER_WALKS, epoch, b),
            source_ids=chunk,
            threads=config.threads,
        )
        z, _, _ = _forward(ckpt, batch.sequences)
        rows.append(l2_normalize(z.astype(np.float64))[0])
    means = kmeans_init(
        np.concatenate(rows),
        config.loss.n_clusters,
        SysUtil.rng(config.seed, STREAM_CLUSTER_SEED, epoch),
    )
    logger.info(f"Initialized {config.loss.n_clusters} cluster means at epoch {epoch}")
    return ClusterState(means, epoch_of_last_update=epoch)


def _as_train_config(config: TrainConfig) -> TrainConfig:
    if type(config) is TrainConfig:
        return config
    return TrainConfig.model_validate(config.model_dump(include=set(TrainConfig.model_fields)))


def train(
    config: TrainConfig,
    dataset: TrainingSet,
    checkpoint_dir: str | Path | None = None,
    resume: bool = True,
) -> TrainResult:
    """
    Train encoder and projection head on ``dataset`` for ``config.epochs`` epochs.

    Every epoch visits each model once, in batches of ``batch_size`` models
    with two walks each. From ``cluster_start_epoch`` on, cluster means are
    seeded and then refreshed every ``means_update_period`` epochs. With a
    ``checkpoint_dir`` the checkpoint and the loss trace are written after
    every epoch, and an existing checkpoint with the same config hash is
    resumed.

    Raises:
        DatasetError: If ``dataset`` is not label-free or smaller than one batch.
        CheckpointError: If the checkpoint to resume was trained with another config.
        NumericDivergenceError: If the loss becomes non-finite.
    """
    config = _as_train_config(config)
    if not isinstance(dataset, TrainingSet):
        raise DatasetError("Training requires a label-free TrainingSet.")
    if len(dataset) < config.batch_size:
        raise DatasetError(
            f"Batch size {config.batch_size} exceeds the {len(dataset)} models in the dataset."
        )

    ckpt_path = Path(checkpoint_dir) / CHECKPOINT_FILE if checkpoint_dir else None
    trace_path = Path(checkpoint_dir) / TRACE_FILE if checkpoint_dir else None
    ckpt, trace = None, TraceLogger(trace_path)
    if resume and ckpt_path is not None and ckpt_path.exists():
        ckpt = Checkpoint.load(ckpt_path)
        if ckpt.config_hash != config.config_hash():
            raise CheckpointError(
                f"Checkpoint in {checkpoint_dir} was trained with a different config."
            )
        # epochs and threads may change between runs
        ckpt.config = config
        if trace_path.exists():
            trace = TraceLogger.from_csv(trace_path)
            trace.truncate(ckpt.epoch)
        logger.info(f"Resuming from epoch {ckpt.epoch}")
    if ckpt is None:
        ckpt = Checkpoint.initialize(config, SysUtil.rng(config.seed, STREAM_INIT))

    loss_cfg = config.loss
    ids = dataset.source_ids
    for epoch in range(ckpt.epoch, config.epochs):
        if loss_cfg.clustering_active(epoch):
            if ckpt.clusters is None:
                ckpt.clusters = init_clusters(ckpt, dataset, epoch)
            elif (epoch - loss_cfg.cluster_start_epoch) % loss_cfg.means_update_period == 0:
                update_means(ckpt.clusters, epoch)
                logger.debug(f"Cluster means updated at epoch {epoch}")

        for b, chunk in enumerate(epoch_batches(config, ids, epoch)):
            batch = make_batch(
                dataset,
                len(chunk),
                config.walk_len,
                config.jump_prob,
                rng=SysUtil.rng(config.seed, STREAM_BATCH, epoch, b),
                source_ids=chunk,
                threads=config.threads,
            )
            res = train_step(ckpt, batch, epoch, b)
            trace.append(epoch=epoch, batch=b, nt_xent=res.nt_xent, kmeans=res.kmeans, total=res.total)
            logger.debug(
                f"epoch {epoch} batch {b}: total={res.total:.6f} "
                f"nt_xent={res.nt_xent:.6f} kmeans={res.kmeans:.6f}"
            )

        ckpt.epoch = epoch + 1
        means = trace.epoch_means().loc[epoch]
        logger.info(
            f"epoch {epoch}: total={means['total']:.6f} "
            f"nt_xent={means['nt_xent']:.6f} kmeans={means['kmeans']:.6f}"
        )
        if ckpt_path is not None:
            ckpt.save(ckpt_path)
            trace.to_csv_file(trace_path)

    return TrainResult(checkpoint=ckpt, trace=trace, checkpoint_path=ckpt_path)
