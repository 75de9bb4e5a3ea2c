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
Training state and its ``.npz`` container.

Every tensor is stored under a namespaced key (``encoder/...``,
``projection/...``, ``adam_m/...``, ``adam_v/...``, ``cluster/...``); the
``__meta__`` entry is a JSON document with the format version, the config,
its hash, the epoch counter, optimizer scalars, cluster scalars and the shape
of every tensor.
"""

import io
import json
import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict

from walkssl.core.abc import CheckpointError, WalkSSLError
from walkssl.core.losses import ClusterState
from walkssl.core.nn import EncoderParams, OptimizerState, ProjectionParams
from walkssl.libs import SysUtil

from .config import TrainConfig

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
CHECKPOINT_FILE = "checkpoint.npz"
TRACE_FILE = "trace.csv"


class Checkpoint(BaseModel):
    """
    Attributes:
        config (TrainConfig): Config the state was trained with.
        encoder (EncoderParams): Encoder parameters.
        projection (ProjectionParams): Projection head parameters.
        optimizer (OptimizerState): Moments over the merged parameter names.
        clusters (ClusterState | None): Present once clustering has started.
        epoch (int): Completed epochs.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: TrainConfig
    encoder: EncoderParams
    projection: ProjectionParams
    optimizer: OptimizerState
    clusters: ClusterState | None = None
    epoch: int = 0

    @classmethod
    def initialize(cls, config: TrainConfig, rng: np.random.Generator) -> "Checkpoint":
        dtype = np.dtype(config.dtype)
        encoder = EncoderParams.init(config.sizes, rng, dtype)
        projection = ProjectionParams.init(config.sizes, rng, dtype)
        optimizer = OptimizerState.for_params({**encoder.arrays, **projection.arrays}, config.optimizer)
        return cls(config=config, encoder=encoder, projection=projection, optimizer=optimizer)

    @property
    def config_hash(self) -> str:
        return self.config.config_hash()

    def parameters(self) -> dict[str, np.ndarray]:
        """Encoder and projection arrays under their own names; the arrays are shared."""
        return {**self.encoder.arrays, **self.projection.arrays}

    def to_arrays(self) -> tuple[dict[str, np.ndarray], dict]:
        arrays = {}
        for name, arr in self.encoder.items():
            arrays[f"encoder/{name}"] = arr
        for name, arr in self.projection.items():
            arrays[f"projection/{name}"] = arr
        for name, arr in self.optimizer.m.items():
            arrays[f"adam_m/{name}"] = arr
        for name, arr in self.optimizer.v.items():
            arrays[f"adam_v/{name}"] = arr
        cluster_meta = None
        if self.clusters is not None:
            c = self.clusters
            arrays["cluster/means"] = c.means
            arrays["cluster/accum_sum"] = c.accum_sum
            arrays["cluster/accum_count"] = c.accum_count
            arrays["cluster/accum_rows"] = (
                np.concatenate(c.accum_rows) if c.accum_rows else np.zeros((0, c.means.shape[1]))
            )
            cluster_meta = {"epoch_of_last_update": c.epoch_of_last_update}
        meta = {
            "format_version": FORMAT_VERSION,
            "config": self.config.model_dump(mode="json"),
            "config_hash": self.config_hash,
            "epoch": self.epoch,
            "optimizer": {"step": self.optimizer.step, **self.optimizer.config.model_dump()},
            "clusters": cluster_meta,
            "shapes": {k: list(v.shape) for k, v in arrays.items()},
        }
        return arrays, meta

    def save(self, path: str | Path) -> Path:
        """Write the checkpoint atomically."""
        arrays, meta = self.to_arrays()
        buf = io.BytesIO()
        np.savez(buf, __meta__=np.array(json.dumps(meta)), **arrays)
        path = SysUtil.atomic_write(path, buf.getvalue())
        logger.debug(f"checkpoint for epoch {self.epoch} written to {path}")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        """
        Raises:
            CheckpointError: If the file is unreadable, of another format
                version, internally inconsistent, or its tensors do not fit
                the recorded preset.
        """
        path = Path(path)
        try:
            with np.load(path, allow_pickle=False) as data:
                meta = json.loads(str(data["__meta__"]))
                arrays = {k: data[k] for k in data.files if k != "__meta__"}
        except (OSError, ValueError, KeyError) as e:
            raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e

        if meta.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(
                f"Checkpoint {path} has format version {meta.get('format_version')}, "
                f"expected {FORMAT_VERSION}."
            )
        for name, shape in meta["shapes"].items():
            if name not in arrays or list(arrays[name].shape) != shape:
                raise CheckpointError(f"Tensor '{name}' is missing or does not match its recorded shape.")
        try:
            config = TrainConfig.model_validate(meta["config"])
            if config.config_hash() != meta["config_hash"]:
                raise CheckpointError(f"Checkpoint {path} does not match its own config hash.")
            sizes = config.sizes
            encoder = EncoderParams(sizes, _namespace(arrays, "encoder/"))
            projection = ProjectionParams(sizes, _namespace(arrays, "projection/"))
            opt_meta = dict(meta["optimizer"])
            step = opt_meta.pop("step")
            optimizer = OptimizerState(
                config.optimizer.model_validate(opt_meta),
                step=step,
                m=_namespace(arrays, "adam_m/"),
                v=_namespace(arrays, "adam_v/"),
            )
            clusters = None
            if meta["clusters"] is not None:
                rows = arrays["cluster/accum_rows"]
                clusters = ClusterState(
                    arrays["cluster/means"],
                    arrays["cluster/accum_sum"],
                    arrays["cluster/accum_count"],
                    [rows] if rows.shape[0] else [],
                    meta["clusters"]["epoch_of_last_update"],
                )
        except CheckpointError:
            raise
        except (WalkSSLError, ValueError, KeyError) as e:
            raise CheckpointError(f"Checkpoint {path} does not fit its preset: {e}") from e

        params = {**encoder.arrays, **projection.arrays}
        for name, p in params.items():
            for moments in (optimizer.m, optimizer.v):
                if name not in moments or moments[name].shape != p.shape:
                    raise CheckpointError(f"Optimizer moments do not match parameter '{name}'.")
        return cls(
            config=config,
            encoder=encoder,
            projection=projection,
            optimizer=optimizer,
            clusters=clusters,
            epoch=int(meta["epoch"]),
        )


def _namespace(arrays: dict[str, np.ndarray], prefix: str) -> dict[str, np.ndarray]:
    # writable copies
    return {k[len(prefix):]: np.array(v) for k, v in arrays.items() if k.startswith(prefix)}
