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

"""Training and run configuration, with the key=value text format they are stored in."""

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from walkssl.core.abc import ConfigError
from walkssl.core.losses import LossConfig
from walkssl.core.nn import AdamConfig, NetworkSizes, get_preset
from walkssl.core.walker import DEFAULT_JUMP_PROB, DEFAULT_WALK_LEN
from walkssl.libs import SysUtil, flatten, unflatten

# fields that change run length or scheduling but not the trajectory
RUNTIME_KEYS = {"epochs", "threads"}


class TrainConfig(BaseModel):
    """
    Everything that determines a training run.

    Attributes:
        preset (str): Network size preset, ``full``, ``desk`` or ``tiny``.
        batch_size (int): Models per batch (N); each contributes two walks.
        walks_per_model (int): Walks per model in a training batch, always 2.
        walk_len (int): Steps per walk (L).
        jump_prob (float): Random jump probability of the walker.
        epochs (int): Number of epochs to train.
        seed (int): Master seed; every random stream is derived from it.
        threads (int): Worker threads for walk generation; 1 is fully sequential.
        dtype (str): Numeric width of parameters and activations while training.
        loss (LossConfig): Loss weights and clustering schedule.
        optimizer (AdamConfig): Optimizer hyperparameters.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    preset: Literal["full", "desk", "tiny"] = "desk"
    batch_size: int = Field(default=64, ge=2)
    walks_per_model: int = Field(default=2, ge=2, le=2)
    walk_len: int = Field(default=DEFAULT_WALK_LEN, ge=2)
    jump_prob: float = Field(default=DEFAULT_JUMP_PROB, ge=0, le=1)
    epochs: int = Field(default=300, ge=1)
    seed: int = Field(default=0, ge=0)
    threads: int = Field(default_factory=lambda: SysUtil.get_threads(1), ge=1)
    dtype: Literal["float32", "float64"] = "float32"
    loss: LossConfig = Field(default_factory=LossConfig)
    optimizer: AdamConfig = Field(default_factory=AdamConfig)

    @property
    def sizes(self) -> NetworkSizes:
        return get_preset(self.preset)

    def config_hash(self) -> str:
        """sha256 of the canonical JSON of every trajectory-relevant field."""
        return SysUtil.hash_json(self.model_dump(mode="json", exclude=RUNTIME_KEYS))

    def to_text(self) -> str:
        flat = flatten(self.model_dump(mode="json"))
        return "".join(f"{k}={v}\n" for k, v in flat.items())


class RunConfig(TrainConfig):
    """
    A full command-line run: training plus the files it reads and writes.

    ``manifest``, ``checkpoint_dir``, ``report_dir``, ``epochs``, ``seed`` and
    ``preset`` must be given explicitly.
    """

    preset: Literal["full", "desk", "tiny"]
    epochs: int = Field(ge=1)
    seed: int = Field(ge=0)
    manifest: Path
    checkpoint_dir: Path
    report_dir: Path
    embed_walks: int = Field(default=32, ge=2)
    retrieval_scope: Literal["all", "test"] = "all"
    svm_reg: float = Field(default=1e-3, gt=0)
    svm_epochs: int = Field(default=50, ge=1)

    def train_config(self) -> TrainConfig:
        return TrainConfig.model_validate(
            self.model_dump(include=set(TrainConfig.model_fields))
        )


def parse_key_values(text: str) -> dict[str, str]:
    """
    Parse ``key=value`` lines; ``#`` starts a comment, blank lines are skipped.

    Raises:
        ConfigError: On a line without ``=`` or a repeated key.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        out[key] = value.strip()
    return out


def _known_keys(model: type[BaseModel]) -> tuple[set[str], set[str]]:
    known, required = set(), set()
    for name, info in model.model_fields.items():
        sub = info.annotation
        if isinstance(sub, type) and issubclass(sub, BaseModel):
            known |= {f"{name}.{k}" for k in sub.model_fields}
        else:
            known.add(name)
        if info.is_required():
            required.add(name)
    return known, required


def build_config(flat: dict[str, str], model: type[BaseModel] = RunConfig):
    """
    Validate a flat key=value mapping into ``model``.

    Raises:
        ConfigError: Listing every unknown and every missing key at once, or
            carrying the validation message of a bad value.
    """
    known, required = _known_keys(model)
    unknown = sorted(k for k in flat if k not in known)
    missing = sorted(k for k in required if k not in flat)
    if unknown or missing:
        raise ConfigError(missing=missing, unknown=unknown)
    try:
        return model.model_validate(unflatten(flat))
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration value: {e}") from e


def load_config(path: str | Path, model: type[BaseModel] = RunConfig, **overrides):
    """Read a key=value file; ``overrides`` replace or add keys before validation."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    flat = parse_key_values(text)
    flat.update({k: str(v) for k, v in overrides.items() if v is not None})
    return build_config(flat, model)
