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

"""Network sizes, size presets and the named parameter sets of encoder and projection head."""

from typing import Iterator

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from walkssl.core.abc import ConfigError, DimensionError, NumericError

from .layers import GRU_GATES


class NetworkSizes(BaseModel):
    """
    Layer widths of the walk encoder and its projection head.

    Attributes:
        fc_in (list[int]): Output widths of the per-step dense layers.
        gru (list[int]): Hidden sizes of the stacked recurrent layers.
        fc_out (int): Width of the encoder feature.
        projection (list[int]): Output widths of the projection head layers.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    in_dim: int = Field(default=3, gt=0)
    fc_in: list[int] = Field(default=[128, 256], min_length=1)
    gru: list[int] = Field(default=[256, 256, 2048], min_length=1)
    fc_out: int = Field(default=2048, gt=0)
    projection: list[int] = Field(default=[512, 256], min_length=1)

    @field_validator("fc_in", "gru", "projection")
    @classmethod
    def _positive(cls, value):
        if any(v < 1 for v in value):
            raise ValueError("layer widths must be positive")
        return value

    @property
    def feature_dim(self) -> int:
        return self.fc_out

    @property
    def embedding_dim(self) -> int:
        return self.projection[-1]


PRESETS: dict[str, NetworkSizes] = {
    "full": NetworkSizes(),
    "desk": NetworkSizes(fc_in=[32, 64], gru=[64, 64, 128], fc_out=128, projection=[64, 32]),
    "tiny": NetworkSizes(fc_in=[8, 8], gru=[8, 8, 16], fc_out=16, projection=[8, 8]),
}


def get_preset(name: str | NetworkSizes) -> NetworkSizes:
    if isinstance(name, NetworkSizes):
        return name
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"Unknown network preset '{name}'; choose from {sorted(PRESETS)}.") from None


class ParamSet:
    """
    Ordered, named parameter arrays for one network part.

    Arrays are mutable and updated in place by the optimizer. Names follow
    ``<layer>.<tensor>``, e.g. ``fc_in.0.weight`` or ``gru.2.U_z``.
    """

    def __init__(self, sizes: NetworkSizes, arrays: dict[str, np.ndarray]):
        self.sizes = sizes
        self.arrays = dict(arrays)
        self.validate()

    @staticmethod
    def expected_shapes(sizes: NetworkSizes) -> dict[str, tuple[int, ...]]:
        raise NotImplementedError

    @classmethod
    def init(cls, sizes: NetworkSizes, rng: np.random.Generator, dtype=np.float64):
        """
        Weights uniform in +-1/sqrt(fan_in), biases zero.
        """
        arrays = {}
        for name, shape in cls.expected_shapes(sizes).items():
            if len(shape) == 1:
                arrays[name] = np.zeros(shape, dtype=dtype)
            else:
                bound = 1.0 / np.sqrt(shape[1])
                arrays[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
        return cls(sizes, arrays)

    @classmethod
    def zeros(cls, sizes: NetworkSizes, dtype=np.float64):
        shapes = cls.expected_shapes(sizes)
        return cls(sizes, {k: np.zeros(s, dtype=dtype) for k, s in shapes.items()})

    def validate(self) -> None:
        """
        Raises:
            DimensionError: If a tensor is missing, extra, or has the wrong shape.
            NumericError: If a tensor holds non-finite values.
        """
        expected = self.expected_shapes(self.sizes)
        if set(expected) != set(self.arrays):
            raise DimensionError(sorted(expected), sorted(self.arrays))
        for name, shape in expected.items():
            arr = self.arrays[name]
            if arr.shape != shape:
                raise DimensionError(f"{name} {shape}", arr.shape)
            if not np.isfinite(arr).all():
                raise NumericError(layer=name)
        # keep the canonical order
        self.arrays = {k: self.arrays[k] for k in expected}

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.arrays)

    def __len__(self) -> int:
        return len(self.arrays)

    def items(self):
        return self.arrays.items()

    @property
    def dtype(self):
        return next(iter(self.arrays.values())).dtype

    @property
    def n_params(self) -> int:
        return int(sum(a.size for a in self.arrays.values()))

    def copy(self):
        return type(self)(self.sizes, {k: v.copy() for k, v in self.arrays.items()})

    def astype(self, dtype):
        return type(self)(self.sizes, {k: v.astype(dtype) for k, v in self.arrays.items()})


class EncoderParams(ParamSet):
    """Per-step dense layers, stacked recurrent layers and the output dense layer."""

    @staticmethod
    def expected_shapes(sizes: NetworkSizes) -> dict[str, tuple[int, ...]]:
        shapes = {}
        width = sizes.in_dim
        for i, out in enumerate(sizes.fc_in):
            shapes[f"fc_in.{i}.weight"] = (out, width)
            shapes[f"fc_in.{i}.bias"] = (out,)
            width = out
        for i, hidden in enumerate(sizes.gru):
            for g in GRU_GATES:
                shapes[f"gru.{i}.W_{g}"] = (hidden, width)
                shapes[f"gru.{i}.U_{g}"] = (hidden, hidden)
                shapes[f"gru.{i}.b_{g}"] = (hidden,)
            width = hidden
        shapes["fc_out.weight"] = (sizes.fc_out, width)
        shapes["fc_out.bias"] = (sizes.fc_out,)
        return shapes


class ProjectionParams(ParamSet):
    """Dense, ReLU, dense from the encoder feature to the loss space."""

    @staticmethod
    def expected_shapes(sizes: NetworkSizes) -> dict[str, tuple[int, ...]]:
        shapes = {}
        width = sizes.fc_out
        for i, out in enumerate(sizes.projection):
            shapes[f"proj.{i}.weight"] = (out, width)
            shapes[f"proj.{i}.bias"] = (out,)
            width = out
        return shapes
