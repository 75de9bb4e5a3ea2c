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

"""ArrayModel, the base building block for array-carrying types in walkssl."""

from abc import ABC
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict


class ArrayModel(BaseModel, ABC):
    """
    Base class for domain types that hold numpy arrays.

    Subclasses declare array fields as ``np.ndarray`` and coerce them with
    :meth:`as_array` inside a ``field_validator``. Arrays are stored as
    read-only copies so instances behave as immutable values.
    """

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        populate_by_name=True,
        frozen=True,
    )

    @staticmethod
    def as_array(value: Any, dtype, ndim: int | None = None, width: int | None = None):
        """
        Coerce ``value`` to a read-only array of ``dtype``.

        Args:
            value: Any array-like input.
            dtype: Target numpy dtype.
            ndim: Required number of dimensions, if any.
            width: Required size of the last axis, if any.

        Raises:
            ValueError: If the shape requirements are not met.
        """
        arr = np.array(value, dtype=dtype, copy=True)
        if ndim == 2 and arr.size == 0:
            arr = arr.reshape(0, width or 0)
        if ndim is not None and arr.ndim != ndim:
            raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
        if width is not None and arr.shape[-1] != width:
            raise ValueError(f"expected last axis of size {width}, got {arr.shape}")
        arr.setflags(write=False)
        return arr

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-friendly dict, arrays converted to nested lists."""
        out = {}
        for key, value in self.__dict__.items():
            if isinstance(value, np.ndarray):
                out[key] = value.tolist()
            elif isinstance(value, ArrayModel):
                out[key] = value.to_dict()
            else:
                out[key] = value
        return out

    # an ArrayModel is always truthy, whatever its fields hold
    def __bool__(self):
        return True
