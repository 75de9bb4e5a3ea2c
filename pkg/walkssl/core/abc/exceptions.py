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

# exit codes used by the command line
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class WalkSSLError(Exception):
    """Base class for all exceptions in the walkssl system."""

    exit_code: int = EXIT_DATA

    def __init__(self, message=None):
        if message is None:
            message = "An unspecified error occurred in the walkssl system."
        super().__init__(message)


class ConfigError(WalkSSLError):
    """Exception raised for invalid, unknown or missing configuration keys."""

    exit_code = EXIT_CONFIG

    def __init__(self, message=None, missing=None, unknown=None):
        self.missing = list(missing or [])
        self.unknown = list(unknown or [])
        if message is None:
            parts = []
            if self.missing:
                parts.append(f"missing keys: {', '.join(self.missing)}")
            if self.unknown:
                parts.append(f"unknown keys: {', '.join(self.unknown)}")
            message = "Invalid configuration" + (f" ({'; '.join(parts)})" if parts else ".")
        super().__init__(message)


class DataError(WalkSSLError):
    """Exception raised for errors in input data (meshes, manifests, datasets)."""

    def __init__(self, message=None):
        if message is None:
            message = "An error occurred in the input data."
        super().__init__(message)


class MeshParseError(DataError):
    """Base class for mesh file parse errors, always carrying a line number."""

    def __init__(self, line: int, message=None):
        self.line = line
        if message is None:
            message = "Malformed mesh file."
        super().__init__(f"line {line}: {message}")


class MeshHeaderError(MeshParseError):
    """Exception raised when the header of a mesh file is malformed."""


class CoordinateError(MeshParseError):
    """Exception raised for a non-numeric vertex coordinate."""


class FaceIndexError(MeshParseError):
    """Exception raised for a face index that is out of range or not an integer."""


class EmptyFaceListError(MeshParseError):
    """Exception raised when a mesh file holds no usable face."""


class MissingVertexError(MeshParseError):
    """Exception raised when a file declares more vertices than it provides."""


class MeshInvariantError(DataError):
    """Exception raised when a mesh violates its structural invariants."""

    def __init__(self, message=None):
        if message is None:
            message = "The mesh violates its invariants."
        super().__init__(message)


class DegenerateMeshError(MeshInvariantError):
    """Exception raised for a mesh whose vertices all coincide."""

    def __init__(self, message=None):
        super().__init__(message or "All vertices of the mesh coincide.")


class ShapeParameterError(DataError):
    """Exception raised for a synthetic shape parameter outside its range."""

    def __init__(self, field, message=None):
        if message is None:
            message = "Parameter out of range"
        super().__init__(f"{message}: {field}.")


class ResamplePreconditionError(DataError):
    """Exception raised when a resampling operation is called outside its domain."""


class SimplificationError(DataError):
    """Exception raised when a face budget cannot be met without degenerate geometry."""

    def __init__(self, target: int, best_count: int):
        self.target = target
        self.best_count = best_count
        super().__init__(
            f"Cannot simplify to {target} faces without degenerate geometry; "
            f"best achievable count is {best_count}."
        )


class WalkInvariantError(DataError):
    """Exception raised when a walk does not fit the mesh it is applied to."""


class DatasetError(DataError):
    """Exception raised when a dataset cannot serve the requested operation."""


class CheckpointError(DataError):
    """Exception raised for unreadable, mismatching or incompatible checkpoints."""


class ItemNotFoundError(DataError):
    """Exception raised when a specified item is not found."""

    def __init__(self, item):
        super().__init__(f"Item not found. Item: '{item}'.")


class DimensionError(DataError):
    """Exception raised for a vector or matrix of the wrong shape."""

    def __init__(self, expected, got):
        super().__init__(f"Dimension mismatch: expected {expected}, got {got}.")


class ClusterIndexError(DataError):
    """Exception raised for a cluster assignment outside the range of means."""

    def __init__(self, index, n_clusters):
        super().__init__(
            f"Cluster index {index} out of range for {n_clusters} means."
        )


class NumericError(WalkSSLError):
    """Exception raised when a computation produces non-finite values."""

    exit_code = EXIT_NUMERIC

    def __init__(self, layer=None, message=None):
        self.layer = layer
        if message is None:
            message = "Non-finite value encountered"
        if layer is not None:
            message = f"{message} in layer '{layer}'"
        super().__init__(message + ".")


class NumericDivergenceError(NumericError):
    """Exception raised when the training loss becomes non-finite."""

    def __init__(self, epoch: int, batch: int, parts: dict | None = None):
        self.epoch = epoch
        self.batch = batch
        detail = f" (epoch {epoch}, batch {batch}"
        if parts:
            detail += ", " + ", ".join(f"{k}={v}" for k, v in parts.items())
        detail += ")"
        super().__init__(layer="loss", message="Training loss diverged" + detail)


class ZeroNormError(NumericError):
    """Exception raised when a vector with zero norm must be normalized."""

    def __init__(self, where=None):
        super().__init__(layer=where, message="Zero-norm vector")


class MissingCacheError(NumericError):
    """Exception raised when backward is called without a forward cache."""

    def __init__(self, layer=None):
        super().__init__(layer=layer, message="Backward called without a forward cache")
