"""abc: exception hierarchy and shared base models for walkssl."""

from .exceptions import (
    EXIT_OK,
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_NUMERIC,
    WalkSSLError,
    ConfigError,
    DataError,
    MeshParseError,
    MeshHeaderError,
    CoordinateError,
    FaceIndexError,
    EmptyFaceListError,
    MissingVertexError,
    MeshInvariantError,
    DegenerateMeshError,
    ShapeParameterError,
    ResamplePreconditionError,
    SimplificationError,
    WalkInvariantError,
    DatasetError,
    CheckpointError,
    ItemNotFoundError,
    DimensionError,
    ClusterIndexError,
    NumericError,
    NumericDivergenceError,
    ZeroNormError,
    MissingCacheError,
)
from .component import ArrayModel


__all__ = [
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_DATA",
    "EXIT_NUMERIC",
    "WalkSSLError",
    "ConfigError",
    "DataError",
    "MeshParseError",
    "MeshHeaderError",
    "CoordinateError",
    "FaceIndexError",
    "EmptyFaceListError",
    "MissingVertexError",
    "MeshInvariantError",
    "DegenerateMeshError",
    "ShapeParameterError",
    "ResamplePreconditionError",
    "SimplificationError",
    "WalkInvariantError",
    "DatasetError",
    "CheckpointError",
    "ItemNotFoundError",
    "DimensionError",
    "ClusterIndexError",
    "NumericError",
    "NumericDivergenceError",
    "ZeroNormError",
    "MissingCacheError",
    "ArrayModel",
]
