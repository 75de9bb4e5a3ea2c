"""walker: random surface walks, their coordinate sequences and paired walk batches."""

from .walk import (
    DEFAULT_WALK_LEN,
    DEFAULT_JUMP_PROB,
    Walk,
    StepSequence,
    WalkBatch,
    random_walk,
    walk_to_sequence,
    walk_coverage,
)
from .dataset import MeshDataset, TrainingSet, make_batch


__all__ = [
    "DEFAULT_WALK_LEN",
    "DEFAULT_JUMP_PROB",
    "Walk",
    "StepSequence",
    "WalkBatch",
    "random_walk",
    "walk_to_sequence",
    "walk_coverage",
    "MeshDataset",
    "TrainingSet",
    "make_batch",
]
