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

"""JSON-lines manifests listing the mesh files of a dataset."""

import logging
from pathlib import Path
from typing import Iterable, Literal, Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from walkssl.core.abc import DataError, DatasetError
from walkssl.core.mesh import load_mesh, normalize_mesh
from walkssl.core.walker import MeshDataset
from walkssl.libs import SysUtil, dataframe, lcall

logger = logging.getLogger(__name__)

DEFAULT_TEST_FRACTION = 0.2


class ManifestRecord(BaseModel):
    """
    One mesh file of a dataset.

    Attributes:
        path (str): Mesh file, relative to the manifest's directory or absolute.
        source_id (str): Model the mesh belongs to; shared by its augmentations.
        label (str | None): Class, stored as ``class`` in the file.
        face_count (int): Faces in the file.
        split (str | None): ``train`` or ``test``.
    """

    model_config = ConfigDict(populate_by_name=True, frozen=True, extra="forbid")

    path: str
    source_id: str
    label: str | None = Field(default=None, alias="class")
    face_count: int = Field(ge=1)
    split: Literal["train", "test"] | None = None

    def resolve(self, base: Path) -> Path:
        p = Path(self.path)
        return p if p.is_absolute() else base / p


def read_manifest(path: str | Path) -> list[ManifestRecord]:
    """
    Raises:
        DataError: If the file cannot be read or a record is malformed.
    """
    try:
        rows = dataframe.read_jsonl(path)
    except (OSError, ValueError) as e:
        raise DataError(f"Cannot read manifest {path}: {e}") from e
    try:
        return [ManifestRecord.model_validate(r) for r in rows]
    except ValidationError as e:
        raise DataError(f"Malformed manifest record in {path}: {e}") from e


def write_manifest(records: Iterable[ManifestRecord], path: str | Path) -> Path:
    return dataframe.write_jsonl(
        [r.model_dump(by_alias=True, mode="json") for r in records], path
    )


def manifest_to_df(records: Sequence[ManifestRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [r.model_dump(by_alias=True) for r in records],
        columns=["path", "source_id", "class", "face_count", "split"],
    )


def split_labels(
    labels: Sequence[str | None], test_fraction: float = DEFAULT_TEST_FRACTION, seed: int = 0
) -> list[str]:
    """
    Stratified train/test assignment.

    Each class sends ``round(test_fraction * n)`` of its ``n`` members to the
    test split, chosen by a permutation drawn from ``seed``. A class left
    without test members is logged.
    """
    out = ["train"] * len(labels)
    groups: dict = {}
    for i, label in enumerate(labels):
        groups.setdefault(label, []).append(i)
    for k, label in enumerate(sorted(groups, key=str)):
        idx = groups[label]
        n_test = int(round(test_fraction * len(idx)))
        if n_test == 0:
            logger.warning(f"Class {label!r} has {len(idx)} member(s) and an empty test split")
        for i in SysUtil.rng(seed, k).permutation(len(idx))[:n_test]:
            out[idx[i]] = "test"
    return out


def manifest_splits(records: Iterable[ManifestRecord]) -> dict[str, str | None]:
    return {r.source_id: r.split for r in records}


def load_dataset(
    records: Sequence[ManifestRecord],
    base: str | Path,
    split: str | None = None,
    threads: int = 1,
    normalize: bool = True,
) -> MeshDataset:
    """
    Load the meshes of ``records``, optionally only those of one split.

    Each mesh is centred and scaled to unit radius unless ``normalize`` is
    off, so walk coordinates stay in [-1, 1].

    Raises:
        DatasetError: If no record is selected.
    """
    base = Path(base)
    chosen = [r for r in records if split is None or r.split == split]
    if not chosen:
        raise DatasetError(f"The manifest holds no meshes for split {split!r}.")

    def _load(r: ManifestRecord):
        mesh = load_mesh(r.resolve(base), source_id=r.source_id, label=r.label)
        return normalize_mesh(mesh) if normalize else mesh

    meshes = lcall(chosen, _load, threads=threads)
    logger.info(f"Loaded {len(meshes)} meshes of {len({r.source_id for r in chosen})} models")
    return MeshDataset(meshes, threads=threads)
