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
The operations behind every command-line command.

Each ``cmd_*`` function takes plain values, writes its outputs and returns
what it produced; :mod:`walkssl.cli.main` only parses arguments and maps
exceptions to exit codes. Inputs are never modified in place.
"""

import logging
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from walkssl.core.abc import ConfigError, DatasetError
from walkssl.core.eval import (
    build_index,
    classification_report,
    compare_reports,
    read_report,
    retrieval_report,
    svm_grid_search,
    svm_train,
    write_report,
)
from walkssl.core.mesh import (
    ShapeClass,
    build_adjacency,
    gen_synthetic,
    load_mesh,
    normalize_mesh,
    save_mesh,
)
from walkssl.core.nn import gradcheck_suite
from walkssl.core.pipeline import (
    CHECKPOINT_FILE,
    Checkpoint,
    TrainResult,
    embed_dataset,
    embeddings_to_df,
    load_config,
    load_embeddings,
    save_embeddings,
    train,
)
from walkssl.core.resample import ResampleTargets, resample_to
from walkssl.core.walker import DEFAULT_JUMP_PROB, DEFAULT_WALK_LEN, random_walk, walk_coverage
from walkssl.libs import SysUtil, dataframe, lcall, scall

from .manifest import (
    DEFAULT_TEST_FRACTION,
    ManifestRecord,
    load_dataset,
    manifest_splits,
    read_manifest,
    split_labels,
    write_manifest,
)

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.jsonl"
MESH_DIR = "meshes"
MESH_SUFFIXES = ["off", "obj"]
SPLIT_DIRS = ("train", "test")


def cmd_synth(
    out_dir: str | Path,
    classes: Sequence[str] | None = None,
    per_class: int = 20,
    seed: int = 0,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    threads: int = 1,
) -> list[ManifestRecord]:
    """
    Generate ``per_class`` primitives of every class as OFF files plus a manifest.

    Mesh seeds are drawn from ``seed``, so the same arguments give the same files.
    """
    out_dir = Path(out_dir)
    classes = [ShapeClass(c).value for c in (classes or [c.value for c in ShapeClass])]
    seeds = SysUtil.rng(seed).integers(0, 2**31 - 1, size=len(classes) * per_class).tolist()
    tasks = [
        (cls, j, seeds[k * per_class + j]) for k, cls in enumerate(classes) for j in range(per_class)
    ]

    def _make(task):
        cls, j, mesh_seed = task
        mesh = gen_synthetic(cls, seed=mesh_seed, source_id=f"{cls}-{j:03d}")
        rel = f"{MESH_DIR}/{mesh.source_id}.off"
        save_mesh(mesh, out_dir / rel)
        return mesh, rel

    made = lcall(tasks, _make, threads=threads)
    splits = split_labels([m.label for m, _ in made], test_fraction, seed)
    records = [
        ManifestRecord(path=rel, source_id=m.source_id, label=m.label, face_count=m.n_faces, split=s)
        for (m, rel), s in zip(made, splits)
    ]
    write_manifest(records, out_dir / MANIFEST_FILE)
    logger.info(f"Wrote {len(records)} synthetic meshes to {out_dir}")
    return records


def cmd_ingest(
    root: str | Path,
    out_dir: str | Path,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    seed: int = 0,
    threads: int = 1,
) -> list[ManifestRecord]:
    """
    Manifest for a class-per-folder tree of OFF/OBJ files.

    The first directory below ``root`` names the class. A ``train`` or
    ``test`` directory further down (``<class>/train/x.off``) fixes the split
    of the files inside it; the remaining files are split per class by
    ``test_fraction``. Source ids join the class, the inner directories and
    the file stem with ``-``.

    Files that fail to parse are skipped with a warning. Paths in the
    manifest are absolute, so the tree is left where it is.

    Raises:
        DatasetError: If no readable mesh is found.
    """
    root = Path(root).resolve()
    files = [p for p in SysUtil.list_files(root, MESH_SUFFIXES) if p.parent != root]

    def _read(path):
        label, *inner, _ = path.relative_to(root).parts
        split = next((d.lower() for d in reversed(inner) if d.lower() in SPLIT_DIRS), None)
        source_id = "-".join([label, *inner, path.stem])
        mesh = load_mesh(path, source_id=source_id, label=label)
        return ManifestRecord(
            path=str(path), source_id=source_id, label=label, face_count=mesh.n_faces, split=split
        )

    ok, failed = scall(files, _read, threads=threads, label="mesh file")
    if not ok:
        raise DatasetError(f"No readable mesh under {root}.")
    unsplit = [i for i, r in enumerate(ok) if r.split is None]
    records = list(ok)
    if unsplit:
        splits = split_labels([ok[i].label for i in unsplit], test_fraction, seed)
        for i, s in zip(unsplit, splits):
            records[i] = ok[i].model_copy(update={"split": s})
    if len(unsplit) < len(ok):
        logger.info(f"{len(ok) - len(unsplit)} meshes keep the split of their directory")
    write_manifest(records, Path(out_dir) / MANIFEST_FILE)
    logger.info(f"Ingested {len(records)} meshes from {root} ({len(failed)} skipped)")
    return records


def cmd_prep(
    manifest: str | Path,
    out_dir: str | Path,
    targets: ResampleTargets | None = None,
    threads: int = 1,
) -> tuple[list[ManifestRecord], int]:
    """
    Resample every mesh of ``manifest`` to every target face count.

    Each mesh is normalized first, so every augmentation shares the unit
    frame of its source. Meshes that fail are logged and left out.

    Returns:
        The new manifest records and the number of meshes skipped.
    """
    targets = targets or ResampleTargets()
    manifest, out_dir = Path(manifest), Path(out_dir)
    records = read_manifest(manifest)

    def _resample(record: ManifestRecord):
        mesh = load_mesh(record.resolve(manifest.parent), record.source_id, record.label)
        mesh = normalize_mesh(mesh)
        out = []
        for target, aug in zip(targets.face_counts, resample_to(mesh, targets)):
            rel = f"{MESH_DIR}/{record.source_id}_{target}.off"
            save_mesh(aug, out_dir / rel)
            out.append(record.model_copy(update={"path": rel, "face_count": aug.n_faces}))
        return out

    ok, failed = scall(records, _resample, threads=threads, label="mesh")
    rows = [r for group in ok for r in group]
    write_manifest(rows, out_dir / MANIFEST_FILE)
    if failed:
        logger.warning(f"{len(failed)} of {len(records)} meshes skipped during resampling")
    logger.info(f"Wrote {len(rows)} resampled meshes to {out_dir}")
    return rows, len(failed)


def cmd_train(config_path: str | Path, **overrides) -> TrainResult:
    """
    Train on the ``train`` split of the configured manifest, or on every mesh
    when the manifest has no splits.
    """
    config = load_config(config_path, **overrides)
    records = read_manifest(config.manifest)
    split = "train" if any(r.split == "train" for r in records) else None
    dataset = load_dataset(records, Path(config.manifest).parent, split, config.threads)
    checkpoint_dir = Path(config.checkpoint_dir)
    SysUtil.atomic_write(checkpoint_dir / "config.txt", config.to_text())
    result = train(config.train_config(), dataset.training_view(), checkpoint_dir)
    Path(config.report_dir).mkdir(parents=True, exist_ok=True)
    dataframe.to_csv_file(
        result.trace.epoch_means().reset_index(), Path(config.report_dir) / "epoch_losses.csv"
    )
    return result


def cmd_embed(
    checkpoint: str | Path,
    manifest: str | Path,
    out: str | Path,
    n_walks: int = 32,
    seed: int = 0,
    threads: int = 1,
) -> Path:
    """Write one feature per model as JSON lines, plus a CSV copy next to it."""
    ckpt = Checkpoint.load(_checkpoint_file(checkpoint))
    manifest = Path(manifest)
    records = read_manifest(manifest)
    dataset = load_dataset(records, manifest.parent, threads=threads)
    features = embed_dataset(ckpt, dataset, n_walks, SysUtil.rng(seed), threads)
    splits = manifest_splits(records)
    out = save_embeddings(features, out, splits)
    dataframe.to_csv_file(embeddings_to_df(features, splits), out.with_suffix(".csv"))
    logger.info(f"Embedded {len(features)} models into {out}")
    return out


def cmd_retrieve(
    embeddings: str | Path,
    out: str | Path | None = None,
    scope: str = "all",
    threads: int = 1,
) -> dict:
    features, splits = load_embeddings(embeddings)
    index, queries = build_index(features, splits, scope)
    report = {**retrieval_report(index, queries, threads), "scope": scope}
    if out is not None:
        write_report(report, out)
    return report


def cmd_svm(
    embeddings: str | Path,
    out: str | Path | None = None,
    reg_strength: float = 1e-3,
    epochs: int = 50,
    seed: int = 0,
    grid: bool = False,
    runs: int = 1,
) -> dict:
    """
    Train on the ``train`` split, report accuracy on the ``test`` split.

    With ``grid`` the regularization strength is chosen on a hold-out fold of
    the training split first. With several ``runs`` the SVM is retrained with
    seeds ``seed``, ``seed + 1``, ... and ``accuracy`` is the mean over runs,
    reported with its standard deviation; the confusion matrix is the first
    run's.

    Raises:
        DatasetError: If either split is empty.
        ConfigError: If ``runs`` is below one.
    """
    features, splits = load_embeddings(embeddings)
    train_set = [f for f in features if splits.get(f.source_id) == "train"]
    test_set = [f for f in features if splits.get(f.source_id) == "test"]
    if not train_set or not test_set:
        raise DatasetError("SVM evaluation needs both a train and a test split.")
    if runs < 1:
        raise ConfigError(f"SVM evaluation needs at least one run, got {runs}.")
    if grid:
        reg_strength, _ = svm_grid_search(train_set, epochs=epochs, seed=seed)
    reports = [
        classification_report(
            svm_train(train_set, reg_strength=reg_strength, epochs=epochs, seed=seed + r), test_set
        )
        for r in range(runs)
    ]
    scores = np.array([r["accuracy"] for r in reports])
    report = {
        **reports[0],
        "accuracy": float(scores.mean()),
        "accuracy_std": float(scores.std()),
        "run_accuracies": scores.tolist(),
        "runs": runs,
        "reg_strength": reg_strength,
        "n_train": len(train_set),
    }
    if runs > 1:
        logger.info(f"SVM accuracy over {runs} runs: {scores.mean():.4f} +/- {scores.std():.4f}")
    if out is not None:
        write_report(report, out)
    return report


def cmd_gradcheck(preset: str = "desk", seed: int = 0) -> tuple[pd.DataFrame, bool]:
    table = gradcheck_suite(preset, seed)
    return table, bool(table["passed"].all())


def cmd_walks_dump(
    mesh_path: str | Path,
    out: str | Path | None = None,
    count: int = 1,
    walk_len: int = DEFAULT_WALK_LEN,
    jump_prob: float = DEFAULT_JUMP_PROB,
    seed: int = 0,
) -> list[dict]:
    """Random walks on one normalized mesh as records ``{source_id, seed, vertices, jumps, coverage}``."""
    mesh = normalize_mesh(load_mesh(mesh_path))
    adj = build_adjacency(mesh)
    records = []
    for s in SysUtil.rng(seed).integers(0, 2**63 - 1, size=count).tolist():
        walk = random_walk(mesh, adj, walk_len, jump_prob, seed=s)
        records.append({**walk.to_record(), "coverage": walk_coverage(walk, mesh.n_vertices)})
    if out is not None:
        dataframe.write_jsonl(records, out)
    return records


def cmd_clusters_dump(checkpoint: str | Path, out: str | Path | None = None) -> dict:
    """
    Raises:
        DatasetError: If the checkpoint was saved before clustering started.
    """
    ckpt = Checkpoint.load(_checkpoint_file(checkpoint))
    if ckpt.clusters is None:
        raise DatasetError(f"Checkpoint at epoch {ckpt.epoch} holds no cluster state yet.")
    summary = {"epoch": ckpt.epoch, **ckpt.clusters.summary()}
    if out is not None:
        write_report(summary, out)
    return summary


def cmd_report(runs: Mapping[str, Sequence[str | Path]], out: str | Path | None = None) -> pd.DataFrame:
    """Side-by-side headline metrics; each run merges the reports listed for it."""
    merged = {}
    for name, paths in runs.items():
        report = {}
        for path in paths:
            report.update(read_report(path))
        merged[name] = report
    table = compare_reports(merged)
    if out is not None:
        dataframe.to_csv_file(table.reset_index(), out)
    return table


def _checkpoint_file(path: str | Path) -> Path:
    path = Path(path)
    return path / CHECKPOINT_FILE if path.is_dir() else path


def format_table(df: pd.DataFrame) -> str:
    with pd.option_context("display.float_format", lambda v: f"{v:.3e}" if abs(v) < 1e-2 else f"{v:.4f}"):
        return df.to_string(index=df.index.name is not None)
