"""cli: the ``walkssl`` command and the manifests it reads and writes."""

from .manifest import ManifestRecord, read_manifest, write_manifest, split_labels, load_dataset
from .commands import (
    cmd_synth,
    cmd_ingest,
    cmd_prep,
    cmd_train,
    cmd_embed,
    cmd_retrieve,
    cmd_svm,
    cmd_gradcheck,
    cmd_walks_dump,
    cmd_clusters_dump,
    cmd_report,
)
from .main import build_parser, main


__all__ = [
    "ManifestRecord",
    "read_manifest",
    "write_manifest",
    "split_labels",
    "load_dataset",
    "cmd_synth",
    "cmd_ingest",
    "cmd_prep",
    "cmd_train",
    "cmd_embed",
    "cmd_retrieve",
    "cmd_svm",
    "cmd_gradcheck",
    "cmd_walks_dump",
    "cmd_clusters_dump",
    "cmd_report",
    "build_parser",
    "main",
]
