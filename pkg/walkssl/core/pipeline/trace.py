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

from collections import deque
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Iterable

import pandas as pd

from walkssl.libs import convert, dataframe

TRACE_COLUMNS = ["epoch", "batch", "nt_xent", "kmeans", "total"]


@dataclass
class TraceRecord:
    """Loss values of one training batch."""

    epoch: int
    batch: int
    nt_xent: float
    kmeans: float
    total: float

    def serialize(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def deserialize(cls, row: dict[str, Any]) -> "TraceRecord":
        return cls(
            epoch=int(row["epoch"]),
            batch=int(row["batch"]),
            nt_xent=float(row["nt_xent"]),
            kmeans=float(row["kmeans"]),
            total=float(row["total"]),
        )


class TraceLogger:
    """
    Collects the per-batch loss trace of a training run and persists it as CSV.

    Attributes:
        persist_path: File the trace is written to.
        log: Container of trace records.
    """

    def __init__(
        self,
        persist_path: str | Path | None = None,
        log: Iterable[TraceRecord] | None = None,
    ) -> None:
        self.persist_path = Path(persist_path) if persist_path else None
        self.log: deque[TraceRecord] = deque(log) if log else deque()

    def __len__(self) -> int:
        return len(self.log)

    def __iter__(self):
        return iter(self.log)

    def append(self, *, epoch: int, batch: int, nt_xent: float, kmeans: float, total: float) -> None:
        self.log.append(TraceRecord(epoch, batch, float(nt_xent), float(kmeans), float(total)))

    def extend(self, records: Iterable[TraceRecord]) -> None:
        self.log.extend(records)

    def truncate(self, epoch: int) -> None:
        """Drop every record from ``epoch`` on."""
        self.log = deque(r for r in self.log if r.epoch < epoch)

    def to_df(self) -> pd.DataFrame:
        if not self.log:
            return pd.DataFrame(columns=TRACE_COLUMNS)
        return convert.to_df([r.serialize() for r in self.log])[TRACE_COLUMNS]

    def epoch_means(self) -> pd.DataFrame:
        """Mean losses per epoch."""
        return self.to_df().groupby("epoch")[["nt_xent", "kmeans", "total"]].mean()

    def to_csv_file(self, filepath: str | Path | None = None) -> Path:
        """
        Write the trace as CSV (``epoch,batch,nt_xent,kmeans,total``).

        Raises:
            ValueError: If neither ``filepath`` nor ``persist_path`` is set.
        """
        filepath = Path(filepath) if filepath else self.persist_path
        if filepath is None:
            raise ValueError("No path to save the trace to.")
        # 17 digits round-trip float64
        return dataframe.to_csv_file(self.to_df(), filepath, float_format="%.17g")

    @classmethod
    def from_csv(cls, filepath: str | Path) -> "TraceLogger":
        df = dataframe.read_csv(filepath, float_precision="round_trip")
        return cls(filepath, [TraceRecord.deserialize(row) for row in df.to_dict("records")])
