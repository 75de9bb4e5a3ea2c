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

"""JSON evaluation reports and their side-by-side comparison."""

import json
from pathlib import Path
from typing import Mapping

import pandas as pd

from walkssl.core.abc import DataError
from walkssl.libs import SysUtil, to_str

REPORT_METRICS = ("map", "accuracy", "accuracy_std")


def write_report(report: Mapping, path: str | Path) -> Path:
    return SysUtil.atomic_write(path, to_str(dict(report), indent=2, sort_keys=True) + "\n")


def read_report(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(f"Cannot read report {path}: {e}") from e


def compare_reports(reports: Mapping[str, Mapping]) -> pd.DataFrame:
    """
    One row per run, one column per headline metric found in any report.

    ``reports`` maps a run name to the merged retrieval and classification
    reports of that run; missing metrics are left empty.
    """
    rows = {
        name: {m: report.get(m) for m in REPORT_METRICS} for name, report in reports.items()
    }
    df = pd.DataFrame.from_dict(rows, orient="index", columns=list(REPORT_METRICS)).astype(float)
    df.index.name = "run"
    return df.dropna(axis=1, how="all")
