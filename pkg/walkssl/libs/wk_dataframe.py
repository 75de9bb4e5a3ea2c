import json
from pathlib import Path
from typing import Any, Iterable

import pandas as pd

from walkssl.libs import wk_convert as convert
from walkssl.libs.sys_util import SysUtil


def read_csv(filepath: str | Path, **kwargs) -> pd.DataFrame:
    """
    Reads a CSV file into a DataFrame with optional additional pandas read_csv parameters.

    Args:
            filepath: The path to the CSV file to read.
            **kwargs: Additional keyword arguments to pass to pandas.read_csv function.

    Returns:
            A DataFrame containing the data read from the CSV file.
    """
    df = pd.read_csv(filepath, **kwargs)
    return convert.to_df(df)


def to_csv_file(df: pd.DataFrame, filepath: str | Path, *, index: bool = False, **kwargs) -> Path:
    """Writes ``df`` to ``filepath`` as CSV, atomically."""
    return SysUtil.atomic_write(filepath, df.to_csv(index=index, **kwargs))


def read_jsonl(filepath: str | Path) -> list[dict[str, Any]]:
    """
    Reads a JSON-lines file into a list of dictionaries, skipping blank lines.

    Raises:
            ValueError: If a line is not valid JSON, naming the line number.
    """
    records = []
    with open(filepath, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise ValueError(f"{filepath}:{lineno}: invalid JSON line: {e}") from e
    return records


def write_jsonl(records: Iterable[Any], filepath: str | Path) -> Path:
    """
    Writes records (dicts or pydantic models) as JSON lines, atomically.

    Returns:
            The written path.
    """
    lines = [convert.to_str(r) for r in records]
    text = "\n".join(lines) + ("\n" if lines else "")
    return SysUtil.atomic_write(filepath, text)


def jsonl_to_df(filepath: str | Path) -> pd.DataFrame:
    """Loads a JSON-lines file as a DataFrame, one row per record."""
    return convert.to_df(read_jsonl(filepath))
