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

import json
import logging
import os
import tempfile
from hashlib import sha256
from pathlib import Path
from typing import Any

import numpy as np


class SysUtil:

    @staticmethod
    def hash_json(obj: Any) -> str:
        """Returns the sha256 hex digest of the canonical JSON form of ``obj``."""
        text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
        return sha256(text.encode("utf-8")).hexdigest()

    @staticmethod
    def seed_sequence(*keys: int) -> np.random.SeedSequence:
        """Builds a numpy seed sequence from integer keys (seed, epoch, index, ...)."""
        return np.random.SeedSequence([int(k) for k in keys])

    @staticmethod
    def rng(*keys: int) -> np.random.Generator:
        """Returns an independent generator for the stream identified by ``keys``."""
        return np.random.default_rng(SysUtil.seed_sequence(*keys))

    @staticmethod
    def get_threads(default: int = 1) -> int:
        """Returns the worker thread count from ``WALKSSL_THREADS`` or ``default``."""
        value = os.getenv("WALKSSL_THREADS")
        try:
            return max(1, int(value)) if value else default
        except ValueError:
            logging.warning(f"Ignoring non-integer WALKSSL_THREADS={value!r}")
            return default

    @staticmethod
    def list_files(dir_path: Path | str, extension: str | list[str] | None = None) -> list[Path]:
        """
        Lists all files in a directory tree, optionally filtered by extension, sorted by path.

        Args:
                dir_path (Union[Path, str]): The directory to list files from.
                extension (str | list[str]): Extensions to keep (without the dot, case-insensitive).

        Returns:
                list[Path]: A sorted list of file paths.

        Raises:
                NotADirectoryError: If the provided dir_path is not a directory.
        """
        dir_path = Path(dir_path)
        if not dir_path.is_dir():
            raise NotADirectoryError(f"{dir_path} is not a directory.")
        if isinstance(extension, str):
            extension = [extension]
        allowed = {e.lower().lstrip(".") for e in extension} if extension else None
        files = [
            p
            for p in dir_path.rglob("*")
            if p.is_file() and (allowed is None or p.suffix.lower().lstrip(".") in allowed)
        ]
        return sorted(files)

    @staticmethod
    def atomic_write(path: Path | str, data: bytes | str, encoding: str = "utf-8") -> Path:
        """
        Writes ``data`` to ``path`` through a temporary file in the same directory
        followed by ``os.replace``, so readers never see a partial file.

        Args:
                path: Destination file.
                data: Content; ``str`` is encoded with ``encoding``.

        Returns:
                Path: The destination path.
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, str):
            data = data.encode(encoding)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return path
