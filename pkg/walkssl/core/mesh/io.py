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

"""OFF and OBJ text formats."""

import logging
from enum import Enum
from pathlib import Path

import numpy as np

from walkssl.core.abc import (
    CoordinateError,
    DataError,
    EmptyFaceListError,
    FaceIndexError,
    MeshHeaderError,
    MissingVertexError,
)
from walkssl.libs import SysUtil

from .mesh import Mesh, validate_mesh

logger = logging.getLogger(__name__)


class MeshFormat(str, Enum):
    OFF = "OFF"
    OBJ = "OBJ"

    @classmethod
    def from_path(cls, path: str | Path) -> "MeshFormat":
        suffix = Path(path).suffix.lstrip(".").upper()
        try:
            return cls(suffix)
        except ValueError as e:
            raise DataError(f"Unsupported mesh file extension: '{Path(path).suffix}'.") from e


def _lines(data: bytes | str):
    """Yield (line_number, tokens) for non-blank lines, comments stripped."""
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    for lineno, raw in enumerate(data.splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield lineno, text.split()


def _floats(tokens, lineno):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        bad = next(t for t in tokens if not _is_float(t))
        raise CoordinateError(lineno, f"non-numeric coordinate '{bad}'") from None


def _is_float(token):
    try:
        float(token)
    except ValueError:
        return False
    return True


def _fan(polygon, lineno, triangles, dropped):
    """Fan-triangulate ``polygon`` from its first vertex, skipping degenerate pieces."""
    first = polygon[0]
    for a, b in zip(polygon[1:-1], polygon[2:]):
        if first == a or a == b or first == b:
            dropped.append(lineno)
            continue
        triangles.append((first, a, b))


def _parse_off(data):
    lines = iter(_lines(data))
    try:
        lineno, tokens = next(lines)
    except StopIteration:
        raise MeshHeaderError(1, "empty file, expected 'OFF' header") from None

    keyword = tokens[0].upper()
    colored = keyword.startswith("COFF")
    base = "COFF" if colored else "OFF"
    if not keyword.startswith(base):
        raise MeshHeaderError(lineno, f"expected 'OFF' header, found '{tokens[0]}'")
    # some archives glue the counts onto the keyword ("OFF490 518 0")
    rest = tokens[0][len(base) :]
    counts = ([rest] if rest else []) + tokens[1:]
    if not counts:
        try:
            lineno, counts = next(lines)
        except StopIteration:
            raise MeshHeaderError(lineno + 1, "missing vertex/face counts") from None
    malformed = MeshHeaderError(lineno, f"malformed counts line '{' '.join(counts)}'")
    if len(counts) != 3:
        raise malformed
    try:
        n_vertices, n_faces, _ = (int(c) for c in counts)
    except ValueError:
        raise malformed from None
    if n_vertices < 0 or n_faces < 0:
        raise MeshHeaderError(lineno, "vertex and face counts must be non-negative")

    vertices = []
    last = lineno
    for k in range(n_vertices):
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise MissingVertexError(
                last + 1, f"expected vertex {k + 1} of {n_vertices}, reached end of file"
            ) from None
        last = lineno
        if len(tokens) < 3 or (not colored and len(tokens) != 3):
            raise MissingVertexError(
                lineno,
                f"expected vertex {k + 1} of {n_vertices} as 3 coordinates, "
                f"found {len(tokens)} values",
            )
        vertices.append(_floats(tokens[:3], lineno))

    if n_faces == 0:
        raise EmptyFaceListError(last, "the file declares no faces")

    triangles, dropped = [], []
    for k in range(n_faces):
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise FaceIndexError(
                last + 1, f"expected face {k + 1} of {n_faces}, reached end of file"
            ) from None
        last = lineno
        try:
            size = int(tokens[0])
            polygon = [int(t) for t in tokens[1 : 1 + size]]
        except ValueError:
            raise FaceIndexError(lineno, "face indices must be integers") from None
        if size < 3 or len(polygon) != size:
            raise FaceIndexError(lineno, f"face needs at least 3 indices, got {len(polygon)}")
        for i in polygon:
            if not 0 <= i < n_vertices:
                raise FaceIndexError(lineno, f"face index {i} out of range [0, {n_vertices})")
        _fan(polygon, lineno, triangles, dropped)
    return vertices, triangles, dropped, last


def _obj_index(token, n_seen, lineno):
    head = token.split("/", 1)[0]
    try:
        i = int(head)
    except ValueError:
        raise FaceIndexError(lineno, f"face index '{token}' is not an integer") from None
    if i == 0:
        raise FaceIndexError(lineno, "OBJ face indices start at 1")
    # negative indices count back from the latest vertex
    return n_seen + i if i < 0 else i - 1


def _parse_obj(data):
    vertices, polygons = [], []
    last = 0
    for lineno, tokens in _lines(data):
        last = lineno
        keyword = tokens[0]
        if keyword == "v":
            if len(tokens) < 4:
                raise MissingVertexError(lineno, f"vertex needs 3 coordinates, got {len(tokens) - 1}")
            vertices.append(_floats(tokens[1:4], lineno))
        elif keyword == "f":
            if len(tokens) < 4:
                raise FaceIndexError(lineno, f"face needs at least 3 indices, got {len(tokens) - 1}")
            polygons.append(
                (lineno, [_obj_index(t, len(vertices), lineno) for t in tokens[1:]])
            )
        # normals, texture coordinates, groups and materials carry nothing we use

    if not polygons:
        raise EmptyFaceListError(last + 1, "the file holds no 'f' statements")
    n_vertices = len(vertices)
    triangles, dropped = [], []
    for lineno, polygon in polygons:
        for i in polygon:
            if not 0 <= i < n_vertices:
                raise FaceIndexError(lineno, f"face index {i + 1} out of range [1, {n_vertices}]")
        _fan(polygon, lineno, triangles, dropped)
    return vertices, triangles, dropped, last


def parse_mesh(
    data: bytes | str,
    fmt: MeshFormat | str,
    source_id: str = "",
    label: str | None = None,
) -> Mesh:
    """
    Parse OFF or OBJ text into a :class:`Mesh`.

    Polygons are fan-triangulated from their first vertex and vertex order is
    kept from the file. Triangles of a polygon that repeat a vertex index are
    dropped with a warning.

    Raises:
        MeshHeaderError: Missing or malformed OFF header or counts.
        CoordinateError: Non-numeric vertex coordinate.
        FaceIndexError: Non-integer or out-of-range face index.
        EmptyFaceListError: No usable face.
        MissingVertexError: Fewer vertex lines than declared.
    """
    fmt = MeshFormat(fmt.upper() if isinstance(fmt, str) else fmt)
    parser = _parse_off if fmt is MeshFormat.OFF else _parse_obj
    vertices, triangles, dropped, last = parser(data)
    if dropped:
        logger.warning(
            f"Dropped {len(dropped)} degenerate triangle(s) while parsing "
            f"{source_id or 'mesh'} (first at line {dropped[0]})"
        )
    if not triangles:
        raise EmptyFaceListError(last, "every face of the file is degenerate")
    return Mesh(
        vertices=np.asarray(vertices, dtype=np.float64).reshape(-1, 3),
        faces=np.asarray(triangles, dtype=np.int64),
        source_id=source_id,
        label=label,
    )


def _fmt_row(values) -> str:
    return " ".join(f"{x:.17g}" for x in values)


def write_mesh(mesh: Mesh, fmt: MeshFormat | str) -> bytes:
    """
    Serialize ``mesh`` as OFF or OBJ text (OBJ indices are 1-based).

    Coordinates are written with 17 significant digits, so a re-parse gives
    back the same floats.

    Raises:
        MeshInvariantError: If ``mesh`` violates its invariants.
    """
    validate_mesh(mesh)
    fmt = MeshFormat(fmt.upper() if isinstance(fmt, str) else fmt)
    out = []
    if fmt is MeshFormat.OFF:
        out.append("OFF")
        out.append(f"{mesh.n_vertices} {mesh.n_faces} 0")
        out.extend(_fmt_row(v) for v in mesh.vertices)
        out.extend(f"3 {a} {b} {c}" for a, b, c in mesh.faces)
    else:
        out.extend("v " + _fmt_row(v) for v in mesh.vertices)
        out.extend(f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces)
    return ("\n".join(out) + "\n").encode("utf-8")


def load_mesh(path: str | Path, source_id: str | None = None, label: str | None = None) -> Mesh:
    """Read a mesh file, choosing the format from its suffix. ``source_id`` defaults to the file stem."""
    path = Path(path)
    fmt = MeshFormat.from_path(path)
    return parse_mesh(
        path.read_bytes(),
        fmt,
        source_id=path.stem if source_id is None else source_id,
        label=label,
    )


def save_mesh(mesh: Mesh, path: str | Path) -> Path:
    """Write ``mesh`` atomically, choosing the format from the suffix of ``path``."""
    return SysUtil.atomic_write(path, write_mesh(mesh, MeshFormat.from_path(path)))
