# src/mesh/io.py
import logging
from pathlib import Path
from typing import List, Union

import numpy as np

from src.mesh.generator import Mesh
from src.utils.errors import MeshFormatError

logger = logging.getLogger(__name__)


def write_mesh(mesh: Mesh, path: Union[str, Path]) -> Path:
    """
    Write a mesh as plain text.

    Line 1 holds `N M T`, then N lines `x y`, then T lines `i j k` with
    1-based vertex indices. Coordinates use repr() so reading them back is exact.
    """
    path = Path(path)
    lines = [f"{mesh.n_total} {mesh.n_interior} {mesh.n_triangles}"]
    lines.extend(f"{float(x)!r} {float(y)!r}" for x, y in mesh.vertices)
    lines.extend(f"{i + 1} {j + 1} {k + 1}" for i, j, k in mesh.triangles)
    path.write_text("\n".join(lines) + "\n", encoding='ascii')
    logger.debug(f"Wrote mesh to {path}")
    return path


def _split(line: str, lineno: int, count: int) -> List[str]:
    fields = line.split()
    if len(fields) != count:
        raise MeshFormatError(lineno, f"expected {count} fields, found {len(fields)}")
    return fields


def read_mesh(path: Union[str, Path]) -> Mesh:
    """Read a mesh written by write_mesh"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Mesh file not found: {path}")

    lines = path.read_text(encoding='ascii').splitlines()
    if not lines or not lines[0].strip():
        raise MeshFormatError(1, "empty mesh file")

    header = _split(lines[0], 1, 3)
    try:
        n, m, t = (int(v) for v in header)
    except ValueError as e:
        raise MeshFormatError(1, f"invalid header: {lines[0]!r}") from e
    if n <= 0 or not 0 <= m < n or t <= 0:
        raise MeshFormatError(1, f"inconsistent header counts N={n} M={m} T={t}")
    if len(lines) < 1 + n + t:
        raise MeshFormatError(len(lines) + 1, f"file ends early, expected {1 + n + t} lines")

    vertices = np.empty((n, 2))
    for k in range(n):
        lineno = k + 2
        fields = _split(lines[k + 1], lineno, 2)
        try:
            vertices[k] = [float(fields[0]), float(fields[1])]
        except ValueError as e:
            raise MeshFormatError(lineno, f"invalid coordinate: {lines[k + 1]!r}") from e

    triangles = np.empty((t, 3), dtype=np.int64)
    for k in range(t):
        lineno = k + n + 2
        fields = _split(lines[k + n + 1], lineno, 3)
        try:
            idx = [int(v) for v in fields]
        except ValueError as e:
            raise MeshFormatError(lineno, f"invalid vertex index: {lines[k + n + 1]!r}") from e
        if any(v < 1 or v > n for v in idx):
            raise MeshFormatError(lineno, f"vertex index out of range 1..{n}: {idx}")
        triangles[k] = [v - 1 for v in idx]

    for k, line in enumerate(lines[1 + n + t:], start=2 + n + t):
        if line.strip():
            raise MeshFormatError(k, "unexpected trailing content")

    return Mesh(vertices=vertices, triangles=triangles, n_interior=m)
