# src/mesh/generator.py
"""
Structured triangulations of the unit square.

Vertices are numbered interior-first: indices 0..M-1 are interior vertices,
M..N-1 lie on the boundary. All index arrays are 0-based.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum, auto
from functools import cached_property
from typing import List

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)


class MeshKind(Enum):
    """
    Triangulation families on a uniform grid.

    SHIFTED alternates the cell diagonal between horizontal cell bands and moves
    the interior nodes of every second horizontal line to the right.
    """
    LEFT_DIAG = auto()
    RIGHT_DIAG = auto()
    SHIFTED = auto()


@dataclass(frozen=True)
class MeshFamily:
    """Mesh family with its shift parameters"""
    kind: MeshKind
    shift_fraction: float = 0.0
    shift_odd_lines: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not 0.0 <= self.shift_fraction < 1.0:
            raise ValueError(f"shift_fraction must lie in [0, 1), got {self.shift_fraction}")
        if self.kind is not MeshKind.SHIFTED and self.shift_fraction != 0.0:
            raise ValueError(f"shift_fraction must be 0 for {self.kind.name}")

    @classmethod
    def from_name(cls, name: str, shift: float = 0.5, shift_odd_lines: bool = False) -> 'MeshFamily':
        """Build a family from its CLI name (left, right, shifted)"""
        kinds = {'left': MeshKind.LEFT_DIAG, 'right': MeshKind.RIGHT_DIAG, 'shifted': MeshKind.SHIFTED}
        if name not in kinds:
            raise ValueError(f"Unknown mesh family: {name}")
        kind = kinds[name]
        if kind is not MeshKind.SHIFTED:
            return cls(kind)
        return cls(kind, shift, shift_odd_lines)

    @property
    def label(self) -> str:
        if self.kind is MeshKind.SHIFTED:
            suffix = ', odd lines' if self.shift_odd_lines else ''
            return f"shifted({self.shift_fraction:g}{suffix})"
        return self.kind.name.lower()


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Simplicial triangulation with interior-first vertex numbering.

    Attributes:
        vertices: (N, 2) array of coordinates
        triangles: (T, 3) array of vertex indices, counterclockwise
        n_interior: number M of interior vertices
    """
    vertices: np.ndarray
    triangles: np.ndarray
    n_interior: int
    family: MeshFamily = field(default=None, compare=False)

    @property
    def n_total(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @cached_property
    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique edges as (E, 2) array with first index < second"""
        t = self.triangles
        pairs = np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        pairs.sort(axis=1)
        return np.unique(pairs, axis=0)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Vertex-vertex edge adjacency for all N vertices, sorted column indices"""
        e = self.edges
        n = self.n_total
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        adj = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n)).tocsr()
        adj.sum_duplicates()
        return adj

    def neighbors(self, i: int) -> np.ndarray:
        """Indices sharing an edge with vertex i"""
        adj = self.adjacency
        return adj.indices[adj.indptr[i]:adj.indptr[i + 1]]

    def is_interior(self, i: int) -> bool:
        return i < self.n_interior


def neighborhoods(mesh: Mesh) -> List[np.ndarray]:
    """Sets S_i of edge neighbours for every interior vertex i < M"""
    return [mesh.neighbors(i) for i in range(mesh.n_interior)]


def generate_mesh(family: MeshFamily, ne: int) -> Mesh:
    """
    Triangulate the unit square on an (ne+1) x (ne+1) grid.

    Args:
        family: triangulation type and shift
        ne: number of edges along one horizontal mesh line

    Returns:
        Mesh with interior vertices numbered first
    """
    if ne < 2:
        raise ValueError(f"ne must be at least 2, got {ne}")

    h = 1.0 / ne
    iy, ix = np.meshgrid(np.arange(ne + 1), np.arange(ne + 1), indexing='ij')
    ix = ix.ravel()
    iy = iy.ravel()
    x = ix / ne
    y = iy / ne
    # boundary coordinates exact
    x[ix == ne] = 1.0
    y[iy == ne] = 1.0

    interior = (ix > 0) & (ix < ne) & (iy > 0) & (iy < ne)
    if family.kind is MeshKind.SHIFTED:
        # horizontal lines counted from 1 at y = 0: even lines are those with odd iy
        parity = 0 if family.shift_odd_lines else 1
        shifted = interior & (iy % 2 == parity)
        x[shifted] += family.shift_fraction * h

    # grid index -> interior-first vertex number
    order = np.concatenate([np.flatnonzero(interior), np.flatnonzero(~interior)])
    number = np.empty(order.size, dtype=np.int64)
    number[order] = np.arange(order.size)

    cx, cy = np.meshgrid(np.arange(ne), np.arange(ne), indexing='xy')
    cx = cx.ravel()
    cy = cy.ravel()
    v00 = cy * (ne + 1) + cx
    v10 = v00 + 1
    v01 = v00 + (ne + 1)
    v11 = v01 + 1
    if family.kind is MeshKind.LEFT_DIAG:
        rising = np.ones(cy.size, dtype=bool)
    elif family.kind is MeshKind.RIGHT_DIAG:
        rising = np.zeros(cy.size, dtype=bool)
    else:
        # diagonal v00-v11 in even cell bands, v10-v01 in odd ones
        rising = cy % 2 == 0
    first = np.where(rising[:, None], np.stack([v00, v10, v11], axis=1), np.stack([v00, v10, v01], axis=1))
    second = np.where(rising[:, None], np.stack([v00, v11, v01], axis=1), np.stack([v10, v11, v01], axis=1))
    tri = np.concatenate([first, second])
    # keep the two triangles of a cell adjacent in the numbering
    n_cells = ne * ne
    interleave = np.empty(2 * n_cells, dtype=np.int64)
    interleave[0::2] = np.arange(n_cells)
    interleave[1::2] = np.arange(n_cells) + n_cells
    tri = number[tri[interleave]]

    vertices = np.stack([x[order], y[order]], axis=1)
    mesh = Mesh(vertices=vertices, triangles=tri, n_interior=int(interior.sum()), family=family)
    logger.debug(f"Generated {family.label} mesh: N={mesh.n_total}, M={mesh.n_interior}, T={mesh.n_triangles}")
    return mesh


def non_delaunay_edges(mesh: Mesh, tol: float = 1e-12) -> np.ndarray:
    """
    Interior edges whose two opposite angles sum to more than pi.

    Returns:
        (K, 2) array of offending edges
    """
    t = mesh.triangles
    p = mesh.vertices
    keys = []
    angles = []
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        u = p[t[:, a]] - p[t[:, c]]
        v = p[t[:, b]] - p[t[:, c]]
        cos = np.einsum('ij,ij->i', u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles.append(np.arccos(np.clip(cos, -1.0, 1.0)))
        keys.append(np.sort(t[:, [a, b]], axis=1))
    keys = np.vstack(keys)
    angles = np.concatenate(angles)
    uniq, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    total = np.bincount(inverse, weights=angles, minlength=uniq.shape[0])
    bad = (counts == 2) & (total > np.pi + tol)
    return uniq[bad]
