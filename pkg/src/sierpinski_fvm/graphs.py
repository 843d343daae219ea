"""Cell graphs (finite volume mesh) and vertex graphs (finite difference mesh).

The level-``m`` cell graph has one node per ``m``-cell.  It is built from ``d``
copies of the level ``m-1`` graph (copy ``i`` holds the words starting with
letter ``i``) plus one edge for each pair of copies ``i < j``: the cells
``i j^(m-1)`` and ``j i^(m-1)`` meet at ``f_i(P_{j-1}) = f_j(P_{i-1})``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .simplex import vertex_count

BOUNDARY_MODES = ("dirichlet-ghost", "neumann-cells")
DEFAULT_GHOST_INCREMENT = 2


def _corner_offset(d: int, n: int, k: int) -> int:
    """0-based index of the word ``(k+1)^level`` among ``n = d**level`` words."""
    return k * (n - 1) // (d - 1)


def corner_cells(d: int, m: int) -> list[int]:
    """Index of the unique level-``m`` cell containing each boundary vertex ``P_i``."""
    if d < 2 or m < 0:
        raise ValueError(f"need d >= 2 and m >= 0, got d={d}, m={m}")
    n = d**m
    return [_corner_offset(d, n, k) for k in range(d)]


@dataclass(frozen=True)
class CellGraph:
    d: int
    m: int
    edges: np.ndarray = field(repr=False)  # (E, 2) int array, each row a < b
    corner_cells: tuple[int, ...]

    @property
    def n_cells(self) -> int:
        return self.d**self.m

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        n = self.n_cells
        a, b = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(a), dtype=np.int64)
        return sp.csr_matrix((data, (np.concatenate([a, b]), np.concatenate([b, a]))), shape=(n, n))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj = self.adjacency_matrix
        return tuple(tuple(int(j) for j in adj.indices[adj.indptr[i]:adj.indptr[i + 1]]) for i in range(self.n_cells))

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency_matrix.indptr)

    def corner_incidence(self) -> np.ndarray:
        """Number of boundary vertices ``P_i`` lying in each cell."""
        inc = np.zeros(self.n_cells, dtype=np.int64)
        np.add.at(inc, list(self.corner_cells), 1)
        return inc

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(a), int(b)) for a, b in self.edges}


def build_cell_graph(d: int, m: int) -> CellGraph:
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if m < 0:
        raise ValueError(f"level must be >= 0, got {m}")
    edges = np.zeros((0, 2), dtype=np.int64)
    # Level 0 is one cell with no edges; level 1 (K_d) falls out of the
    # general step since every level-0 copy is that single cell.
    for level in range(1, m + 1):
        n = d ** (level - 1)
        blocks = [edges + i * n for i in range(d)]
        links = [
            (i * n + _corner_offset(d, n, j), j * n + _corner_offset(d, n, i))
            for i in range(d)
            for j in range(i + 1, d)
        ]
        blocks.append(np.array(links, dtype=np.int64).reshape(-1, 2))
        edges = np.concatenate(blocks)
    return CellGraph(d, m, edges, tuple(corner_cells(d, m)))


@dataclass(frozen=True)
class CellLaplacian:
    """Combinatorial Laplacian ``D - Adj`` of a cell graph.

    In ``dirichlet-ghost`` mode the diagonal of each corner cell carries the
    extra ``ghost_increment``: the flux to a boundary vertex held at zero.
    """

    d: int
    m: int
    matrix: sp.csr_matrix = field(repr=False)
    boundary_mode: str
    ghost_increment: float = DEFAULT_GHOST_INCREMENT

    @property
    def n_cells(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def build_cell_laplacian(
    g: CellGraph,
    boundary_mode: str = "dirichlet-ghost",
    ghost_increment: float = DEFAULT_GHOST_INCREMENT,
) -> CellLaplacian:
    if boundary_mode not in BOUNDARY_MODES:
        raise ValueError(f"unknown boundary mode {boundary_mode!r}; expected one of {BOUNDARY_MODES}")
    adj = g.adjacency_matrix.astype(float)
    diag = np.asarray(adj.sum(axis=1)).ravel()
    if boundary_mode == "dirichlet-ghost":
        if ghost_increment <= 0:
            raise ValueError("ghost_increment must be positive")
        np.add.at(diag, list(g.corner_cells), float(ghost_increment))
    else:
        ghost_increment = 0
    lap = (sp.diags(diag) - adj).tocsr()
    lap.sort_indices()
    return CellLaplacian(g.d, g.m, lap, boundary_mode, ghost_increment)


def cell_laplacian(d: int, m: int, boundary_mode: str = "dirichlet-ghost",
                   ghost_increment: float = DEFAULT_GHOST_INCREMENT) -> CellLaplacian:
    return build_cell_laplacian(build_cell_graph(d, m), boundary_mode, ghost_increment)


# ---------------------------------------------------------------------------
# Vertex graph: recursive block-matrix construction.

def recursive_interior_label(d: int, k: int, m: int) -> int:
    """The recursion ``I_k(1) = k``, ``I_k(m) = I_k(m-1) + (k-1) d^(m-2)``.

    ``I_1(m) = 1`` and ``I_d(m) = d^(m-1)`` as in the closed forms for the first
    and last corners.  Labels are 1-based.
    """
    if not 1 <= k <= d:
        raise ValueError(f"corner {k} outside 1..{d}")
    if m < 1:
        raise ValueError("corner labels are defined for m >= 1")
    if k == 1:
        return 1
    if k == d:
        return d ** (m - 1)
    label = k
    for level in range(2, m + 1):
        label += (k - 1) * d ** (level - 2)
    return label


def recursive_corner_label(d: int, k: int, n: int, m: int) -> int:
    """Corner label ``C_k(n, m) = I_k(m) + (n-1) d^(m-1)`` (1-based)."""
    if not 1 <= n <= d:
        raise ValueError(f"copy {n} outside 1..{d}")
    return recursive_interior_label(d, k, m) + (n - 1) * d ** (m - 1)


def vertex_corner_label(d: int, k: int, m: int) -> int:
    """0-based row of outer corner ``P_{k-1}`` in the unmerged level-``m`` matrix.

    The unmerged matrix has ``d^(m+1)`` rows and its copies are blocks of
    ``d^m`` rows, so corner ``k`` sits at ``(k-1)(d^(m+1) - 1)/(d - 1)``.
    """
    if not 1 <= k <= d:
        raise ValueError(f"corner {k} outside 1..{d}")
    return _corner_offset(d, d ** (m + 1), k - 1)


def connection_pairs(d: int, m: int) -> list[tuple[int, int]]:
    """Fused corner pairs at level ``m``: corner ``j`` of copy ``i`` with corner ``i`` of copy ``j``.

    Returned as 0-based row pairs, in the column order of the connection
    matrix (``C2(1)~C1(2), C3(1)~C1(3), C3(2)~C2(3), ...``).
    """
    if m < 1:
        return []
    block = d**m
    pairs = []
    for j in range(2, d + 1):
        for i in range(1, j):
            pairs.append(((i - 1) * block + vertex_corner_label(d, j, m - 1),
                          (j - 1) * block + vertex_corner_label(d, i, m - 1)))
    return pairs


@dataclass(frozen=True)
class VertexGraph:
    d: int
    m: int
    laplacian: sp.csr_matrix = field(repr=False)
    corner_labels: tuple[int, ...]
    merged: bool = False
    # Unmerged row -> merged vertex.  Unmerged row ``J*d + k`` is corner
    # ``F_w(P_k)`` of the level-m cell with index ``J``.
    row_map: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return self.laplacian.shape[0]

    def toarray(self) -> np.ndarray:
        return self.laplacian.toarray()


def _base_matrix(d: int) -> sp.lil_matrix:
    a0 = sp.lil_matrix((d, d), dtype=np.int64)
    for i in range(d):
        for j in range(d):
            a0[i, j] = d - 1 if i == j else -1
    return a0


def build_vertex_laplacian(d: int, m: int, merged: bool = False) -> VertexGraph:
    """Recursive vertex-graph Laplacian.

    The default is the block construction: ``A_m`` is the block
    diagonal of ``d`` copies of ``A_{m-1}``, and every fused corner pair is
    joined by an edge (off-diagonal ``-1``, both diagonals written back as
    ``d``).  Touching corners therefore stay as two rows and the matrix has
    ``d^(m+1)`` rows.  With ``merged=True`` each fused pair is identified into
    one vertex, giving the geometric graph on ``V_m`` with
    ``(d^(m+1) + d)/2`` vertices; rows are ordered by the first unmerged row.
    """
    if d < 2 or m < 0:
        raise ValueError(f"need d >= 2 and m >= 0, got d={d}, m={m}")
    a = _base_matrix(d).tocsr()
    for level in range(1, m + 1):
        b = sp.block_diag([a] * d, format="lil")
        for r, c in connection_pairs(d, level):
            b[r, c] = b[c, r] = -1
            b[r, r] = b[c, c] = d
        a = b.tocsr()
    corners = tuple(vertex_corner_label(d, k, m) for k in range(1, d + 1))
    if not merged:
        a.sort_indices()
        return VertexGraph(d, m, a, corners, merged=False, row_map=np.arange(a.shape[0]))
    return _merge(d, m, a, corners)


def _merge(d: int, m: int, unmerged: sp.csr_matrix, corners) -> VertexGraph:
    n = unmerged.shape[0]
    rep = np.arange(n)
    fused = []
    for level in range(1, m + 1):
        # The level-``level`` block recurs at every copy offset inside A_m.
        size = d ** (level + 1)
        for off in range(0, n, size):
            for r, c in connection_pairs(d, level):
                rep[off + c] = off + r
                fused.append((off + r, off + c))
    keep = np.unique(rep)
    new_index = np.full(n, -1)
    new_index[keep] = np.arange(len(keep))
    proj = sp.csr_matrix((np.ones(n, dtype=np.int64), (np.arange(n), new_index[rep])), shape=(n, len(keep)))
    # Remove the fusion edges, leaving d^m disjoint copies of K_d, then
    # identify each fused pair; contraction of a Laplacian is P^T L P.
    r, c = np.array(fused, dtype=np.int64).reshape(-1, 2).T
    fusion_adj = sp.csr_matrix((np.ones(2 * len(r), dtype=np.int64),
                                (np.concatenate([r, c]), np.concatenate([c, r]))), shape=(n, n))
    fusion_lap = sp.diags(np.asarray(fusion_adj.sum(axis=1)).ravel()) - fusion_adj
    lap = (proj.T @ (unmerged - fusion_lap) @ proj).tocsr().astype(np.int64)
    lap.eliminate_zeros()
    lap.sort_indices()
    assert lap.shape[0] == vertex_count(d, m)
    return VertexGraph(d, m, lap, tuple(int(new_index[k]) for k in corners), merged=True,
                       row_map=new_index[rep])
