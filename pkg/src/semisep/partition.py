"""Block partitions and partitioned graphs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BlockPartition",
    "GraphPartition",
    "line_graph",
    "cycle_graph",
    "mesh_graph",
    "hilbert_path",
]


@dataclass(frozen=True)
class BlockPartition:
    """Consecutive block sizes N_1..N_n of an N x N matrix."""

    sizes: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) < 1 or any(s <= 0 for s in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def n_blocks(self) -> int:
        return len(self.sizes)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> np.ndarray:
        """Length n+1 cumulative offsets; block i spans offsets[i]:offsets[i+1]."""
        return np.concatenate([[0], np.cumsum(self.sizes)])

    def block_slice(self, i: int) -> slice:
        off = self.offsets
        return slice(int(off[i]), int(off[i + 1]))

    def block(self, a, i: int, j: int) -> np.ndarray:
        """Block (i, j) of a conformally partitioned dense matrix."""
        return np.asarray(a)[self.block_slice(i), self.block_slice(j)]

    def scalar_indices(self, blocks) -> np.ndarray:
        """Scalar row/column indices covered by the given block indices."""
        off = self.offsets
        idx = [np.arange(off[i], off[i + 1]) for i in blocks]
        return np.concatenate(idx) if idx else np.zeros(0, dtype=int)


def _normalize_edges(n, edges):
    out = set()
    for i, j in edges:
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"self-loop at node {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) references an invalid node")
        out.add((min(i, j), max(i, j)))
    return frozenset(out)


@dataclass(frozen=True)
class GraphPartition:
    """Vertex set with block sizes, undirected edges, optional Hamiltonian order.

    Nodes are 0-based.  ``hamiltonian_order`` is a permutation of
    0..n-1 whose consecutive pairs must be edges.
    """

    sizes: tuple
    edges: frozenset
    hamiltonian_order: tuple | None = None

    def __post_init__(self):
        part = BlockPartition(self.sizes)
        object.__setattr__(self, "sizes", part.sizes)
        object.__setattr__(self, "edges", _normalize_edges(self.n_nodes, self.edges))
        if self.hamiltonian_order is not None:
            order = tuple(int(i) for i in self.hamiltonian_order)
            if sorted(order) != list(range(self.n_nodes)):
                raise ValueError("hamiltonian_order is not a permutation of the nodes")
            for a, b in zip(order, order[1:]):
                if (min(a, b), max(a, b)) not in self.edges:
                    raise ValueError(f"consecutive path nodes ({a}, {b}) are not an edge")
            object.__setattr__(self, "hamiltonian_order", order)

    @property
    def n_nodes(self) -> int:
        return len(self.sizes)

    @property
    def partition(self) -> BlockPartition:
        return BlockPartition(self.sizes)

    def neighbors(self, i: int) -> list:
        out = [b if a == i else a for a, b in self.edges if i in (a, b)]
        return sorted(out)

    def require_order(self) -> tuple:
        if self.hamiltonian_order is None:
            raise ValueError("graph has no hamiltonian_order")
        return self.hamiltonian_order

    def position(self) -> dict:
        """Node -> position along the Hamiltonian order."""
        return {node: k for k, node in enumerate(self.require_order())}

    def downstream(self, i: int) -> list:
        """Neighbors of i that come later in the path order."""
        pos = self.position()
        return [j for j in self.neighbors(i) if pos[j] > pos[i]]

    def upstream(self, i: int) -> list:
        """Neighbors of i that come earlier in the path order."""
        pos = self.position()
        return [j for j in self.neighbors(i) if pos[j] < pos[i]]


def line_graph(sizes) -> GraphPartition:
    n = len(sizes)
    edges = [(i, i + 1) for i in range(n - 1)]
    return GraphPartition(tuple(sizes), frozenset(edges), tuple(range(n)))


def cycle_graph(sizes) -> GraphPartition:
    n = len(sizes)
    if n < 3:
        raise ValueError("a cycle needs at least 3 nodes")
    edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    return GraphPartition(tuple(sizes), frozenset(edges), tuple(range(n)))


def mesh_graph(rows: int, cols: int, block_size: int = 1, order=None) -> GraphPartition:
    """rows x cols 2D mesh in natural (row-major) node order."""
    n = rows * cols
    edges = []
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            if c + 1 < cols:
                edges.append((k, k + 1))
            if r + 1 < rows:
                edges.append((k, k + cols))
    return GraphPartition((block_size,) * n, frozenset(edges), order)


def hilbert_path(m: int) -> tuple:
    """Hamiltonian path of the m x m mesh along the Hilbert curve.

    m must be a power of two.  Returns node indices in natural
    (row-major) numbering, in curve order.
    """
    if m < 1 or (m & (m - 1)) != 0:
        raise ValueError("hilbert_path requires m to be a power of two")

    def d2xy(order, d):
        x = y = 0
        t = d
        s = 1
        while s < order:
            rx = 1 & (t // 2)
            ry = 1 & (t ^ rx)
            if ry == 0:
                if rx == 1:
                    x, y = s - 1 - x, s - 1 - y
                x, y = y, x
            x += s * rx
            y += s * ry
            t //= 4
            s *= 2
        return x, y

    path = []
    for d in range(m * m):
        x, y = d2xy(m, d)
        path.append(y * m + x)
    return tuple(path)
