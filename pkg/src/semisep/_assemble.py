"""COO accumulation helper for the lifted sparse systems."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class BlockSystem:
    """Sparse matrix assembled from dense blocks placed at row/col offsets."""

    def __init__(self, size: int):
        self.size = size
        self._rows = []
        self._cols = []
        self._vals = []

    def add(self, r0: int, c0: int, block) -> None:
        block = np.asarray(block, dtype=float)
        if block.size == 0:
            return
        rr, cc = np.nonzero(np.ones(block.shape, dtype=bool))
        self._rows.append(rr + r0)
        self._cols.append(cc + c0)
        self._vals.append(block.ravel())

    def tocsc(self) -> sp.csc_matrix:
        if not self._vals:
            return sp.csc_matrix((self.size, self.size))
        rows = np.concatenate(self._rows)
        cols = np.concatenate(self._cols)
        vals = np.concatenate(self._vals)
        return sp.coo_matrix((vals, (rows, cols)), shape=(self.size, self.size)).tocsc()
