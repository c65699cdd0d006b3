"""Deterministic numerical-rank primitives.

Everything here is built on the SVD with an absolute singular-value
cutoff (default 1e-8).  All returned bases are orthonormal: columns for
column-space mode, rows for row-space mode.  Matrices with a zero
dimension are legal operands everywhere and produce zero-sized results
of the forced shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerance",
    "RankFactorization",
    "SubspaceBasis",
    "RankDeficientError",
    "SubspaceError",
    "as_tolerance",
    "numerical_rank",
    "rank_factorize",
    "orth_columns",
    "orth_rows",
    "column_space_intersection",
    "row_space_intersection",
    "complementary_split",
    "one_sided_inverse",
]


class RankDeficientError(ValueError):
    """Operand does not have the full rank required by the operation."""


class SubspaceError(ValueError):
    """A subspace precondition (containment, consistency) is violated."""


@dataclass(frozen=True)
class Tolerance:
    """Numerical-rank cutoff.

    Singular values strictly greater than the cutoff count toward the
    rank.  With ``relative=True`` the effective cutoff is
    ``absolute_cutoff * sigma_max`` instead of ``absolute_cutoff``.
    """

    absolute_cutoff: float = 1e-8
    relative: bool = False

    def cutoff(self, sigma_max: float = 1.0) -> float:
        if self.relative:
            return self.absolute_cutoff * sigma_max
        return self.absolute_cutoff


def as_tolerance(tol) -> Tolerance:
    """Coerce a float or ``Tolerance`` into a ``Tolerance``."""
    if isinstance(tol, Tolerance):
        return tol
    if tol is None:
        return Tolerance()
    return Tolerance(absolute_cutoff=float(tol))


@dataclass(frozen=True)
class RankFactorization:
    """Factorization ``left @ right`` with ``left`` (m, r) and ``right`` (r, n)."""

    left: np.ndarray
    right: np.ndarray
    rank: int


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis; columns span the space in ``column`` mode, rows in ``row`` mode."""

    vectors: np.ndarray
    mode: str = "column"

    @property
    def dim(self) -> int:
        return self.vectors.shape[1] if self.mode == "column" else self.vectors.shape[0]


def _as_2d(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    return a


def _svd(a):
    # LAPACK refuses empty inputs, so short-circuit the degenerate shapes.
    if min(a.shape) == 0:
        m, n = a.shape
        return np.zeros((m, 0)), np.zeros(0), np.zeros((0, n))
    return np.linalg.svd(a, full_matrices=False)


def numerical_rank(m, tol=None) -> int:
    """Number of singular values strictly greater than the cutoff."""
    a = _as_2d(m)
    tol = as_tolerance(tol)
    s = _svd(a)[1]
    if s.size == 0:
        return 0
    return int(np.sum(s > tol.cutoff(s[0])))


def rank_factorize(m, tol=None) -> RankFactorization:
    """Rank factorization ``m = left @ right`` at the numerical rank.

    ``left`` has orthonormal columns; the singular values are absorbed
    into ``right``.
    """
    a = _as_2d(m)
    tol = as_tolerance(tol)
    u, s, vt = _svd(a)
    r = int(np.sum(s > tol.cutoff(s[0]))) if s.size else 0
    return RankFactorization(left=u[:, :r].copy(), right=(s[:r, None] * vt[:r]).copy(), rank=r)


def orth_columns(m, tol=None) -> np.ndarray:
    """Orthonormal basis for the column space, shape (rows, rank)."""
    a = _as_2d(m)
    tol = as_tolerance(tol)
    u, s, _ = _svd(a)
    r = int(np.sum(s > tol.cutoff(s[0]))) if s.size else 0
    return u[:, :r].copy()

def orth_rows(m, tol=None) -> np.ndarray:
    """Orthonormal basis for the row space, shape (rank, cols)."""
    return orth_columns(_as_2d(m).T, tol).T


def column_space_intersection(a, b, tol=None) -> SubspaceBasis:
    """Orthonormal basis of ``R(a) & R(b)``.

    The intersection dimension is fixed by the rank identity
    ``dim = rank(a) + rank(b) - rank([a b])`` and the basis itself is
    read off the principal vectors of the two orthonormal bases
    (Bjorck-Golub angles between subspaces).
    """
    a = _as_2d(a)
    b = _as_2d(b)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row counts differ: {a.shape[0]} vs {b.shape[0]}")
    tol = as_tolerance(tol)
    ua = orth_columns(a, tol)
    ub = orth_columns(b, tol)
    dim = ua.shape[1] + ub.shape[1] - numerical_rank(np.hstack([ua, ub]), tol)
    if dim <= 0:
        return SubspaceBasis(np.zeros((a.shape[0], 0)), "column")
    y, _, _ = _svd(ua.T @ ub)
    basis = orth_columns(ua @ y[:, :dim], tol)
    return SubspaceBasis(basis, "column")


def row_space_intersection(a, b, tol=None) -> SubspaceBasis:
    """Orthonormal basis (rows) of ``R(a^T) & R(b^T)``."""
    a = _as_2d(a)
    b = _as_2d(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column counts differ: {a.shape[1]} vs {b.shape[1]}")
    cols = column_space_intersection(a.T, b.T, tol)
    return SubspaceBasis(cols.vectors.T, "row")


def _basis_matrix(basis: SubspaceBasis) -> np.ndarray:
    """Column-vector view of a basis regardless of its mode."""
    return basis.vectors if basis.mode == "column" else basis.vectors.T


def complementary_split(total: SubspaceBasis, sub: SubspaceBasis, tol=None) -> SubspaceBasis:
    """Orthonormal complement ``C`` with ``span(total) = span(sub) (+) span(C)``.

    Raises ``SubspaceError`` when ``span(sub)`` is not contained in
    ``span(total)`` at the tolerance.
    """
    tol = as_tolerance(tol)
    t = _basis_matrix(total)
    s = _basis_matrix(sub)
    if t.shape[0] != s.shape[0]:
        raise ValueError("bases live in different ambient spaces")
    if s.shape[1] > 0 and t.shape[1] > 0:
        residual = s - t @ (t.T @ s)
        if np.linalg.norm(residual) > 10 * tol.cutoff(1.0) * max(1.0, np.linalg.norm(s)):
            raise SubspaceError("sub-basis does not lie inside the total space")
    elif s.shape[1] > 0 and np.linalg.norm(s) > tol.cutoff(1.0):
        raise SubspaceError("sub-basis does not lie inside the total space")
    want = t.shape[1] - s.shape[1]
    if want <= 0:
        comp = np.zeros((t.shape[0], 0))
    else:
        proj = t - s @ (s.T @ t) if s.shape[1] else t
        u, sv, _ = _svd(proj)
        comp = u[:, :want].copy()
    if total.mode == "row":
        return SubspaceBasis(comp.T, "row")
    return SubspaceBasis(comp, "column")


def one_sided_inverse(m, side: str, tol=None) -> np.ndarray:
    """Left inverse (``result @ m = I``) or right inverse (``m @ result = I``).

    Requires full column rank (left) or full row rank (right) at the
    tolerance; raises ``RankDeficientError`` otherwise.
    """
    a = _as_2d(m)
    tol = as_tolerance(tol)
    r = numerical_rank(a, tol)
    if side == "left":
        if r < a.shape[1]:
            raise RankDeficientError(f"matrix has column rank {r} < {a.shape[1]}")
    elif side == "right":
        if r < a.shape[0]:
            raise RankDeficientError(f"matrix has row rank {r} < {a.shape[0]}")
    else:
        raise ValueError("side must be 'left' or 'right'")
    return np.linalg.pinv(a)
