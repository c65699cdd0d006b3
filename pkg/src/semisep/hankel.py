"""Overlapping Hankel-block low-rank completion.

Given the strictly-lower block triangle of a partitioned matrix with the
corner block (n, 1) unknown, find one corner X that simultaneously
minimizes the rank of every lower Hankel block H_k(X), k = 1..n-1.

The solver sweeps the Hankel blocks in sequence.  Each block's full
solution set is an affine family (see ``lrcp``); the sweep maintains the
set of corners minimizing all blocks processed so far, alternating a
row-removal and a column-addition step between consecutive blocks.  The
two steps require trivial-intersection hypotheses on the fixed blocks,
which ``normalize`` establishes by recombining rows and columns (the
unknown corner itself is never touched).  A restricted solution set is
carried between steps: the current block's affine parametrization with
the second free parameter pinned, plus the free row directions that
remain admissible for every earlier block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    as_tolerance,
    column_space_intersection,
    numerical_rank,
    orth_columns,
    orth_rows,
    row_space_intersection,
)
from .lrcp import Lrcp2x2Problem, Lrcp2x2Solution, min_rank_bound, solve_set
from .partition import BlockPartition

__all__ = [
    "HankelCompletionProblem",
    "RestrictedSolutionSet",
    "HypothesisViolationError",
    "DegenerateProblemError",
    "RowRemoval",
    "ColumnAddition",
    "problem_from_dense",
    "hankel_block",
    "per_block_minimum",
    "normalize",
    "restrict_after_removing_rows",
    "restrict_after_adding_columns",
    "solve_all",
    "solve_single",
]


class HypothesisViolationError(RuntimeError):
    """A trivial-intersection hypothesis of the sweep lemmas fails (run normalize)."""


class DegenerateProblemError(RuntimeError):
    """An intersection became empty at the tolerance, contradicting the rank bookkeeping."""


@dataclass(frozen=True)
class HankelCompletionProblem:
    """Known strictly-lower blocks; the (n-1, 0) corner (0-based) is the unknown.

    ``blocks[(i, j)]`` holds block (i, j) for i > j, excluding the
    corner position.
    """

    partition: BlockPartition
    blocks: dict

    def __post_init__(self):
        n = self.partition.n_blocks
        if n < 2:
            raise ValueError("need at least 2 blocks")
        sizes = self.partition.sizes
        filled = {}
        for i in range(1, n):
            for j in range(i):
                if (i, j) == (n - 1, 0):
                    continue
                blk = np.asarray(self.blocks.get((i, j), np.zeros((sizes[i], sizes[j]))), dtype=float)
                if blk.shape != (sizes[i], sizes[j]):
                    raise ValueError(f"block {(i, j)} has shape {blk.shape}, expected {(sizes[i], sizes[j])}")
                filled[(i, j)] = blk
        object.__setattr__(self, "blocks", filled)

    @property
    def n_blocks(self) -> int:
        return self.partition.n_blocks

    @property
    def corner_shape(self) -> tuple:
        sizes = self.partition.sizes
        return (sizes[-1], sizes[0])

    def stack(self, rows, cols) -> np.ndarray:
        """Dense submatrix from the listed block rows and columns."""
        sizes = self.partition.sizes
        out = np.zeros((sum(sizes[i] for i in rows), sum(sizes[j] for j in cols)))
        r0 = 0
        for i in rows:
            c0 = 0
            for j in cols:
                out[r0:r0 + sizes[i], c0:c0 + sizes[j]] = self.blocks[(i, j)]
                c0 += sizes[j]
            r0 += sizes[i]
        return out


def problem_from_dense(a, partition: BlockPartition) -> HankelCompletionProblem:
    """Extract the strictly-lower blocks of a dense matrix (corner dropped)."""
    a = np.asarray(a, dtype=float)
    n = partition.n_blocks
    if a.shape != (partition.total, partition.total):
        raise ValueError(f"matrix shape {a.shape} does not match partition total {partition.total}")
    blocks = {}
    for i in range(1, n):
        for j in range(i):
            if (i, j) == (n - 1, 0):
                continue
            blocks[(i, j)] = partition.block(a, i, j).copy()
    return HankelCompletionProblem(partition, blocks)


def hankel_block(p: HankelCompletionProblem, k: int, x) -> np.ndarray:
    """H_k(x): block rows k+1..n, block columns 1..k (1-based k), x in the corner."""
    n = p.n_blocks
    if not 1 <= k <= n - 1:
        raise IndexError(f"k must be in 1..{n - 1}, got {k}")
    x = np.asarray(x, dtype=float)
    if x.shape != p.corner_shape:
        raise ValueError(f"x has shape {x.shape}, expected {p.corner_shape}")
    sizes = p.partition.sizes
    rows = list(range(k, n))
    cols = list(range(k))
    out = np.zeros((sum(sizes[i] for i in rows), sum(sizes[j] for j in cols)))
    r0 = 0
    for i in rows:
        c0 = 0
        for j in cols:
            blk = x if (i, j) == (n - 1, 0) else p.blocks[(i, j)]
            out[r0:r0 + sizes[i], c0:c0 + sizes[j]] = blk
            c0 += sizes[j]
        r0 += sizes[i]
    return out


def _stage_problem(p: HankelCompletionProblem, k: int) -> Lrcp2x2Problem:
    """The 2x2 split of H_k: A over X (block column 1), [B; C] the rest."""
    n = p.n_blocks
    sizes = p.partition.sizes
    mid = list(range(k, n - 1))
    right = list(range(1, k))
    width = lambda ids: sum(sizes[j] for j in ids)
    a = p.stack(mid, [0]) if mid else np.zeros((0, sizes[0]))
    b = p.stack(mid, right) if mid else np.zeros((0, width(right)))
    c = p.stack([n - 1], right) if right else np.zeros((sizes[n - 1], 0))
    return Lrcp2x2Problem(a, b, c)


def per_block_minimum(p: HankelCompletionProblem, k: int, tol=None) -> int:
    """min_X rank H_k(X), via the 2x2 lower bound on the induced split."""
    n = p.n_blocks
    if not 1 <= k <= n - 1:
        raise IndexError(f"k must be in 1..{n - 1}, got {k}")
    return min_rank_bound(_stage_problem(p, k), tol)


# ---------------------------------------------------------------------------
# Normalization: equivalent blocks with trivial row/column intersections.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizationRecord:
    """Row and column recombinations applied; the unknown corner is unchanged."""

    row_ops: tuple
    col_ops: tuple

    def map_back(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)


def _pinv(a):
    if min(a.shape) == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    return np.linalg.pinv(a)


def _left_null(a, tol):
    """Orthonormal basis of the left null space (columns)."""
    if a.shape[0] == 0:
        return np.zeros((0, 0))
    if a.shape[1] == 0:
        return np.eye(a.shape[0])
    u, s, _ = np.linalg.svd(a)
    r = int(np.sum(s > tol.cutoff(s[0] if s.size else 1.0)))
    return u[:, r:]


def _right_null(a, tol):
    if a.shape[1] == 0:
        return np.zeros((0, 0))
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    _, s, vt = np.linalg.svd(a)
    r = int(np.sum(s > tol.cutoff(s[0] if s.size else 1.0)))
    return vt[r:].T


def normalize(p: HankelCompletionProblem, tol=None):
    """Equivalent problem whose sweep hypotheses hold for every block.

    Row sweep: each block row k is recombined with the rows below it so
    that its trailing part becomes orthogonal to their row space (the
    leading part is additionally cleaned where the choice is free).
    Column sweep: mirrored on the columns, touching block rows below the
    diagonal only.  Both act by nonsingular transforms on the fixed
    blocks, so rank H_k(X) is preserved for every X and every k.
    """
    tol = as_tolerance(tol)
    n = p.n_blocks
    blocks = {key: blk.copy() for key, blk in p.blocks.items()}
    sizes = p.partition.sizes

    def stack_rows(rows, cols):
        out = np.zeros((sum(sizes[i] for i in rows), sum(sizes[j] for j in cols)))
        r0 = 0
        for i in rows:
            c0 = 0
            for j in cols:
                out[r0:r0 + sizes[i], c0:c0 + sizes[j]] = blocks[(i, j)]
                c0 += sizes[j]
            r0 += sizes[i]
        return out

    row_ops = []
    for k in range(n - 2, 0, -1):
        below = list(range(k + 1, n - 1))
        tail_cols = list(range(1, k))
        if not below:
            continue
        b = stack_rows(below, tail_cols) if tail_cols else np.zeros((sum(sizes[i] for i in below), 0))
        a = stack_rows(below, [0])
        f = stack_rows([k], tail_cols) if tail_cols else np.zeros((sizes[k], 0))
        e = blocks[(k, 0)]
        m = f @ _pinv(b)
        # Remaining freedom (rows annihilating B) is spent cleaning E.
        nullb = _left_null(b, tol)
        if nullb.shape[1]:
            t = (e - m @ a) @ _pinv(nullb.T @ a)
            m = m + t @ nullb.T
        if m.size:
            r0 = 0
            for i in below:
                for j in range(k):
                    blocks[(k, j)] = blocks[(k, j)] - m[:, r0:r0 + sizes[i]] @ blocks[(i, j)]
                r0 += sizes[i]
        row_ops.append((k, m))

    col_ops = []
    for k in range(1, n - 1):
        below = list(range(k + 1, n - 1))
        tail_cols = list(range(1, k))
        b = stack_rows(below, tail_cols) if below and tail_cols else np.zeros(
            (sum(sizes[i] for i in below), sum(sizes[j] for j in tail_cols)))
        g = stack_rows(below, [k]) if below else np.zeros((0, sizes[k]))
        c = stack_rows([n - 1], tail_cols) if tail_cols else np.zeros((sizes[n - 1], 0))
        h = blocks[(n - 1, k)]
        m = _pinv(b) @ g
        nullb = _right_null(b, tol)
        if nullb.shape[1]:
            t = _pinv(c @ nullb) @ (h - c @ m)
            m = m + nullb @ t
        if m.size:
            c0 = 0
            for j in tail_cols:
                for i in range(k + 1, n):
                    blocks[(i, k)] = blocks[(i, k)] - blocks[(i, j)] @ m[c0:c0 + sizes[j], :]
                c0 += sizes[j]
        col_ops.append((k, m))

    return (
        HankelCompletionProblem(p.partition, blocks),
        NormalizationRecord(tuple(row_ops), tuple(col_ops)),
    )


# ---------------------------------------------------------------------------
# Affine solution sets in corner space.
# ---------------------------------------------------------------------------


class _AffineSet:
    """Affine subspace of (m, n) matrices: anchor + span of vec-orthonormal basis."""

    def __init__(self, anchor, basis):
        self.anchor = np.asarray(anchor, dtype=float)
        self.m, self.n = self.anchor.shape
        self.basis = np.asarray(basis, dtype=float).reshape(-1, self.m * self.n)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def from_solution(cls, sol: Lrcp2x2Solution, tol) -> "_AffineSet":
        m, n = sol.x_shape
        qo = orth_rows(sol.q_abar_a, tol)
        po = orth_columns(sol.p_c_cbar, tol)
        vecs = []
        for q in qo:
            block = np.zeros((m, m * n))
            for j in range(m):
                block[j, j * n:(j + 1) * n] = q
            vecs.append(block)
        for i in range(po.shape[1]):
            block = np.zeros((n, m * n))
            for c in range(n):
                col = np.zeros((m, n))
                col[:, c] = po[:, i]
                block[c] = col.ravel()
            vecs.append(block)
        stacked = np.vstack(vecs) if vecs else np.zeros((0, m * n))
        basis = orth_rows(stacked, tol) if stacked.shape[0] else stacked
        return cls(sol.central(), basis)

    def min_norm_anchor(self):
        """Re-anchor at the minimum-norm point of the set (canonical representative)."""
        v = self.anchor.ravel()
        if self.basis.shape[0]:
            v = v - self.basis.T @ (self.basis @ v)
        self.anchor = v.reshape(self.m, self.n)

    def intersect(self, other: "_AffineSet", tol) -> "_AffineSet | None":
        """Exact intersection, or None when it is empty at the tolerance."""
        delta = (other.anchor - self.anchor).ravel()
        ops = np.vstack([self.basis, -other.basis]).T  # (mn, d1+d2)
        if ops.shape[1]:
            coef, *_ = np.linalg.lstsq(ops, delta, rcond=None)
            residual = ops @ coef - delta
        else:
            coef = np.zeros(0)
            residual = -delta
        scale = max(1.0, np.linalg.norm(self.anchor), np.linalg.norm(other.anchor))
        if np.linalg.norm(residual) > 100 * tol.cutoff(1.0) * scale:
            return None
        point = self.anchor.ravel() + self.basis.T @ coef[: self.dim]
        if self.dim and other.dim:
            inter = row_space_intersection(self.basis, other.basis, tol).vectors
        else:
            inter = np.zeros((0, self.m * self.n))
        out = _AffineSet(point.reshape(self.m, self.n), inter)
        out.min_norm_anchor()
        return out

    def free_row_space(self, tol) -> np.ndarray:
        """Largest row space V with every matrix of row space in V inside the set's translations.

        Rows v satisfy e_j v^T in span(basis) for all j; these are the
        null directions of m*I - sum_j G_j^T G_j with G_j the j-th row
        slices of the basis.
        """
        if self.basis.shape[0] == 0:
            return np.zeros((0, self.n))
        b3 = self.basis.reshape(-1, self.m, self.n)
        gram = np.zeros((self.n, self.n))
        for j in range(self.m):
            gj = b3[:, j, :]
            gram += gj.T @ gj
        w, v = np.linalg.eigh(self.m * np.eye(self.n) - gram)
        keep = w <= max(self.m, 1) * 10 * tol.cutoff(1.0)
        return v[:, keep].T.copy()


@dataclass
class RestrictedSolutionSet:
    """Current block's solution-set data restricted to the corners minimizing all blocks so far.

    ``solution`` is the full affine parametrization of the current 2x2
    problem; ``pinned_y`` pins its second free parameter and
    ``free_rows`` spans the first parameter's surviving row directions.
    Samples ``anchor + F @ free_rows`` attain the minimum rank of every
    Hankel block processed so far.
    """

    problem: Lrcp2x2Problem
    solution: Lrcp2x2Solution
    pinned_y: np.ndarray
    free_rows: np.ndarray
    anchor: np.ndarray
    affine: _AffineSet = field(repr=False)

    @property
    def is_unique(self) -> bool:
        return self.affine.dim == 0

    def sample(self, f=None) -> np.ndarray:
        if f is None:
            return self.anchor.copy()
        f = np.asarray(f, dtype=float).reshape(self.anchor.shape[0], self.free_rows.shape[0])
        return self.anchor + f @ self.free_rows


def _fit_pinned(sol: Lrcp2x2Solution, x, tol) -> np.ndarray:
    """Least-squares value of the second free parameter reproducing x."""
    m, n = sol.x_shape
    da = sol.q_abar_a.shape[0]
    dc = sol.p_c_cbar.shape[1]
    rhs = (np.asarray(x) - sol.central()).ravel()
    cols = []
    for i in range(da):
        for j in range(m):
            e = np.zeros((m, n))
            e[j] = sol.q_abar_a[i]
            cols.append(e.ravel())
    for i in range(dc):
        for c in range(n):
            e = np.zeros((m, n))
            e[:, c] = sol.p_c_cbar[:, i]
            cols.append(e.ravel())
    if not cols:
        return np.zeros((dc, n))
    coef, *_ = np.linalg.lstsq(np.array(cols).T, rhs, rcond=None)
    return coef[m * da:].reshape(dc, n)


def _restricted(problem: Lrcp2x2Problem, sol: Lrcp2x2Solution, affine: _AffineSet, tol) -> RestrictedSolutionSet:
    return RestrictedSolutionSet(
        problem=problem,
        solution=sol,
        pinned_y=_fit_pinned(sol, affine.anchor, tol),
        free_rows=affine.free_row_space(tol),
        anchor=affine.anchor.copy(),
        affine=affine,
    )


def _initial_set(p: HankelCompletionProblem, k: int, tol) -> RestrictedSolutionSet:
    prob = _stage_problem(p, k)
    sol = solve_set(prob, tol)
    affine = _AffineSet.from_solution(sol, tol)
    affine.min_norm_anchor()
    return _restricted(prob, sol, affine, tol)


@dataclass(frozen=True)
class RowRemoval:
    """Drop the top block row [E F] of the current problem [[E, F], [A, B], [X, C]]."""

    e: np.ndarray
    f: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


@dataclass(frozen=True)
class ColumnAddition:
    """Append columns [G; H] to the current problem, giving [[A, B G], [X, C H]]."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    g: np.ndarray
    h: np.ndarray


def _removal_step(p: HankelCompletionProblem, k: int) -> RowRemoval:
    n = p.n_blocks
    sizes = p.partition.sizes
    below = list(range(k + 1, n - 1))
    right = list(range(1, k))
    width = sum(sizes[j] for j in right)
    return RowRemoval(
        e=p.blocks[(k, 0)],
        f=p.stack([k], right) if right else np.zeros((sizes[k], 0)),
        a=p.stack(below, [0]) if below else np.zeros((0, sizes[0])),
        b=p.stack(below, right) if below else np.zeros((0, width)),
        c=p.stack([n - 1], right) if right else np.zeros((sizes[n - 1], 0)),
    )


def _addition_step(p: HankelCompletionProblem, k: int) -> ColumnAddition:
    n = p.n_blocks
    sizes = p.partition.sizes
    below = list(range(k + 1, n - 1))
    right = list(range(1, k))
    width = sum(sizes[j] for j in right)
    return ColumnAddition(
        a=p.stack(below, [0]) if below else np.zeros((0, sizes[0])),
        b=p.stack(below, right) if below else np.zeros((0, width)),
        c=p.stack([n - 1], right) if right else np.zeros((sizes[n - 1], 0)),
        g=p.stack(below, [k]) if below else np.zeros((0, sizes[k])),
        h=p.blocks[(n - 1, k)],
    )


def _advance(s: RestrictedSolutionSet, problem: Lrcp2x2Problem, tol) -> RestrictedSolutionSet:
    sol = solve_set(problem, tol)
    new = _AffineSet.from_solution(sol, tol)
    inter = s.affine.intersect(new, tol)
    if inter is None:
        raise DegenerateProblemError(
            "solution sets of consecutive Hankel blocks have empty intersection at the tolerance"
        )
    return _restricted(problem, sol, inter, tol)


def restrict_after_removing_rows(s: RestrictedSolutionSet, sub: RowRemoval, tol=None) -> RestrictedSolutionSet:
    """Restrict the set to corners that also minimize the row-reduced problem."""
    tol = as_tolerance(tol)
    if row_space_intersection(sub.f, sub.b, tol).dim != 0:
        raise HypothesisViolationError(
            "row spaces of the removed block F and of B intersect; normalize the problem first"
        )
    return _advance(s, Lrcp2x2Problem(sub.a, sub.b, sub.c), tol)


def restrict_after_adding_columns(s: RestrictedSolutionSet, sub: ColumnAddition, tol=None) -> RestrictedSolutionSet:
    """Restrict the set to corners that also minimize the column-extended problem."""
    tol = as_tolerance(tol)
    if column_space_intersection(sub.b, sub.g, tol).dim != 0:
        raise HypothesisViolationError(
            "column spaces of B and of the added block G intersect; normalize the problem first"
        )
    b_ext = np.hstack([sub.b, sub.g])
    c_ext = np.hstack([sub.c, sub.h])
    return _advance(s, Lrcp2x2Problem(sub.a, b_ext, c_ext), tol)


def _sweep(p: HankelCompletionProblem, start: int, tol) -> np.ndarray:
    """Chain the restricted sets over blocks start..n-1 with early exit on uniqueness."""
    n = p.n_blocks
    q, _ = normalize(p, tol)
    s = _initial_set(q, start, tol)
    for k in range(start, n - 1):
        if s.is_unique:
            return s.anchor
        s = restrict_after_removing_rows(s, _removal_step(q, k), tol)
        if s.is_unique:
            return s.anchor
        s = restrict_after_adding_columns(s, _addition_step(q, k), tol)
    return s.anchor


def solve_all(p: HankelCompletionProblem, tol=None) -> np.ndarray:
    """Corner minimizing every Hankel block rank simultaneously (full sweep)."""
    tol = as_tolerance(tol)
    if p.n_blocks == 2:
        return np.zeros(p.corner_shape)
    return _sweep(p, 1, tol)


def solve_single(p: HankelCompletionProblem, k: int, tol=None) -> np.ndarray:
    """Corner minimizing rank H_k, refined by the sweep from block k when non-unique.

    If block k has a unique minimizer it is returned immediately and is
    globally optimal.  Otherwise the restricted chain continues through
    blocks k+1..n-1 (early exit on uniqueness); the result minimizes
    blocks k..n-1 exactly and every earlier block within the slack of
    the block-k free dimensions.
    """
    tol = as_tolerance(tol)
    n = p.n_blocks
    if not 1 <= k <= n - 1:
        raise IndexError(f"k must be in 1..{n - 1}, got {k}")
    if n == 2:
        return np.zeros(p.corner_shape)
    prob = _stage_problem(p, k)
    sol = solve_set(prob, tol)
    if sol.dims[0] == 0 and sol.dims[5] == 0:
        return sol.central()
    return _sweep(p, k, tol)
