"""Complete solution set of the 2x2 low-rank completion problem.

Choose X minimizing ``rank [[A, B], [X, C]]``.  The minimum equals
``rank [A B] + rank [B; C] - rank B`` and the full solution set is the
affine family

    X(F1, F2) = F1 @ q_abar_a + p_c_bc @ r_bc_ab @ q_ab_a + p_c_cbar @ F2

parametrized by two free matrices.  All bases are orthonormal; the
complementary subspaces are fixed as orthogonal complements inside the
relevant spans, which makes the construction deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    SubspaceBasis,
    as_tolerance,
    column_space_intersection,
    complementary_split,
    numerical_rank,
    orth_columns,
    orth_rows,
    row_space_intersection,
)

__all__ = ["Lrcp2x2Problem", "Lrcp2x2Solution", "min_rank_bound", "solve_set", "sample", "is_unique"]


@dataclass(frozen=True)
class Lrcp2x2Problem:
    """Known blocks A (ra x ca), B (ra x cb), C (rc x cb); the unknown X is rc x ca."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.atleast_2d(np.asarray(self.b, dtype=float))
        c = np.atleast_2d(np.asarray(self.c, dtype=float))
        if a.shape[0] != b.shape[0]:
            raise ValueError(f"A and B must share rows: {a.shape} vs {b.shape}")
        if b.shape[1] != c.shape[1]:
            raise ValueError(f"B and C must share columns: {b.shape} vs {c.shape}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def x_shape(self) -> tuple:
        return (self.c.shape[0], self.a.shape[1])

    def assemble(self, x) -> np.ndarray:
        """The completed matrix [[A, B], [X, C]]."""
        x = np.asarray(x, dtype=float).reshape(self.x_shape)
        return np.block([[self.a, self.b], [x, self.c]])


@dataclass(frozen=True)
class Lrcp2x2Solution:
    """Affine parametrization of all minimizing completions.

    ``dims`` holds (dim V_abar, dim V_ab, dim V_bbar, dim W_bbar,
    dim W_bc, dim W_cbar): the column-side splitting of R(A), R(B) and
    the row-side splitting of R(B^T), R(C^T).
    """

    q_abar_a: np.ndarray   # (dim V_abar, ca) row factor of A along the complement
    q_ab_a: np.ndarray     # (dim V_ab, ca) row factor of A along R(A) & R(B)
    p_c_bc: np.ndarray     # (rc, dim W_bc) columns of C along R(B^T) & R(C^T)
    r_bc_ab: np.ndarray    # (dim W_bc, dim V_ab) coupling block of R
    p_c_cbar: np.ndarray   # (rc, dim W_cbar) columns of C along the complement
    r_opt: int
    dims: tuple

    @property
    def x_shape(self) -> tuple:
        return (self.p_c_bc.shape[0], self.q_ab_a.shape[1])

    @property
    def free_dims(self) -> tuple:
        """(rows of q_abar_a, columns of p_c_cbar): the two free-parameter widths."""
        return (self.q_abar_a.shape[0], self.p_c_cbar.shape[1])

    def central(self) -> np.ndarray:
        """The completion with both free parameters set to zero."""
        return self.p_c_bc @ self.r_bc_ab @ self.q_ab_a


def min_rank_bound(p: Lrcp2x2Problem, tol=None) -> int:
    """min_X rank [[A, B], [X, C]] = rank [A B] + rank [B; C] - rank B."""
    tol = as_tolerance(tol)
    r_ab = numerical_rank(np.hstack([p.a, p.b]), tol)
    r_bc = numerical_rank(np.vstack([p.b, p.c]), tol)
    return r_ab + r_bc - numerical_rank(p.b, tol)


def solve_set(p: Lrcp2x2Problem, tol=None) -> Lrcp2x2Solution:
    """Construct the full solution set of the completion problem."""
    tol = as_tolerance(tol)
    a, b, c = p.a, p.b, p.c

    # Column side: R(A) = V_ab (+) V_abar, R(B) = V_ab (+) V_bbar.
    v_ab = column_space_intersection(a, b, tol)
    ua = SubspaceBasis(orth_columns(a, tol), "column")
    ub = SubspaceBasis(orth_columns(b, tol), "column")
    v_abar = complementary_split(ua, v_ab, tol)
    v_bbar = complementary_split(ub, v_ab, tol)

    # Row side: R(B^T) = W_bc (+) W_bbar, R(C^T) = W_bc (+) W_cbar.
    w_bc = row_space_intersection(b, c, tol)
    rb = SubspaceBasis(orth_rows(b, tol), "row")
    rc = SubspaceBasis(orth_rows(c, tol), "row")
    w_bbar = complementary_split(rb, w_bc, tol)
    w_cbar = complementary_split(rc, w_bc, tol)

    # Row factor of A in the orthonormal column basis [P_abar P_ab].
    pa = np.hstack([v_abar.vectors, v_ab.vectors])
    qa = pa.T @ a
    d_abar = v_abar.vectors.shape[1]
    q_abar_a = qa[:d_abar]
    q_ab_a = qa[d_abar:]

    # Column factors of B and C along the orthonormal row bases.
    sb = np.vstack([w_bbar.vectors, w_bc.vectors])   # rows spanning R(B^T)
    p_b = b @ sb.T                                  # [P_b_bbar P_b_bc]
    sc = np.vstack([w_bc.vectors, w_cbar.vectors])   # rows spanning R(C^T)
    p_c = c @ sc.T
    d_bc = w_bc.vectors.shape[0]
    p_c_bc = p_c[:, :d_bc]
    p_c_cbar = p_c[:, d_bc:]

    # Basis change between the two rank factorizations of B:
    # [P_ab P_bbar] = [P_b_bbar P_b_bc] @ R.
    pb_cols = np.hstack([v_ab.vectors, v_bbar.vectors])
    r_full = np.linalg.pinv(p_b) @ pb_cols if min(p_b.shape) else np.zeros((p_b.shape[1], pb_cols.shape[1]))
    d_bbar = w_bbar.vectors.shape[0]
    d_vab = v_ab.vectors.shape[1]
    r_bc_ab = r_full[d_bbar:, :d_vab]

    dims = (
        v_abar.vectors.shape[1],
        v_ab.vectors.shape[1],
        v_bbar.vectors.shape[1],
        w_bbar.vectors.shape[0],
        w_bc.vectors.shape[0],
        w_cbar.vectors.shape[0],
    )
    return Lrcp2x2Solution(
        q_abar_a=q_abar_a,
        q_ab_a=q_ab_a,
        p_c_bc=p_c_bc,
        r_bc_ab=r_bc_ab,
        p_c_cbar=p_c_cbar,
        r_opt=min_rank_bound(p, tol),
        dims=dims,
    )


def sample(sol: Lrcp2x2Solution, f_abar, f_cbar) -> np.ndarray:
    """Completion for the given free parameters F1 (rc x dim V_abar), F2 (dim W_cbar x ca)."""
    rc, ca = sol.x_shape
    f_abar = np.asarray(f_abar, dtype=float).reshape(rc, sol.q_abar_a.shape[0])
    f_cbar = np.asarray(f_cbar, dtype=float).reshape(sol.p_c_cbar.shape[1], ca)
    return f_abar @ sol.q_abar_a + sol.central() + sol.p_c_cbar @ f_cbar


def is_unique(p: Lrcp2x2Problem, tol=None) -> bool:
    """True iff R(A) is inside R(B) and R(C^T) inside R(B^T) at the tolerance."""
    sol = solve_set(p, tol)
    return sol.dims[0] == 0 and sol.dims[5] == 0
