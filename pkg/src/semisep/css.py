"""Cycle semi-separable representations.

A CSS representation is an SSS representation plus two corner
generators closing the cycle: ``u0`` (N_1, rg[n-1]) adds
``u0 @ vg[n-1]^T`` to block (1, n) and ``p0`` (N_n, rh[1]) adds
``p0 @ qh[0]^T`` to block (n, 1).

Construction splits off the two corner blocks, replaces them by
completions minimizing the overlapping Hankel ranks (see ``hankel``),
builds an SSS representation of the interior, and widens the two
boundary input maps so the corner residuals factor through them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import splu

from ._assemble import BlockSystem
from .linalg import as_tolerance, rank_factorize
from .partition import BlockPartition
from . import hankel as hk
from .sss import SingularRepresentationError, SssRep, sss_from_dense, sss_matvec, sss_to_dense, _states, _split_blocks

__all__ = [
    "CssRep",
    "css_from_dense",
    "css_to_dense",
    "css_matvec",
    "css_solve",
    "css_sizes",
    "css_girs_bound",
    "corner_block",
]


@dataclass(frozen=True)
class CssRep(SssRep):
    u0: np.ndarray = None
    p0: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        sizes = self.partition.sizes
        n = self.n_blocks
        u0 = np.asarray(self.u0, dtype=float).reshape(sizes[0], self.rg[n - 1])
        p0 = np.asarray(self.p0, dtype=float).reshape(sizes[n - 1], self.rh[1])
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "p0", p0)


def corner_block(e1, e2, partition: BlockPartition) -> np.ndarray:
    """Dense matrix supported on blocks (1, n) and (n, 1) only."""
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    out = np.zeros((partition.total, partition.total))
    n = partition.n_blocks
    out[partition.block_slice(0), partition.block_slice(n - 1)] = e1
    out[partition.block_slice(n - 1), partition.block_slice(0)] = e2
    return out


def _resolve_strategy(strategy, n):
    if strategy in (None, "single"):
        return ("single", (n + 1) // 2)
    if strategy == "full":
        return ("full", None)
    if isinstance(strategy, tuple) and strategy[0] == "single":
        return ("single", int(strategy[1]))
    if isinstance(strategy, str) and strategy.startswith("single:"):
        return ("single", int(strategy.split(":", 1)[1]))
    raise ValueError(f"unknown strategy {strategy!r}")


def _optimal_corner(a, partition, tol, strategy):
    problem = hk.problem_from_dense(a, partition)
    kind, k = _resolve_strategy(strategy, partition.n_blocks)
    if kind == "full":
        return hk.solve_all(problem, tol)
    return hk.solve_single(problem, k, tol)


def css_from_dense(a, partition: BlockPartition, tol=None, strategy="single") -> CssRep:
    """Construct a CSS representation; ``strategy='full'`` gives the uniformly minimal one.

    With the default single-block strategy the corner completions come
    from one Hankel block at k = ceil(n/2) (refined only if that block
    fails to pin them down), so the interior dims carry at most the
    slack of that block's free dimensions.
    """
    a = np.asarray(a, dtype=float)
    tol = as_tolerance(tol)
    n = partition.n_blocks
    if n < 3:
        raise ValueError("CSS needs at least 3 blocks")
    if a.shape != (partition.total, partition.total):
        raise ValueError(f"matrix shape {a.shape} does not match the partition")

    x_hat = _optimal_corner(a, partition, tol, strategy)
    y_hat = _optimal_corner(a.T, partition, tol, strategy).T

    corner_lo = partition.block(a, n - 1, 0) - x_hat
    corner_up = partition.block(a, 0, n - 1) - y_hat

    interior = a.copy()
    interior[partition.block_slice(n - 1), partition.block_slice(0)] = x_hat
    interior[partition.block_slice(0), partition.block_slice(n - 1)] = y_hat
    rep = sss_from_dense(interior, partition, tol)

    # Widen qh[0] so the lower corner residual factors through it.
    qh0_t, p0, tmap_lo, rh1 = _widen(rep.qh[0].T, corner_lo, tol)
    # Widen vg[n-1] likewise for the upper corner residual.
    vgn_t, u0, tmap_up, rgn = _widen(rep.vg[n - 1].T, corner_up, tol)

    qh = list(rep.qh)
    ph = list(rep.ph)
    wh = list(rep.wh)
    qh[0] = qh0_t.T
    ph[1] = rep.ph[1] @ tmap_lo
    wh[1] = rep.wh[1] @ tmap_lo
    vg = list(rep.vg)
    ug = list(rep.ug)
    wg = list(rep.wg)
    vg[n - 1] = vgn_t.T
    ug[n - 2] = rep.ug[n - 2] @ tmap_up
    wg[n - 2] = rep.wg[n - 2] @ tmap_up

    rh = list(rep.rh)
    rh[1] = rh1
    rg = list(rep.rg)
    rg[n - 1] = rgn
    return CssRep(
        partition=partition,
        rg=tuple(rg),
        rh=tuple(rh),
        d=rep.d,
        ug=tuple(ug),
        wg=tuple(wg),
        vg=tuple(vg),
        ph=tuple(ph),
        wh=tuple(wh),
        qh=tuple(qh),
        u0=u0,
        p0=p0,
    )


def _widen(q_t, residual, tol):
    """Row basis covering both the old rows and the corner residual.

    Returns the widened row factor, the corner factor through it, and
    the map carrying old-state coefficients to new-state ones.
    """
    stack = np.vstack([q_t, residual])
    fac = rank_factorize(stack, tol)
    q_new_t = fac.right            # (r_new, cols), orthogonal rows scaled by singular values
    pinv_qt = np.linalg.pinv(q_new_t)
    tmap = q_t @ pinv_qt           # (r_old, r_new)
    corner_factor = residual @ pinv_qt
    return q_new_t, corner_factor, tmap, fac.rank


def css_to_dense(rep: CssRep) -> np.ndarray:
    a = sss_to_dense(rep)
    part = rep.partition
    n = rep.n_blocks
    a[part.block_slice(0), part.block_slice(n - 1)] += rep.u0 @ rep.vg[n - 1].T
    a[part.block_slice(n - 1), part.block_slice(0)] += rep.p0 @ rep.qh[0].T
    return a


def css_matvec(rep: CssRep, x) -> np.ndarray:
    """A @ x: the SSS recursions plus the two wrap-around state taps."""
    x, xb = _split_blocks(rep, x)
    gcut, hcut = _states(rep, xb)
    n = rep.n_blocks
    out = []
    for k in range(n):
        b = rep.d[k] @ xb[k] + rep.ug[k] @ gcut[k + 1] + rep.ph[k] @ hcut[k]
        if k == 0:
            b = b + rep.u0 @ gcut[n - 1]
        if k == n - 1:
            b = b + rep.p0 @ hcut[1]
        out.append(b)
    return np.concatenate(out)


def _lifted_sparse(rep: CssRep):
    """Lifted sparse system on the cycle: unknowns (g, h, x) merged per node."""
    n = rep.n_blocks
    sizes = rep.partition.sizes
    rg, rh = rep.rg, rep.rh
    dims = [rg[k] + rh[k + 1] + sizes[k] for k in range(n)]
    starts = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    total = int(starts[-1])
    sys = BlockSystem(total)

    g0 = lambda k: starts[k]
    h0 = lambda k: starts[k] + rg[k]
    x0 = lambda k: starts[k] + rg[k] + rh[k + 1]

    for k in range(n):
        sys.add(g0(k), g0(k), np.eye(rg[k]))
        sys.add(g0(k), x0(k), -rep.vg[k].T)
        if k < n - 1:
            sys.add(g0(k), g0(k + 1), -rep.wg[k])
        sys.add(h0(k), h0(k), np.eye(rh[k + 1]))
        sys.add(h0(k), x0(k), -rep.qh[k].T)
        if k > 0:
            sys.add(h0(k), h0(k - 1), -rep.wh[k])
        sys.add(x0(k), x0(k), rep.d[k])
        if k < n - 1:
            sys.add(x0(k), g0(k + 1), rep.ug[k])
        if k > 0:
            sys.add(x0(k), h0(k - 1), rep.ph[k])
    # Corner taps close the cycle.
    sys.add(x0(0), g0(n - 1), rep.u0)
    sys.add(x0(n - 1), h0(0), rep.p0)
    x_slices = [slice(x0(k), starts[k + 1]) for k in range(n)]
    return sys.tocsc(), x_slices, total


def css_solve(rep: CssRep, b, tol=None) -> np.ndarray:
    """Solve A x = b by sparse factorization of the lifted cycle system."""
    b, bb = _split_blocks(rep, b)
    mat, x_slices, total = _lifted_sparse(rep)
    rhs = np.zeros(total)
    for k in range(rep.n_blocks):
        rhs[x_slices[k]] = bb[k]
    try:
        lu = splu(mat)
    except RuntimeError as exc:
        raise SingularRepresentationError("lifted cycle system is singular") from exc
    xi = lu.solve(rhs)
    return np.concatenate([xi[x_slices[k]] for k in range(rep.n_blocks)])


def css_sizes(rep: CssRep) -> tuple:
    """(upper dims rg_1..rg_{n-1}, lower dims rh_1..rh_{n-1}, total)."""
    rg = rep.rg[1:-1]
    rh = rep.rh[1:-1]
    return rg, rh, int(sum(rg) + sum(rh))


def css_girs_bound(rep: CssRep) -> int:
    """GIRS constant max_i {rh_i + rh_1, rg_i + rg_{n-1}} of the representation."""
    n = rep.n_blocks
    rg, rh = rep.rg, rep.rh
    best = 0
    for i in range(1, n):
        best = max(best, rh[i] + rh[1], rg[i] + rg[n - 1])
    return best
