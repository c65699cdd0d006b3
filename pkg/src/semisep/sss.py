"""Sequentially semi-separable representations on the line graph.

Generators are stored per 0-based block k with state dimensions indexed
by the n+1 cuts of the partition (``rg[c]``/``rh[c]`` is the rank of the
upper/lower Hankel block at cut c; ``rg[0] = rg[n] = 0``):

    d[k]  (N_k, N_k)        diagonal block
    ug[k] (N_k, rg[k+1])    upper output map      } A[k,l] = ug[k] wg[k+1]
    wg[k] (rg[k], rg[k+1])  upper transition      }   ... wg[l-1] vg[l]^T  (k < l)
    vg[k] (N_k, rg[k])      upper input map       }
    ph[k] (N_k, rh[k])      lower output map      } A[k,l] = ph[k] wh[k-1]
    wh[k] (rh[k+1], rh[k])  lower transition      }   ... wh[l+1] qh[l]^T  (k > l)
    qh[k] (N_k, rh[k+1])    lower input map       }

Boundary generators have a zero dimension, which keeps every recurrence
free of special cases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_tolerance
from .partition import BlockPartition

__all__ = [
    "SssRep",
    "SingularRepresentationError",
    "sss_from_dense",
    "sss_to_dense",
    "sss_matvec",
    "sss_solve",
    "sss_add",
    "sss_multiply",
    "sss_invert",
    "sss_transpose",
    "sss_identity",
    "sss_sizes",
]


class SingularRepresentationError(np.linalg.LinAlgError):
    """Singularity detected while factorizing the lifted system."""


@dataclass(frozen=True)
class SssRep:
    partition: BlockPartition
    rg: tuple
    rh: tuple
    d: tuple
    ug: tuple
    wg: tuple
    vg: tuple
    ph: tuple
    wh: tuple
    qh: tuple

    def __post_init__(self):
        n = self.partition.n_blocks
        sizes = self.partition.sizes
        rg = tuple(int(r) for r in self.rg)
        rh = tuple(int(r) for r in self.rh)
        if len(rg) != n + 1 or len(rh) != n + 1 or rg[0] or rg[n] or rh[0] or rh[n]:
            raise ValueError("state dimension vectors must have length n+1 with zero ends")
        object.__setattr__(self, "rg", rg)
        object.__setattr__(self, "rh", rh)
        for name, shapes in (
            ("d", [(sizes[k], sizes[k]) for k in range(n)]),
            ("ug", [(sizes[k], rg[k + 1]) for k in range(n)]),
            ("wg", [(rg[k], rg[k + 1]) for k in range(n)]),
            ("vg", [(sizes[k], rg[k]) for k in range(n)]),
            ("ph", [(sizes[k], rh[k]) for k in range(n)]),
            ("wh", [(rh[k + 1], rh[k]) for k in range(n)]),
            ("qh", [(sizes[k], rh[k + 1]) for k in range(n)]),
        ):
            gens = tuple(np.asarray(g, dtype=float).reshape(shape) for g, shape in zip(getattr(self, name), shapes))
            if len(gens) != n:
                raise ValueError(f"{name} must have one generator per block")
            object.__setattr__(self, name, gens)

    @property
    def n_blocks(self) -> int:
        return self.partition.n_blocks

    @property
    def shape(self) -> tuple:
        return (self.partition.total, self.partition.total)


def sss_sizes(rep) -> tuple:
    """(interior upper dims, interior lower dims, total sum)."""
    rg = rep.rg[1:-1]
    rh = rep.rh[1:-1]
    return rg, rh, int(sum(rg) + sum(rh))


def sss_identity(partition: BlockPartition) -> SssRep:
    """Identity matrix as a representation with all state dimensions zero."""
    sizes = partition.sizes
    return _from_lower_upper(
        partition,
        [np.eye(s) for s in sizes],
        _zero_chain(partition),
        _zero_chain(partition),
    )


def _zero_chain(partition):
    n = partition.n_blocks
    sizes = partition.sizes
    dims = (0,) * (n + 1)
    out = [np.zeros((sizes[k], 0)) for k in range(n)]
    trans = [np.zeros((0, 0)) for _ in range(n)]
    return out, trans, [o.copy() for o in out], dims


def _from_lower_upper(partition, d, lower, upper) -> SssRep:
    ph, wh, qh, rh = lower
    vg_, wgT, ug_, rg = upper
    # The upper chain is produced by running the lower construction on A^T.
    ug = [u.copy() for u in ug_]
    wg = [w.T.copy() for w in wgT]
    vg = [v.copy() for v in vg_]
    return SssRep(
        partition=partition,
        rg=tuple(rg),
        rh=tuple(rh),
        d=tuple(np.asarray(x, dtype=float) for x in d),
        ug=tuple(ug),
        wg=tuple(wg),
        vg=tuple(vg),
        ph=tuple(ph),
        wh=tuple(wh),
        qh=tuple(qh),
    )


def _lower_generators(a, partition, tol):
    """Minimal lower generators by sweeping the Hankel blocks with carried SVDs.

    At cut c the compressed block [carry | new column] has exactly the
    singular values of H_c, so the numerical ranks equal the per-block
    SVD ranks at the same cutoff.
    """
    n = partition.n_blocks
    sizes = partition.sizes
    off = partition.offsets
    tol = as_tolerance(tol)

    ph = [np.zeros((sizes[k], 0)) for k in range(n)]
    wh = [np.zeros((0, 0)) for _ in range(n)]
    qh = [np.zeros((sizes[k], 0)) for k in range(n)]
    rh = [0] * (n + 1)

    x_prev = np.zeros((partition.total - off[1], 0))
    s_prev = np.zeros(0)
    for c in range(1, n):
        rows = slice(off[c], partition.total)
        newcol = a[rows, off[c - 1]:off[c]]
        k_mat = np.hstack([x_prev * s_prev, newcol])
        if min(k_mat.shape) == 0:
            u = np.zeros((k_mat.shape[0], 0))
            s = np.zeros(0)
            vt = np.zeros((0, k_mat.shape[1]))
        else:
            u, s, vt = np.linalg.svd(k_mat, full_matrices=False)
        r = int(np.sum(s > tol.cutoff(s[0]))) if s.size else 0
        x_c = u[:, :r]
        y_t = s[:r, None] * vt[:r]
        rh[c] = r
        qh[c - 1] = y_t[:, x_prev.shape[1]:].T.copy()
        ph[c] = x_c[: sizes[c]].copy()
        if c > 1:
            wh[c - 1] = x_c.T @ x_prev
        x_prev = x_c[sizes[c]:]
        s_prev = s[:r]
    wh[0] = np.zeros((rh[1], 0))
    wh[n - 1] = np.zeros((0, rh[n - 1]))
    ph[0] = np.zeros((sizes[0], 0))
    qh[n - 1] = np.zeros((sizes[n - 1], 0))
    return ph, wh, qh, tuple(rh)


def sss_from_dense(a, partition: BlockPartition, tol=None) -> SssRep:
    """Uniformly minimal representation: state dims equal the Hankel-block ranks."""
    a = np.asarray(a, dtype=float)
    if a.shape != (partition.total, partition.total):
        raise ValueError(f"matrix shape {a.shape} does not match the partition")
    tol = as_tolerance(tol)
    n = partition.n_blocks
    d = [partition.block(a, k, k).copy() for k in range(n)]
    lower = _lower_generators(a, partition, tol)
    upper = _lower_generators(a.T, partition, tol)
    return _from_lower_upper(partition, d, lower, upper)


def _states(rep, x_blocks):
    """Cut states: gcut[c] carries blocks c..n-1, hcut[c] carries blocks 0..c-1."""
    n = rep.n_blocks
    gcut = [None] * (n + 1)
    gcut[n] = np.zeros(0)
    for k in range(n - 1, -1, -1):
        gcut[k] = rep.vg[k].T @ x_blocks[k] + rep.wg[k] @ gcut[k + 1]
    hcut = [None] * (n + 1)
    hcut[0] = np.zeros(0)
    for k in range(n):
        hcut[k + 1] = rep.qh[k].T @ x_blocks[k] + rep.wh[k] @ hcut[k]
    return gcut, hcut


def _split_blocks(rep, x):
    x = np.asarray(x, dtype=float).ravel()
    if x.size != rep.partition.total:
        raise ValueError(f"vector length {x.size} does not match matrix size {rep.partition.total}")
    off = rep.partition.offsets
    return x, [x[off[k]:off[k + 1]] for k in range(rep.n_blocks)]


def sss_matvec(rep: SssRep, x) -> np.ndarray:
    """A @ x via the causal and anti-causal state recursions (linear cost)."""
    x, xb = _split_blocks(rep, x)
    gcut, hcut = _states(rep, xb)
    out = [
        rep.d[k] @ xb[k] + rep.ug[k] @ gcut[k + 1] + rep.ph[k] @ hcut[k]
        for k in range(rep.n_blocks)
    ]
    return np.concatenate(out)


def sss_to_dense(rep: SssRep) -> np.ndarray:
    """Assemble every block from the closed-form entry formula."""
    n = rep.n_blocks
    part = rep.partition
    off = part.offsets
    a = np.zeros(rep.shape)
    for k in range(n):
        a[part.block_slice(k), part.block_slice(k)] = rep.d[k]
        chain = rep.ph[k]
        for l in range(k - 1, -1, -1):
            a[part.block_slice(k), part.block_slice(l)] = chain @ rep.qh[l].T
            chain = chain @ rep.wh[l]
        chain = rep.ug[k]
        for l in range(k + 1, n):
            a[part.block_slice(k), part.block_slice(l)] = chain @ rep.vg[l].T
            chain = chain @ rep.wg[l]
    return a


def _lifted_blocks(rep):
    """Diagonal / sub / super blocks of the merged (g, h, x) tridiagonal system."""
    n = rep.n_blocks
    sizes = rep.partition.sizes
    rg, rh = rep.rg, rep.rh
    dims = [rg[k] + rh[k + 1] + sizes[k] for k in range(n)]
    diag, sub, sup = [], [], []
    for k in range(n):
        a, b, c = rg[k], rh[k + 1], sizes[k]
        blk = np.zeros((dims[k], dims[k]))
        blk[:a, :a] = np.eye(a)
        blk[:a, a + b:] = -rep.vg[k].T
        blk[a:a + b, a:a + b] = np.eye(b)
        blk[a:a + b, a + b:] = -rep.qh[k].T
        blk[a + b:, a + b:] = rep.d[k]
        diag.append(blk)
        if k > 0:
            lo = np.zeros((dims[k], dims[k - 1]))
            pa = rg[k - 1]
            lo[a:a + b, pa:pa + rh[k]] = -rep.wh[k]
            lo[a + b:, pa:pa + rh[k]] = rep.ph[k]
            sub.append(lo)
        if k < n - 1:
            up = np.zeros((dims[k], dims[k + 1]))
            up[:a, :rg[k + 1]] = -rep.wg[k]
            up[a + b:, :rg[k + 1]] = rep.ug[k]
            sup.append(up)
    return dims, diag, sub, sup


def sss_solve(rep: SssRep, b, tol=None) -> np.ndarray:
    """Solve A x = b through the lifted block-tridiagonal system.

    Sequential block elimination along the line; no fill outside the
    band.  Raises ``SingularRepresentationError`` when a pivot block is
    singular.
    """
    b, bb = _split_blocks(rep, b)
    n = rep.n_blocks
    sizes = rep.partition.sizes
    rg, rh = rep.rg, rep.rh
    dims, diag, sub, sup = _lifted_blocks(rep)
    rhs = []
    for k in range(n):
        beta = np.zeros(dims[k])
        beta[rg[k] + rh[k + 1]:] = bb[k]
        rhs.append(beta)

    # Forward elimination (block Thomas), then back substitution.
    pivots = [diag[0]]
    rhs_f = [rhs[0]]
    try:
        for k in range(1, n):
            solved = np.linalg.solve(pivots[k - 1], np.hstack([sup[k - 1], rhs_f[k - 1][:, None]]))
            pivots.append(diag[k] - sub[k - 1] @ solved[:, :-1])
            rhs_f.append(rhs[k] - sub[k - 1] @ solved[:, -1])
        xi = [None] * n
        xi[n - 1] = np.linalg.solve(pivots[n - 1], rhs_f[n - 1])
        for k in range(n - 2, -1, -1):
            xi[k] = np.linalg.solve(pivots[k], rhs_f[k] - sup[k] @ xi[k + 1])
    except np.linalg.LinAlgError as exc:
        raise SingularRepresentationError("singular pivot in the lifted solve") from exc
    out = [xi[k][rg[k] + rh[k + 1]:] for k in range(n)]
    return np.concatenate(out)


def _check_same_partition(a, b):
    if a.partition.sizes != b.partition.sizes:
        raise ValueError("representations have different partitions")


def sss_add(a: SssRep, b: SssRep) -> SssRep:
    """Sum by generator concatenation; state dims add."""
    _check_same_partition(a, b)
    n = a.n_blocks

    def blkdiag(x, y):
        out = np.zeros((x.shape[0] + y.shape[0], x.shape[1] + y.shape[1]))
        out[: x.shape[0], : x.shape[1]] = x
        out[x.shape[0]:, x.shape[1]:] = y
        return out

    return SssRep(
        partition=a.partition,
        rg=tuple(x + y for x, y in zip(a.rg, b.rg)),
        rh=tuple(x + y for x, y in zip(a.rh, b.rh)),
        d=tuple(a.d[k] + b.d[k] for k in range(n)),
        ug=tuple(np.hstack([a.ug[k], b.ug[k]]) for k in range(n)),
        wg=tuple(blkdiag(a.wg[k], b.wg[k]) for k in range(n)),
        vg=tuple(np.hstack([a.vg[k], b.vg[k]]) for k in range(n)),
        ph=tuple(np.hstack([a.ph[k], b.ph[k]]) for k in range(n)),
        wh=tuple(blkdiag(a.wh[k], b.wh[k]) for k in range(n)),
        qh=tuple(np.hstack([a.qh[k], b.qh[k]]) for k in range(n)),
    )


def sss_transpose(rep: SssRep) -> SssRep:
    """Representation of A^T: swap the causal and anti-causal flows."""
    n = rep.n_blocks
    return SssRep(
        partition=rep.partition,
        rg=rep.rh,
        rh=rep.rg,
        d=tuple(rep.d[k].T for k in range(n)),
        ug=tuple(rep.qh[k].copy() for k in range(n)),
        wg=tuple(rep.wh[k].T for k in range(n)),
        vg=tuple(rep.ph[k].copy() for k in range(n)),
        ph=tuple(rep.vg[k].copy() for k in range(n)),
        wh=tuple(rep.wg[k].T for k in range(n)),
        qh=tuple(rep.ug[k].copy() for k in range(n)),
    )


def _product_lower(a: SssRep, b: SssRep):
    """Lower generators of A @ B by stacking flows plus cross-Gramian corrections.

    k_cross[c] accumulates lower(A)-through-upper(B) interactions below
    cut c; s_cross[c] the mirrored upper(A)-through-lower(B) ones above.
    """
    n = a.n_blocks
    k_cross = [None] * (n + 1)
    k_cross[0] = np.zeros((a.rh[0], b.rg[0]))
    for c in range(n):
        k_cross[c + 1] = a.wh[c] @ k_cross[c] @ b.wg[c] + a.qh[c].T @ b.ug[c]
    s_cross = [None] * (n + 1)
    s_cross[n] = np.zeros((a.rg[n], b.rh[n]))
    for c in range(n - 1, -1, -1):
        s_cross[c] = a.vg[c].T @ b.ph[c] + a.wg[c] @ s_cross[c + 1] @ b.wh[c]

    ph, wh, qh = [], [], []
    for k in range(n):
        ph.append(np.hstack([a.ph[k], a.d[k] @ b.ph[k] + a.ug[k] @ s_cross[k + 1] @ b.wh[k]]))
        top = a.wh[k] @ k_cross[k] @ b.vg[k].T + a.qh[k].T @ b.d[k]
        qh.append(np.hstack([top.T, b.qh[k]]))
        w = np.zeros((a.rh[k + 1] + b.rh[k + 1], a.rh[k] + b.rh[k]))
        w[: a.rh[k + 1], : a.rh[k]] = a.wh[k]
        w[: a.rh[k + 1], a.rh[k]:] = a.qh[k].T @ b.ph[k]
        w[a.rh[k + 1]:, a.rh[k]:] = b.wh[k]
        wh.append(w)
    rh = tuple(x + y for x, y in zip(a.rh, b.rh))
    return ph, wh, qh, rh, k_cross, s_cross


def sss_multiply(a: SssRep, b: SssRep) -> SssRep:
    """Product A @ B; state dims are the sums of the operand dims."""
    _check_same_partition(a, b)
    n = a.n_blocks
    ph, wh, qh, rh, k_cross, s_cross = _product_lower(a, b)
    d = [
        a.d[k] @ b.d[k] + a.ph[k] @ k_cross[k] @ b.vg[k].T + a.ug[k] @ s_cross[k + 1] @ b.qh[k].T
        for k in range(n)
    ]
    phT, whT, qhT, rgT, _, _ = _product_lower(sss_transpose(b), sss_transpose(a))
    return SssRep(
        partition=a.partition,
        rg=rgT,
        rh=rh,
        d=tuple(d),
        ug=tuple(qhT[k] for k in range(n)),
        wg=tuple(whT[k].T for k in range(n)),
        vg=tuple(phT[k] for k in range(n)),
        ph=tuple(ph),
        wh=tuple(wh),
        qh=tuple(qh),
    )


def sss_invert(rep: SssRep, tol=None) -> SssRep:
    """Minimal representation of the inverse (dense inverse + reconstruction).

    The inverse has exactly the same Hankel-block ranks, so the result's
    state dims equal the input's when the representation is minimal.
    """
    dense = sss_to_dense(rep)
    try:
        inv = np.linalg.inv(dense)
    except np.linalg.LinAlgError as exc:
        raise SingularRepresentationError("matrix is singular") from exc
    return sss_from_dense(inv, rep.partition, tol)
