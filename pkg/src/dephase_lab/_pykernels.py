"""Pure numpy implementations of the hot kernels.

Signatures match :mod:`dephase_lab._ckernels` exactly; :mod:`dephase_lab.kernels`
picks one of the two at import time.
"""
import numpy as np


def damp(rho, table):
    """Return ``rho[x, y] * table[x ^ y]`` for every matrix element."""
    d = rho.shape[0]
    idx = np.arange(d)
    return rho * table[np.bitwise_xor.outer(idx, idx)]


def schur_local(X, Z, rows, cols, vals):
    """Per-block Schur complement entries ``Tr(A_i X A_j Z)``.

    ``X`` and ``Z`` are stacks of shape (B, n, n). Each basis matrix ``A_i`` is
    given sparsely by ``rows[i]``, ``cols[i]``, ``vals[i]`` (padded with zero
    values). Returns an array of shape (B, m, m).
    """
    # gather X[b, c_is, r_jt] and Z[b, c_jt, r_is] as (B, m, m, S, S)
    xg = X[:, cols[:, None, :, None], rows[None, :, None, :]]
    zg = Z[:, cols[None, :, None, :], rows[:, None, :, None]]
    w = vals[:, None, :, None] * vals[None, :, None, :]
    return np.einsum("bijst,bijst,ijst->bij", xg, zg, w, optimize=True)


def scatter_add(M, local, gidx):
    """Accumulate ``local[b, i, j]`` into ``M[gidx[b, i], gidx[b, j]]`` in place."""
    m = M.shape[0]
    flat = (gidx[:, :, None] * m + gidx[:, None, :]).ravel()
    M += np.bincount(flat, weights=local.ravel(), minlength=m * m).reshape(m, m)
    return M
