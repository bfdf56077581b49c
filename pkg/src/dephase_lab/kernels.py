"""Kernel backend selection.

The compiled Cython extension is used when it imports; otherwise the numpy
fallback in :mod:`dephase_lab._pykernels` is used. Setting the environment
variable ``DEPHASE_LAB_PURE=1`` forces the fallback.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("DEPHASE_LAB_PURE"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels


def damp(rho, table):
    return _impl.damp(np.ascontiguousarray(rho, dtype=np.complex128),
                      np.ascontiguousarray(table, dtype=np.float64))


def schur_local(X, Z, rows, cols, vals):
    """Schur complement contributions ``Tr(A_i X A_j Z)`` per block.

    Note that the HKM symmetry ``Tr(A_i X A_j Z) = Tr(A_j X A_i Z)`` only holds
    for symmetric ``X`` and ``Z``; callers pass symmetrised blocks.
    """
    return _impl.schur_local(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(Z, dtype=np.float64),
        np.ascontiguousarray(rows, dtype=np.intp),
        np.ascontiguousarray(cols, dtype=np.intp),
        np.ascontiguousarray(vals, dtype=np.float64),
    )


def scatter_add(M, local, gidx):
    return _impl.scatter_add(M, np.ascontiguousarray(local, dtype=np.float64),
                             np.ascontiguousarray(gidx, dtype=np.intp))
