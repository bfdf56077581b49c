"""Coherence rank and robustness of k-level coherence.

The robustness ``R_k(rho)`` is the optimum of

    min  sum_I Tr(sigma_I) - 1
    s.t. sigma_I >= 0 supported on the k-subset I of basis states,
         sum_I sigma_I >= rho,

with one ``k x k`` block per ``k``-subset. Complex Hermitian blocks are mapped
to real symmetric ones through ``M -> [[Re M, -Im M], [Im M, Re M]]``, which
doubles every trace, so all real objectives are halved on the way out.
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .operators import as_operator
from .sdp import BlockFamily, BlockSDP, SolverError, solve

__all__ = [
    "SdpCertificate", "SolverError", "coherence_rank", "l1_coherence",
    "robustness", "robustness_curve", "build_problem", "support_sets",
]


def coherence_rank(psi, tol: float = 1e-9) -> int:
    """Number of computational-basis amplitudes with magnitude above ``tol``."""
    return int(np.count_nonzero(np.abs(np.asarray(psi)) > tol))


def l1_coherence(rho) -> float:
    """Sum of the magnitudes of the off-diagonal elements."""
    rho = np.asarray(rho)
    return float(np.abs(rho).sum() - np.abs(np.diag(rho)).sum())


def support_sets(d: int, k: int) -> np.ndarray:
    """All ``k``-element subsets of ``0..d-1`` in lexicographic order, shape ``(C(d,k), k)``."""
    if not 1 <= k <= d:
        raise ValueError(f"coherence level k={k} outside 1..{d}")
    return np.array(list(combinations(range(d), k)), dtype=np.intp).reshape(-1, k)


# Hermitian basis: d diagonal elements, then for every pair a < b a real
# symmetric element E_ab + E_ba and an imaginary one i E_ab - i E_ba.

def _pair_index(a, b, d):
    return a * d - a * (a + 1) // 2 + (b - a - 1)


def _global_index(a, b, kind, d):
    if a == b:
        return a
    return d + 2 * _pair_index(a, b, d) + kind


@lru_cache(maxsize=None)
def _embedded_pattern(n: int):
    """Sparse entries of the real embeddings of the Hermitian basis of size ``n``.

    Returns ``(keys, rows, cols, vals)`` where ``keys[j] = (u, v, kind)``.
    """
    keys, rows, cols, vals = [], [], [], []
    for u in range(n):
        keys.append((u, u, 0))
        rows.append([u, u + n, 0, 0])
        cols.append([u, u + n, 0, 0])
        vals.append([1.0, 1.0, 0.0, 0.0])
    for u in range(n):
        for v in range(u + 1, n):
            keys.append((u, v, 0))
            rows.append([u, v, u + n, v + n])
            cols.append([v, u, v + n, u + n])
            vals.append([1.0, 1.0, 1.0, 1.0])
            keys.append((u, v, 1))
            rows.append([u, v, u + n, v + n])
            cols.append([v + n, u + n, v, u])
            vals.append([-1.0, 1.0, 1.0, -1.0])
    return (tuple(keys), np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp),
            np.array(vals))


def embed(m) -> np.ndarray:
    """Real symmetric embedding ``[[Re M, -Im M], [Im M, Re M]]`` of Hermitian ``M``."""
    m = np.asarray(m)
    re, im = m.real, m.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def unembed(x) -> np.ndarray:
    """Hermitian matrix whose embedding is the structured part of real ``x``."""
    n = x.shape[-1] // 2
    x11, x12 = x[..., :n, :n], x[..., :n, n:]
    x21, x22 = x[..., n:, :n], x[..., n:, n:]
    out = 0.5 * (x11 + x22) + 0.5j * (x21 - x12)
    return 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))


def _hermitian_basis_count(d):
    return d * d


def hermitian_from_coords(y, d) -> np.ndarray:
    """Hermitian matrix ``sum_i y_i F_i`` for the basis above."""
    w = np.zeros((d, d), dtype=complex)
    w[np.arange(d), np.arange(d)] = y[:d]
    a, b = np.triu_indices(d, 1)
    re = y[d::2]
    im = y[d + 1::2]
    w[a, b] = re + 1j * im
    w[b, a] = re - 1j * im
    return w


@dataclass
class SdpProblem:
    rho: np.ndarray
    k: int
    blocks: np.ndarray
    sdp: BlockSDP


def build_problem(rho, k: int) -> SdpProblem:
    """Assemble the block program for ``R_k(rho)`` over all ``C(d, k)`` supports."""
    rho = as_operator(rho)
    d = rho.shape[0]
    subsets = support_sets(d, k)
    m = _hermitian_basis_count(d)

    keys, rows, cols, vals = _embedded_pattern(d)
    gidx_big = np.array([[_global_index(a, b, kind, d) for a, b, kind in keys]], dtype=np.intp)
    slack = BlockFamily(2 * d, rows, cols, -vals, gidx_big, np.zeros((2 * d, 2 * d)))

    lkeys, lrows, lcols, lvals = _embedded_pattern(k)
    gidx = np.empty((len(subsets), len(lkeys)), dtype=np.intp)
    for j, (u, v, kind) in enumerate(lkeys):
        gidx[:, j] = [_global_index(a, b, kind, d) for a, b in zip(subsets[:, u], subsets[:, v])]
    supports = BlockFamily(2 * k, lrows, lcols, lvals, gidx, np.eye(2 * k))

    erho = embed(rho)
    b = np.zeros(m)
    b[gidx_big[0]] = np.sum(vals * erho[rows, cols], axis=1)
    return SdpProblem(rho, k, subsets, BlockSDP(b, [slack, supports]))


@dataclass
class SdpCertificate:
    """Primal blocks, dual witness and bounds for one robustness solve.

    ``blocks[j]`` is the ``k x k`` matrix ``sigma_I`` on the basis states
    ``supports[j]`` (0-based). ``witness`` is a dual-feasible ``W`` (``W >= 0``,
    every ``k x k`` principal submatrix ``<= 1``) with
    ``Tr(rho W) - 1 = lower_bound``.
    """

    supports: np.ndarray
    blocks: np.ndarray
    objective: float
    lower_bound: float
    dual_gap: float
    witness: np.ndarray
    iterations: int

    def embedded(self, j: int, d: int) -> np.ndarray:
        """``sigma_I`` as a ``d x d`` matrix."""
        out = np.zeros((d, d), dtype=complex)
        idx = self.supports[j]
        out[np.ix_(idx, idx)] = self.blocks[j]
        return out

    def total(self, d: int) -> np.ndarray:
        out = np.zeros((d, d), dtype=complex)
        k = self.supports.shape[1]
        for u in range(k):
            for v in range(k):
                np.add.at(out, (self.supports[:, u], self.supports[:, v]), self.blocks[:, u, v])
        return out


def _repair_primal(blocks, subsets, rho):
    """Clip block spectra to PSD and shift diagonals until ``sum sigma_I >= rho``."""
    d = rho.shape[0]
    w, v = np.linalg.eigh(blocks)
    blocks = (v * np.clip(w, 0.0, None)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    cert = SdpCertificate(subsets, blocks, 0.0, 0.0, 0.0, None, 0)
    lam = np.linalg.eigvalsh(cert.total(d) - rho).min()
    if lam < 0:
        # one block per basis state picks up the missing diagonal weight
        first = {}
        for j, sub in enumerate(subsets):
            for pos, a in enumerate(sub):
                first.setdefault(int(a), (j, pos))
        for j, pos in first.values():
            blocks[j, pos, pos] += -lam
    return blocks


def _repair_dual(W, subsets):
    W = 0.5 * (W + W.conj().T)
    lam = np.linalg.eigvalsh(W).min()
    if lam < 0:
        W = W - lam * np.eye(W.shape[0])
    sub = W[subsets[:, :, None], subsets[:, None, :]]
    top = np.linalg.eigvalsh(sub).max()
    if top > 1.0:
        W = W / top
    return W


def _trivial_certificate(rho, k, subsets, blocks):
    d = rho.shape[0]
    return SdpCertificate(subsets, blocks, 0.0, 0.0, 0.0, np.eye(d, dtype=complex), 0)


def robustness(rho, k: int, tol: float = 1e-8, max_iter: int = 200):
    """Robustness of ``k``-level coherence and its certificate.

    Diagonal inputs and ``k = d`` return exactly zero without iterating.

    Raises
    ------
    SolverError
        If the interior-point iteration does not converge within ``max_iter``.
    """
    rho = as_operator(rho)
    d = rho.shape[0]
    if not 1 <= k <= d:
        raise ValueError(f"coherence level k={k} outside 1..{d}")
    subsets = support_sets(d, k)
    if k == d:
        return 0.0, _trivial_certificate(rho, k, subsets, rho[None].copy())
    off = rho - np.diag(np.diag(rho))
    if not np.any(np.abs(off) > 1e-15):
        blocks = np.zeros((len(subsets), k, k), dtype=complex)
        placed = set()
        for j, sub in enumerate(subsets):
            for pos, a in enumerate(sub):
                if a not in placed:
                    blocks[j, pos, pos] = rho[a, a].real
                    placed.add(a)
        return 0.0, _trivial_certificate(rho, k, subsets, blocks)

    problem = build_problem(rho, k)
    res = solve(problem.sdp, tol=tol, max_iter=max_iter)
    blocks = _repair_primal(unembed(res.X[1]), subsets, rho)
    upper = float(np.trace(blocks, axis1=1, axis2=2).real.sum()) - 1.0
    W = _repair_dual(hermitian_from_coords(res.y, d), subsets)
    lower = float(np.real(np.trace(rho @ W))) - 1.0
    cert = SdpCertificate(subsets, blocks, upper, lower, max(0.0, upper - lower), W,
                          res.iterations)
    return upper, cert


def robustness_curve(states, k: int, **kwargs) -> np.ndarray:
    """``R_k`` for each density matrix in ``states`` (e.g. one per noise value)."""
    return np.array([robustness(rho, k, **kwargs)[0] for rho in states])
