"""Primal-dual interior-point solver for block-diagonal real semidefinite programs.

Primal:  min <C, X>  s.t.  <A_i, X> = b_i,  X >= 0
Dual:    max b.y     s.t.  S = C - sum_i y_i A_i >= 0

``X``, ``S`` and every ``A_i`` are block diagonal. Blocks are grouped into
families of equal size that share one sparse pattern for their ``A_i``
restrictions, so a family of ``B`` blocks is stored as a ``(B, n, n)`` stack.
Search directions are HKM with a Mehrotra predictor-corrector.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels


class SolverError(RuntimeError):
    """Raised when the iteration cap is reached without convergence."""

    def __init__(self, message, gap=float("nan"), iterations=0):
        super().__init__(message)
        self.gap = gap
        self.iterations = iterations


@dataclass
class BlockFamily:
    """``B`` symmetric ``n x n`` blocks sharing a sparse constraint pattern.

    ``rows``, ``cols``, ``vals`` have shape ``(m_local, S)``: local basis matrix
    ``j`` is ``sum_s vals[j, s] * E[rows[j, s], cols[j, s]]`` (zero-padded).
    ``gidx[b, j]`` is the global constraint index of local matrix ``j`` in
    block ``b``. ``C`` is the objective block, shared by all blocks.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    gidx: np.ndarray
    C: np.ndarray
    dense_basis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m_local = self.rows.shape[0]
        basis = np.zeros((m_local, self.n, self.n))
        for s in range(self.rows.shape[1]):
            np.add.at(basis, (np.arange(m_local), self.rows[:, s], self.cols[:, s]), self.vals[:, s])
        self.dense_basis = basis
        self.gidx = np.ascontiguousarray(self.gidx, dtype=np.intp)

    @property
    def count(self) -> int:
        return self.gidx.shape[0]

    def apply(self, X, m):
        """Contribution of this family to ``A(X)_i = <A_i, X>``."""
        local = np.einsum("bjk,ijk->bi", X, self.dense_basis)
        return np.bincount(self.gidx.ravel(), weights=local.ravel(), minlength=m)

    def adjoint(self, y):
        """Blocks of ``sum_i y_i A_i``."""
        return np.einsum("bi,ijk->bjk", y[self.gidx], self.dense_basis)


@dataclass
class BlockSDP:
    b: np.ndarray
    families: list

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @property
    def total_size(self) -> int:
        return sum(f.n * f.count for f in self.families)


@dataclass
class SDPResult:
    X: list
    y: np.ndarray
    S: list
    primal_objective: float
    dual_objective: float
    rel_gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    converged: bool


def _sym(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _inner(A, B):
    return float(sum(np.sum(a * b) for a, b in zip(A, B)))


def _max_step(X, dX):
    """Largest ``alpha`` with ``X + alpha dX`` PSD, per block stack (inf if unbounded)."""
    try:
        L = np.linalg.cholesky(X)
        Linv = np.linalg.inv(L)
        w = np.linalg.eigvalsh(_sym(Linv @ dX @ np.swapaxes(Linv, -1, -2)))
        lam = w.min()
    except np.linalg.LinAlgError:
        # fall back on a generalised eigenproblem via the symmetric square root
        wx, vx = np.linalg.eigh(X)
        wx = np.clip(wx, 1e-300, None)
        r = (vx / np.sqrt(wx)[..., None, :]) @ np.swapaxes(vx, -1, -2)
        lam = np.linalg.eigvalsh(_sym(r @ dX @ r)).min()
    return np.inf if lam >= 0 else -1.0 / lam


def _inv_spd(S):
    try:
        L = np.linalg.cholesky(S)
        Linv = np.linalg.inv(L)
        return np.swapaxes(Linv, -1, -2) @ Linv
    except np.linalg.LinAlgError:
        return np.linalg.inv(S)


def solve(problem: BlockSDP, tol: float = 1e-8, max_iter: int = 200, gamma: float = 0.95,
          raise_on_failure: bool = True) -> SDPResult:
    """Solve ``problem`` to relative gap and infeasibilities below ``tol``."""
    fams = problem.families
    m = problem.m
    b = problem.b
    X = [np.broadcast_to(np.eye(f.n), (f.count, f.n, f.n)).copy() for f in fams]
    S = [np.broadcast_to(np.eye(f.n), (f.count, f.n, f.n)).copy() for f in fams]
    C = [np.broadcast_to(f.C, (f.count, f.n, f.n)) for f in fams]
    y = np.zeros(m)
    nn = problem.total_size
    b_norm = 1.0 + np.linalg.norm(b)
    c_norm = 1.0 + np.sqrt(sum(np.sum(c * c) for c in C))

    def A(blocks):
        return sum(f.apply(blk, m) for f, blk in zip(fams, blocks))

    def AT(vec):
        return [f.adjoint(vec) for f in fams]

    it = 0
    rel_gap = pinf = dinf = np.inf
    pobj = dobj = np.nan
    while True:
        rp = b - A(X)
        ATy = AT(y)
        Rd = [c - s - a for c, s, a in zip(C, S, ATy)]
        pobj = _inner(C, X)
        dobj = float(b @ y)
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(rp) / b_norm
        dinf = np.sqrt(sum(np.sum(r * r) for r in Rd)) / c_norm
        if max(rel_gap, pinf, dinf) <= tol:
            converged = True
            break
        if it >= max_iter:
            converged = False
            break
        it += 1

        mu = _inner(X, S) / nn
        Zs = [_sym(_inv_spd(s)) for s in S]
        M = np.zeros((m, m))
        for f, x, z in zip(fams, X, Zs):
            local = kernels.schur_local(x, z, f.rows, f.cols, f.vals)
            kernels.scatter_add(M, local, f.gidx)
        M = 0.5 * (M + M.T)
        try:
            factor = scipy.linalg.cho_factor(M, check_finite=False)
            msolve = lambda r: scipy.linalg.cho_solve(factor, r, check_finite=False)  # noqa: E731
        except np.linalg.LinAlgError:
            msolve = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]  # noqa: E731
        XRdZ = [x @ r @ z for x, r, z in zip(X, Rd, Zs)]

        def direction(rc):
            rhs = rp - A([t - q for t, q in zip(rc, XRdZ)])
            dy = msolve(rhs)
            dS = [r - a for r, a in zip(Rd, AT(dy))]
            dX = [_sym(t - x @ ds @ z) for t, x, ds, z in zip(rc, X, dS, Zs)]
            return dX, dy, dS

        # predictor
        dXp, dyp, dSp = direction([-x for x in X])
        ap = min(1.0, min(_max_step(x, dx) for x, dx in zip(X, dXp)))
        ad = min(1.0, min(_max_step(s, ds) for s, ds in zip(S, dSp)))
        mu_aff = _inner([x + ap * dx for x, dx in zip(X, dXp)],
                        [s + ad * ds for s, ds in zip(S, dSp)]) / nn
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0

        # corrector
        rc = [sigma * mu * z - x - dx @ ds @ z for z, x, dx, ds in zip(Zs, X, dXp, dSp)]
        dX, dy, dS = direction(rc)
        ap = min(1.0, gamma * min(_max_step(x, dx) for x, dx in zip(X, dX)))
        ad = min(1.0, gamma * min(_max_step(s, ds) for s, ds in zip(S, dS)))
        X = [x + ap * dx for x, dx in zip(X, dX)]
        y = y + ad * dy
        S = [s + ad * ds for s, ds in zip(S, dS)]

    result = SDPResult(X, y, S, pobj, dobj, rel_gap, pinf, dinf, it, converged)
    if not converged and raise_on_failure:
        raise SolverError(
            f"SDP did not converge in {max_iter} iterations "
            f"(gap {rel_gap:.3g}, pinf {pinf:.3g}, dinf {dinf:.3g})",
            gap=rel_gap, iterations=it,
        )
    return result
