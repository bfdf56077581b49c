import numpy as np
import pytest

from dephase_lab import _pykernels, kernels
from dephase_lab.sdp import BlockFamily, BlockSDP, SolverError, solve

cp = pytest.importorskip("cvxpy")


def diagonal_pattern(n):
    idx = np.arange(n)[:, None]
    return idx, idx.copy(), np.ones((n, 1))


def test_maxcut_relaxation_matches_cvxpy(rng):
    n = 6
    c = rng.normal(size=(n, n))
    c = c + c.T
    rows, cols, vals = diagonal_pattern(n)
    fam = BlockFamily(n, rows, cols, vals, np.arange(n)[None, :], c)
    res = solve(BlockSDP(np.ones(n), [fam]))
    x = cp.Variable((n, n), symmetric=True)
    ref = cp.Problem(cp.Minimize(cp.trace(c @ x)), [x >> 0, cp.diag(x) == 1]).solve(solver=cp.CLARABEL)
    assert res.converged
    assert abs(res.primal_objective - ref) < 1e-6 * (1 + abs(ref))
    assert abs(res.primal_objective - res.dual_objective) < 1e-6 * (1 + abs(ref))
    assert np.allclose(np.diag(res.X[0][0]), 1, atol=1e-7)


def test_shared_constraints_across_blocks(rng):
    # three 2x2 blocks; constraint 0 is the total trace, 1..3 fix each block's (0,1) entry
    count, n = 3, 2
    rows = np.array([[0, 1], [0, 1]])
    cols = np.array([[0, 1], [1, 0]])
    vals = np.array([[1.0, 1.0], [0.5, 0.5]])
    gidx = np.array([[0, 1 + b] for b in range(count)])
    c = np.array([[1.0, 0.0], [0.0, 2.0]])
    b = np.array([3.0, 0.3, -0.2, 0.1])
    res = solve(BlockSDP(b, [BlockFamily(n, rows, cols, vals, gidx, c)]))

    xs = [cp.Variable((2, 2), symmetric=True) for _ in range(count)]
    cons = [x >> 0 for x in xs] + [sum(cp.trace(x) for x in xs) == 3]
    cons += [x[0, 1] == b[1 + i] for i, x in enumerate(xs)]
    ref = cp.Problem(cp.Minimize(sum(cp.trace(c @ x) for x in xs)), cons).solve(solver=cp.CLARABEL)
    assert abs(res.primal_objective - ref) < 1e-6 * (1 + abs(ref))
    for i in range(count):
        assert abs(res.X[0][i, 0, 1] - b[1 + i]) < 1e-7


def test_iteration_cap_reports_gap():
    rows, cols, vals = diagonal_pattern(3)
    fam = BlockFamily(3, rows, cols, vals, np.arange(3)[None, :], np.ones((3, 3)))
    with pytest.raises(SolverError) as err:
        solve(BlockSDP(np.ones(3), [fam]), max_iter=2)
    assert err.value.iterations == 2 and err.value.gap > 0
    res = solve(BlockSDP(np.ones(3), [fam]), max_iter=2, raise_on_failure=False)
    assert not res.converged


def random_pattern(rng, n, m_local, pairs):
    """Symmetric sparse basis: every (r, c, v) entry comes with (c, r, v)."""
    r = rng.integers(0, n, size=(m_local, pairs))
    c = rng.integers(0, n, size=(m_local, pairs))
    v = rng.normal(size=(m_local, pairs))
    return np.hstack([r, c]), np.hstack([c, r]), np.hstack([v, v])


def random_symmetric_stack(rng, B, n):
    a = rng.normal(size=(B, n, n))
    return a + np.swapaxes(a, 1, 2)


def test_compiled_kernels_match_fallback(rng):
    if kernels.BACKEND != "cython":
        pytest.skip("compiled extension not built")
    from dephase_lab import _ckernels

    B, n, m_local, m = 7, 6, 5, 20
    x, z = random_symmetric_stack(rng, B, n), random_symmetric_stack(rng, B, n)
    rows, cols, vals = random_pattern(rng, n, m_local, 2)
    gidx = rng.integers(0, m, size=(B, m_local))
    a = np.ascontiguousarray(_pykernels.schur_local(x, z, rows, cols, vals))
    b = np.asarray(_ckernels.schur_local(x, z, rows.astype(np.intp), cols.astype(np.intp), vals))
    assert np.allclose(a, b, atol=1e-12)
    m1, m2 = np.zeros((m, m)), np.zeros((m, m))
    _pykernels.scatter_add(m1, a, gidx)
    _ckernels.scatter_add(m2, a, gidx.astype(np.intp))
    assert np.allclose(m1, m2, atol=1e-12)
    rho = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    table = rng.uniform(size=8)
    assert np.allclose(_pykernels.damp(rho, table), np.asarray(_ckernels.damp(rho, table)))


def test_schur_kernel_against_dense_definition(rng):
    B, n, m_local = 2, 4, 3
    x, z = random_symmetric_stack(rng, B, n), random_symmetric_stack(rng, B, n)
    rows, cols, vals = random_pattern(rng, n, m_local, 2)
    basis = np.zeros((m_local, n, n))
    for s in range(rows.shape[1]):
        np.add.at(basis, (np.arange(m_local), rows[:, s], cols[:, s]), vals[:, s])
    dense = np.einsum("ikl,blm,jmn,bnk->bij", basis, x, basis, z)
    assert np.allclose(kernels.schur_local(x, z, rows, cols, vals), dense)
