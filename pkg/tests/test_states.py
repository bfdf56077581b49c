from itertools import permutations

import numpy as np
import pytest

from dephase_lab.metrics import concurrence
from dephase_lab.operators import H, partial_trace
from dephase_lab.states import (
    EncodingMask, GraphSpec, apply_mask, as_state, basis_state, cluster_mask, ghz, graph_state,
    linear_cluster, parse_edge_list, phase_unitary, plus_state, read_graph, same_state, singlet,
)


def amplitudes(terms, n):
    """Build a state from ``{bitstring: amplitude}``."""
    v = np.zeros(2 ** n, dtype=complex)
    for bits, a in terms.items():
        v[int(bits, 2)] = a
    return v


def test_ghz_examples():
    assert np.allclose(ghz(2), amplitudes({"00": 1, "11": 1}, 2) / np.sqrt(2))
    g = ghz(4)
    assert abs(np.vdot(g, g) - 1) < 1e-12
    assert abs(abs(np.vdot(plus_state(4), g)) ** 2 - 1 / 8) < 1e-12
    with pytest.raises(ValueError):
        ghz(1)


def test_ghz_permutation_invariant():
    g = ghz(4).reshape([2] * 4)
    for perm in permutations(range(4)):
        assert same_state(np.transpose(g, perm).ravel(), ghz(4))


def test_graph_state_examples():
    assert same_state(graph_state(GraphSpec.from_edges(3, [])), plus_state(3))
    plus = H[:, 0]
    minus = H[:, 1]
    zero, one = np.array([1, 0]), np.array([0, 1])

    def k(*vs):
        out = vs[0]
        for v in vs[1:]:
            out = np.kron(out, v)
        return out

    expected = (k(plus, zero, zero, plus) + k(minus, one, zero, plus)
                + k(plus, zero, one, minus) - k(minus, one, one, minus)) / 2
    assert same_state(linear_cluster(4), expected)
    pair = graph_state(GraphSpec.from_edges(2, [(1, 2)]))
    assert np.allclose(partial_trace(np.outer(pair, pair.conj()), [1]), np.eye(2) / 2)


def test_graph_state_amplitudes_are_signed_uniform():
    g = GraphSpec.from_edges(5, [(1, 2), (2, 3), (3, 4), (1, 5), (2, 5)])
    psi = graph_state(g)
    assert np.allclose(np.abs(psi), 2 ** -2.5)
    assert np.allclose(psi.imag, 0)


def test_graph_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        GraphSpec.from_edges(3, [(1, 1)])
    with pytest.raises(ValueError):
        GraphSpec.from_edges(3, [(1, 4)])
    with pytest.raises(ValueError):
        GraphSpec.from_edges(3, [(1, 2), (2, 1)])
    path = tmp_path / "g.txt"
    path.write_text("4\n# path\n1 2\n2 3\n3 4\n")
    assert read_graph(path) == GraphSpec.path(4)
    assert parse_edge_list("2\n1 2\n").sorted_edges() == [(1, 2)]


def test_apply_mask_examples():
    g = ghz(4)
    assert np.allclose(apply_mask(g, EncodingMask.identity(4)), g)
    enc = apply_mask(g, EncodingMask.all_hadamard(4))
    even = [i for i in range(16) if bin(i).count("1") % 2 == 0]
    assert np.allclose(np.abs(enc[even]), 1 / (2 * np.sqrt(2)))
    assert np.allclose(np.delete(enc, even), 0)
    cl = apply_mask(linear_cluster(4), cluster_mask(4))
    expected = amplitudes({"0000": 1, "1100": 1, "0011": 1, "1111": -1}, 4) / 2
    assert same_state(cl, expected)


def test_apply_mask_is_involution(rng):
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    v /= np.linalg.norm(v)
    for bits in ("1001", "1111", "0110"):
        m = EncodingMask.from_bits(bits)
        assert np.max(np.abs(apply_mask(apply_mask(v, m), m) - v)) < 1e-12
    with pytest.raises(ValueError):
        apply_mask(v, EncodingMask.from_bits("101"))


def test_mask_unitary_matches_apply(rng):
    v = rng.normal(size=8) + 0j
    v /= np.linalg.norm(v)
    m = EncodingMask.from_bits("101")
    assert np.allclose(m.unitary() @ v, apply_mask(v, m))


def test_singlet_and_phase_unitary():
    s = singlet()
    assert np.allclose(s, amplitudes({"01": 1, "10": -1}, 2) / np.sqrt(2))
    assert abs(concurrence(np.outer(s, s.conj())) - 1) < 1e-12
    assert np.allclose(phase_unitary(0.0, 3), np.eye(8))
    plus = H[:, 0]
    for phi in (0.3, 1.1, 2.5):
        prob = abs(np.vdot(plus, phase_unitary(phi, 1) @ plus)) ** 2
        assert abs(prob - np.cos(phi / 2) ** 2) < 1e-12


def test_phase_convention_and_normalisation():
    for psi in (ghz(3), linear_cluster(4), basis_state("101"), singlet()):
        first = psi[np.flatnonzero(np.abs(psi) > 1e-12)[0]]
        assert first.real > 0 and abs(first.imag) < 1e-15
        assert abs(np.linalg.norm(psi) - 1) < 1e-12
    with pytest.raises(ValueError):
        as_state(np.array([1.0, 1.0]))
