import numpy as np
import pytest

from conftest import random_density, random_pure
from oracles import bures_qfi
from dephase_lab.channels import canonical_pipeline, dephase, run_pipeline
from dephase_lab.families import make_family
from dephase_lab.metrics import (
    closed_form_suite, concurrence, entropy, fidelity, metric_report, negativity, purity, qfi,
    qfi_diagonal_generator, separability_threshold,
)
from dephase_lab.operators import Bipartition, all_bipartitions, collective_z, kron, z_weights
from dephase_lab.states import EncodingMask, basis_state, ghz, plus_state, singlet

P_GRID = np.round(np.linspace(0, 1, 11), 12)


def bare(n, p):
    g = ghz(n)
    return dephase(np.outer(g, g), p)


def encoded(n, p):
    return run_pipeline(ghz(n), canonical_pipeline(EncodingMask.all_hadamard(n), p))


def proj(psi):
    return np.outer(psi, psi.conj())


def test_negativity_examples():
    prod = kron(proj(plus_state(2)), proj(basis_state("01")))
    assert all(negativity(prod, b) < 1e-14 for b in all_bipartitions(4))
    assert abs(negativity(proj(ghz(4)), Bipartition(4, (1,))) - 0.5) < 1e-12
    for p in P_GRID:
        for b in all_bipartitions(4):
            assert abs(negativity(bare(4, p), b) - (1 - p) ** 4 / 2) < 1e-12


def test_negativity_decay_bound():
    for n in (2, 3, 5):
        e0 = negativity(bare(n, 0), Bipartition(n, (1,)))
        for p in P_GRID:
            assert negativity(bare(n, p), Bipartition(n, (1,))) <= (1 - p) ** n * e0 + 1e-10


def test_encoded_negativity_at_least_two_qubit_value():
    for n in (3, 4, 5):
        for p in P_GRID:
            floor = closed_form_suite(n, p).encoded_negativity_lower_bound
            rho = encoded(n, p)
            for b in all_bipartitions(n):
                if len(b.side_a) == 1:
                    assert negativity(rho, b) >= floor - 1e-10


def test_two_vs_two_partitions_favour_encoding():
    for p in P_GRID:
        for b in all_bipartitions(4)[4:]:
            assert negativity(encoded(4, p), b) >= negativity(bare(4, p), b) - 1e-12


def test_purity_and_entropy_examples(rng):
    psi = random_pure(3, rng)
    assert abs(purity(proj(psi)) - 1) < 1e-12
    assert abs(entropy(proj(psi))) < 1e-10
    for n in (2, 4, 6):
        for p in P_GRID:
            assert abs(purity(bare(n, p)) - (1 + (1 - p) ** (2 * n)) / 2) < 1e-12
            expected = p ** n * (1 - p / 2) ** n + (1 - p + p * p / 2) ** n
            assert abs(purity(encoded(n, p)) - expected) < 1e-12
        assert abs(purity(encoded(n, 1.0)) - 2.0 ** (1 - n)) < 1e-12
        assert abs(entropy(encoded(n, 1.0)) - (n - 1)) < 1e-10


def test_encoded_state_is_more_mixed():
    for p in P_GRID[1:-1]:
        assert entropy(encoded(4, p)) > entropy(bare(4, p))


def test_fidelity(rng):
    rho = random_density(2, rng)
    assert abs(fidelity(rho, rho) - 1) < 1e-10
    a, b = basis_state("00"), basis_state("11")
    assert fidelity(proj(a), proj(b)) < 1e-12
    for _ in range(5):
        sigma = random_density(2, rng)
        t = random_pure(2, rng)
        assert abs(fidelity(sigma, proj(t)) - np.vdot(t, sigma @ t).real) < 1e-10
        other = random_density(2, rng, rank=2)
        assert abs(fidelity(sigma, other) - fidelity(other, sigma)) < 1e-9
        assert 0 <= fidelity(sigma, other) <= 1


def test_concurrence():
    assert abs(concurrence(proj(singlet())) - 1) < 1e-12
    assert concurrence(proj(basis_state("01"))) < 1e-12
    for p in P_GRID:
        assert abs(concurrence(bare(2, p)) - (1 - p) ** 2) < 1e-12
    with pytest.raises(ValueError):
        concurrence(np.eye(8) / 8)


def test_qfi_examples():
    g = collective_z(4)
    assert abs(qfi(proj(ghz(4)), g) - 16) < 1e-10
    assert abs(qfi(proj(plus_state(4)), g) - 4) < 1e-10
    for n in (2, 3, 4):
        gd = 0.5 * z_weights(n)
        for p in P_GRID:
            assert abs(qfi_diagonal_generator(bare(n, p), gd) - n * n * (1 - p) ** (2 * n)) < 1e-9
            expected = n * n * (1 - p) ** 2 + 4 * n * (1 - p / 2) * (p / 2)
            assert abs(qfi_diagonal_generator(encoded(n, p), gd) - expected) < 1e-9
        assert abs(qfi_diagonal_generator(encoded(n, 1.0), gd) - n) < 1e-9
    with pytest.raises(ValueError):
        qfi(np.eye(4) / 4, np.array([[0, 1], [0, 0]] * 2).reshape(4, 2)[:, [0, 1, 0, 1]])


def test_qfi_dense_and_diagonal_paths_agree(rng):
    rho = random_density(3, rng)
    assert abs(qfi(rho, collective_z(3)) - qfi_diagonal_generator(rho, 0.5 * z_weights(3))) < 1e-10


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_qfi_matches_bures_finite_difference(seed):
    rng = np.random.default_rng(seed)
    rho = 0.5 * random_density(3, rng, rank=2) + 0.5 * np.eye(8) / 8
    rho = 0.3 * rho + 0.7 * proj(ghz(3))  # keeps full rank but adds phase sensitivity
    bures = bures_qfi(rho)
    exact = qfi(rho, collective_z(3))
    assert abs(bures - exact) <= 1e-3 * exact


def test_closed_form_suite_examples():
    c = closed_form_suite(4, 0.0)
    assert (c.bare_purity, c.bare_qfi, c.bare_negativity) == (1.0, 16.0, 0.5)
    c = closed_form_suite(4, 1.0)
    assert c.bare_purity == 0.5 and abs(c.bare_entropy - 1) < 1e-12 and c.bare_qfi == 0
    assert c.encoded_purity == 0.125 and abs(c.encoded_entropy - 3) < 1e-12 and c.encoded_qfi == 4
    assert abs(c.encoded_eigenvalues.sum() - 1) < 1e-12
    with pytest.raises(ValueError):
        closed_form_suite(1, 0.2)
    with pytest.raises(ValueError):
        closed_form_suite(3, 1.5)


def test_metric_report_consistency(rng):
    rep = metric_report(proj(ghz(3)), all_bipartitions(3), collective_z(3), proj(ghz(3)))
    assert abs(rep.purity - 1) < 1e-8 and abs(rep.entropy) < 1e-8
    assert abs(rep.qfi - 9) < 1e-9 and abs(rep.fidelity_to_target - 1) < 1e-9
    mixed = metric_report(random_density(3, rng))
    assert mixed.purity < 1 - 1e-8 and mixed.entropy > 1e-8
    assert 2 ** -3 <= mixed.purity <= 1 and 0 <= mixed.entropy <= 3


def test_separability_threshold():
    fam = make_family("cluster", 4)
    part = Bipartition(4, (1,))
    p_star = separability_threshold(fam.rho, part)
    assert abs(p_star - (2 - np.sqrt(2))) < 1e-12
    assert negativity(fam.rho(p_star - 1e-6), part) > 0
    assert negativity(fam.rho(min(1.0, p_star + 1e-9)), part) == 0
    with pytest.raises(ValueError):
        separability_threshold(make_family("cluster_encoded", 4).rho, part)
