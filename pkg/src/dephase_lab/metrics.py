"""Entanglement, purity, entropy, fidelity, concurrence and quantum Fisher information.

Also collects the analytic predictions for dephased GHZ states, bare and
Hadamard-encoded, that the numeric pipeline is checked against.
"""
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import bisect

from .operators import (
    Bipartition, Y, as_operator, check_hermitian, eigvalsh, hermitian_eig,
    matrix_sqrt, partial_transpose,
)

QFI_CUTOFF = 1e-12
ENTROPY_CUTOFF = 1e-15
ROUNDING_FLOOR = 1e-15


def negativity(rho, part: Bipartition) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose."""
    w = eigvalsh(partial_transpose(rho, part))
    return float(np.abs(w[w < 0]).sum())


def separability_threshold(rho_of_p, part: Bipartition, lo: float = 0.0, hi: float = 1.0,
                           xtol: float = 1e-15) -> float:
    """Noise strength where the partial transpose stops having negative eigenvalues.

    ``rho_of_p`` maps a noise strength to a state; the smallest partial-transpose
    eigenvalue must be negative at ``lo`` and positive at ``hi``.
    """
    def lowest(p):
        return eigvalsh(partial_transpose(rho_of_p(p), part))[0]

    if not lowest(lo) < 0 < lowest(hi):
        raise ValueError("no sign change of the lowest partial-transpose eigenvalue in [lo, hi]")
    return bisect(lowest, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


def purity(rho) -> float:
    rho = as_operator(rho)
    # Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def entropy_from_spectrum(w) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > ENTROPY_CUTOFF]
    return float(-np.sum(w * np.log2(w)) + 0.0)


def entropy(rho) -> float:
    """von Neumann entropy in bits."""
    return entropy_from_spectrum(eigvalsh(rho))


def fidelity(rho_e, rho_t) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho_t) rho_e sqrt(rho_t)))**2``.

    Evaluated as the squared nuclear norm of ``sqrt(rho_e) sqrt(rho_t)``, which
    equals the trace expression and is symmetric by construction.
    """
    rho_e, rho_t = as_operator(rho_e), as_operator(rho_t)
    if rho_e.shape != rho_t.shape:
        raise ValueError("fidelity needs states of equal dimension")
    # rounding noise on null eigenvalues would otherwise enter at its square root
    cut = ROUNDING_FLOOR * rho_e.shape[0]
    s = np.linalg.svd(matrix_sqrt(rho_e, cutoff=cut) @ matrix_sqrt(rho_t, cutoff=cut),
                      compute_uv=False)
    return float(min(1.0, s.sum() ** 2))


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state."""
    rho = as_operator(rho)
    if rho.shape != (4, 4):
        raise ValueError("concurrence is defined for two qubits only")
    yy = np.kron(Y, Y)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.linalg.eigvals(r).real, 0.0, None))
    lam = np.sort(lam)[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def qfi(rho, generator) -> float:
    """Quantum Fisher information of ``exp(-i phi G) rho exp(i phi G)`` at any phi.

    ``2 sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<i|G|j>|^2`` over pairs with
    ``l_i + l_j`` above the cutoff.
    """
    g = check_hermitian(generator)
    w, v = hermitian_eig(rho)
    w = np.clip(w, 0.0, None)
    gij = np.abs(v.conj().T @ g @ v) ** 2
    s = w[:, None] + w[None, :]
    diff = (w[:, None] - w[None, :]) ** 2
    mask = s > QFI_CUTOFF
    return float(2.0 * np.sum(diff[mask] / s[mask] * gij[mask]))


def qfi_diagonal_generator(rho, gdiag) -> float:
    """``qfi`` specialised to a generator diagonal in the computational basis."""
    w, v = hermitian_eig(rho)
    w = np.clip(w, 0.0, None)
    gij = np.abs((v.conj().T * np.asarray(gdiag)) @ v) ** 2
    s = w[:, None] + w[None, :]
    mask = s > QFI_CUTOFF
    return float(2.0 * np.sum(((w[:, None] - w[None, :]) ** 2)[mask] / s[mask] * gij[mask]))


@dataclass
class MetricReport:
    negativity: dict = field(default_factory=dict)
    purity: float = float("nan")
    entropy: float = float("nan")
    qfi: float = float("nan")
    fidelity_to_target: float = float("nan")


def metric_report(rho, partitions=(), generator=None, target=None) -> MetricReport:
    w = eigvalsh(rho)
    rep = MetricReport(
        negativity={p.label: negativity(rho, p) for p in partitions},
        purity=purity(rho),
        entropy=entropy_from_spectrum(w),
    )
    if generator is not None:
        rep.qfi = qfi(rho, generator)
    if target is not None:
        rep.fidelity_to_target = fidelity(rho, target)
    return rep


# closed forms ---------------------------------------------------------------

def bare_ghz_spectrum(n: int, p: float) -> np.ndarray:
    """Nonzero eigenvalues of the dephased GHZ state."""
    lam0 = 0.5 * (1 - (1 - p) ** n)
    return np.array([lam0, 1 - lam0])


def encoded_ghz_spectrum(n: int, p: float) -> np.ndarray:
    """Eigenvalues of the dephased encoded GHZ state, repeated by multiplicity ``C(n-1, k)``."""
    a, b = 1 - p / 2, p / 2
    out = []
    for k in range(n):
        lam = a ** (n - k) * b ** k + a ** k * b ** (n - k)
        out.extend([lam] * comb(n - 1, k))
    return np.array(out)


def bare_ghz_purity(n: int, p: float) -> float:
    return 0.5 * (1 + (1 - p) ** (2 * n))


def encoded_ghz_purity(n: int, p: float) -> float:
    return p ** n * (1 - p / 2) ** n + (1 - p + p * p / 2) ** n


def bare_ghz_qfi(n: int, p: float) -> float:
    return n * n * (1 - p) ** (2 * n)


def encoded_ghz_qfi(n: int, p: float) -> float:
    return n * n * (1 - p) ** 2 + 4 * n * (1 - p / 2) * (p / 2)


def bare_ghz_negativity(n: int, p: float) -> float:
    """Negativity of the dephased GHZ state; the same in every bipartition."""
    return 0.5 * (1 - p) ** n


@dataclass(frozen=True)
class ClosedForms:
    n: int
    p: float
    bare_eigenvalues: np.ndarray
    encoded_eigenvalues: np.ndarray
    bare_purity: float
    encoded_purity: float
    bare_entropy: float
    encoded_entropy: float
    bare_qfi: float
    encoded_qfi: float
    bare_negativity: float
    encoded_negativity_lower_bound: float
    shot_noise_limit: float
    heisenberg_limit: float


def closed_form_suite(n: int, p: float) -> ClosedForms:
    """Analytic values for bare and encoded dephased ``n``-qubit GHZ states.

    The encoded negativity has no closed form here; the two-qubit GHZ value is
    reported as its lower bound.
    """
    if n < 2:
        raise ValueError("closed forms need n >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p = {p} outside [0, 1]")
    bare_w = bare_ghz_spectrum(n, p)
    enc_w = encoded_ghz_spectrum(n, p)
    return ClosedForms(
        n=n,
        p=p,
        bare_eigenvalues=bare_w,
        encoded_eigenvalues=enc_w,
        bare_purity=bare_ghz_purity(n, p),
        encoded_purity=encoded_ghz_purity(n, p),
        bare_entropy=entropy_from_spectrum(bare_w),
        encoded_entropy=entropy_from_spectrum(enc_w),
        bare_qfi=bare_ghz_qfi(n, p),
        encoded_qfi=encoded_ghz_qfi(n, p),
        bare_negativity=bare_ghz_negativity(n, p),
        encoded_negativity_lower_bound=bare_ghz_negativity(2, p),
        shot_noise_limit=float(n),
        heisenberg_limit=float(n * n),
    )
