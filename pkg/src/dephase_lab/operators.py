"""Dense multi-qubit linear algebra.

Operators are plain ``numpy`` complex arrays of shape ``(2**N, 2**N)``. Qubits
are labelled ``1..N`` and qubit 1 is the most significant bit of the
computational-basis index, so ``kron(a, b)`` places ``a`` on qubit 1.
"""
from dataclasses import dataclass
from functools import reduce
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


def num_qubits(dim: int) -> int:
    """Number of qubits for a Hilbert space dimension; raises if not ``2**N``."""
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


def as_operator(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be square, got shape {a.shape}")
    num_qubits(a.shape[0])
    if not np.all(np.isfinite(a)):
        raise ValueError("operator has non-finite entries")
    return a


def kron(*ops) -> np.ndarray:
    """Kronecker product with the leftmost factor on the most significant qubit."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    for op in ops:
        num_qubits(np.shape(op)[0])
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in ops))


def local_operator(single: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Embed a 2x2 operator acting on ``qubit`` (1-based) into ``n`` qubits."""
    if not 1 <= qubit <= n:
        raise ValueError(f"qubit {qubit} out of range 1..{n}")
    return kron(*[single if q == qubit else I2 for q in range(1, n + 1)])


def collective_z(n: int) -> np.ndarray:
    """Phase generator ``G = 1/2 sum_k Z_k`` (diagonal, dense)."""
    return np.diag(0.5 * z_weights(n)).astype(complex)


def z_weights(n: int) -> np.ndarray:
    """Eigenvalues of ``sum_k Z_k`` on each basis index, i.e. ``n - 2*popcount``."""
    return n - 2 * popcount(np.arange(1 << n))


def popcount(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    out = np.zeros_like(x)
    while np.any(x):
        out += x & 1
        x = x >> 1
    return out


@dataclass(frozen=True)
class Bipartition:
    """Split of qubits ``1..n`` into ``side_a`` and its complement ``side_b``."""

    n: int
    side_a: tuple

    def __post_init__(self):
        a = tuple(sorted(set(int(q) for q in self.side_a)))
        if len(a) != len(self.side_a):
            raise ValueError(f"duplicate qubit in {self.side_a}")
        if not a or len(a) >= self.n:
            raise ValueError("side_a must be a non-empty proper subset")
        if a[0] < 1 or a[-1] > self.n:
            raise ValueError(f"qubit index out of range 1..{self.n}: {a}")
        object.__setattr__(self, "side_a", a)

    @property
    def side_b(self) -> tuple:
        return tuple(q for q in range(1, self.n + 1) if q not in self.side_a)

    @property
    def label(self) -> str:
        return "".join(map(str, self.side_a)) + "v" + "".join(map(str, self.side_b))

    @classmethod
    def parse(cls, text: str, n: int) -> "Bipartition":
        """Parse ``"1v234"`` / ``"1|234"`` style labels (single-digit qubits)."""
        text = text.strip().replace("|", "v")
        a, _, b = text.partition("v")
        if not a.isdigit() or (b and not b.isdigit()):
            raise ValueError(f"bad bipartition label {text!r}")
        part = cls(n, tuple(int(c) for c in a))
        if b and tuple(sorted(int(c) for c in b)) != part.side_b:
            raise ValueError(f"{text!r} is not a bipartition of {n} qubits")
        return part


def all_bipartitions(n: int) -> list:
    """Inequivalent bipartitions, smaller side first; halves keep qubit 1 in ``side_a``.

    For four qubits this gives 1v234, 2v134, 3v124, 4v123, 12v34, 13v24, 14v23.
    """
    out = []
    for size in range(1, n // 2 + 1):
        for a in combinations(range(1, n + 1), size):
            if 2 * size == n and a[0] != 1:
                continue
            out.append(Bipartition(n, a))
    return out


def partial_transpose(rho, part: Bipartition) -> np.ndarray:
    """Transpose the qubits of ``part.side_a``."""
    rho = as_operator(rho)
    n = num_qubits(rho.shape[0])
    if part.n != n:
        raise ValueError(f"bipartition is for {part.n} qubits, state has {n}")
    t = rho.reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for q in part.side_a:
        axes[q - 1], axes[n + q - 1] = axes[n + q - 1], axes[q - 1]
    return t.transpose(axes).reshape(rho.shape)


def partial_trace(rho, keep: Iterable[int]) -> np.ndarray:
    """Reduced operator on the qubits in ``keep`` (1-based, returned in ascending order)."""
    rho = as_operator(rho)
    n = num_qubits(rho.shape[0])
    keep = sorted(set(int(q) for q in keep))
    if not keep:
        raise ValueError("keep set must be non-empty")
    if keep[0] < 1 or keep[-1] > n:
        raise ValueError(f"qubit index out of range 1..{n}: {keep}")
    traced = [q - 1 for q in range(1, n + 1) if q not in keep]
    t = rho.reshape((2,) * (2 * n))
    # trace the highest axes first so the remaining indices stay valid
    for k, q in enumerate(sorted(traced, reverse=True)):
        cur = n - k
        t = np.trace(t, axis1=q, axis2=q + cur)
    m = 1 << len(keep)
    return t.reshape(m, m)


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = as_operator(a)
    dev = np.max(np.abs(a - a.conj().T))
    if dev > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {dev:.3g})")
    return a


def hermitian_eig(a) -> HermitianEig:
    """Ascending eigenvalues and orthonormal eigenvector columns (LAPACK ``heevd``)."""
    a = check_hermitian(a)
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    return HermitianEig(w, v)


def eigvalsh(a) -> np.ndarray:
    a = check_hermitian(a)
    return np.linalg.eigvalsh(0.5 * (a + a.conj().T))


def _psd_spectrum(a, tol: float):
    w, v = hermitian_eig(a)
    if w[0] < -tol:
        raise NotPSDError(f"matrix has eigenvalue {w[0]:.3g} below -{tol:g}")
    return np.clip(w, 0.0, None), v


def matrix_function(a, fn, tol: float = PSD_TOL) -> np.ndarray:
    """Apply ``fn`` to the clipped spectrum of a Hermitian PSD matrix."""
    w, v = _psd_spectrum(a, tol)
    return (v * fn(w)) @ v.conj().T


def matrix_sqrt(a, tol: float = PSD_TOL, cutoff: float = 0.0) -> np.ndarray:
    """PSD square root; eigenvalues at or below ``cutoff`` are treated as exact zeros."""
    w, v = _psd_spectrum(a, tol)
    return (v * np.where(w > cutoff, np.sqrt(w), 0.0)) @ v.conj().T


def matrix_log2(a, tol: float = PSD_TOL, cutoff: float = 0.0) -> np.ndarray:
    """Base-2 logarithm on the support of ``a``; the kernel maps to zero."""
    w, v = _psd_spectrum(a, tol)
    logw = np.zeros_like(w)
    support = w > cutoff
    logw[support] = np.log2(w[support])
    return (v * logw) @ v.conj().T


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return bool(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) <= tol)


def projector(vec: Sequence[complex]) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())
