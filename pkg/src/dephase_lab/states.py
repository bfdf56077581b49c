"""Pure states, graph states and Hadamard encoding masks.

States are normalised 1-D complex arrays. Constructors fix the global phase so
that the first nonzero amplitude is real and positive.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .operators import H, I2, kron, num_qubits, popcount, z_weights

NORM_TOL = 1e-12


def _fix_phase(psi: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(psi) > 1e-14)
    if nz.size:
        psi = psi * (abs(psi[nz[0]]) / psi[nz[0]])
    return psi


def as_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("state vector must be 1-D")
    num_qubits(psi.shape[0])
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state not normalised (norm {norm!r})")
    return psi


def same_state(a, b, tol: float = 1e-10) -> bool:
    """Equality up to a global phase."""
    return abs(abs(np.vdot(a, b)) - 1.0) <= tol


def basis_state(bits: str) -> np.ndarray:
    """Computational basis state from a bitstring such as ``"0110"`` (qubit 1 first)."""
    n = len(bits)
    psi = np.zeros(1 << n, dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def plus_state(n: int) -> np.ndarray:
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)


def ghz(n: int) -> np.ndarray:
    """(|0...0> + |1...1>)/sqrt(2)."""
    if n < 2:
        raise ValueError("GHZ state needs n >= 2")
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def singlet() -> np.ndarray:
    """(|01> - |10>)/sqrt(2)."""
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class GraphSpec:
    n_qubits: int
    edges: frozenset

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("graph needs at least one qubit")
        seen = set()
        for e in self.edges:
            i, j = sorted(e)
            if i == j:
                raise ValueError(f"self-loop on qubit {i}")
            if i < 1 or j > self.n_qubits:
                raise ValueError(f"edge {e} outside 1..{self.n_qubits}")
            seen.add((i, j))
        object.__setattr__(self, "edges", frozenset(frozenset(e) for e in seen))

    @classmethod
    def from_edges(cls, n_qubits: int, edges: Iterable[Sequence[int]]) -> "GraphSpec":
        edges = list(edges)
        norm = {tuple(sorted(e)) for e in edges}
        if len(norm) != len(edges):
            raise ValueError("duplicate edge in graph specification")
        return cls(n_qubits, frozenset(frozenset(e) for e in norm))

    @classmethod
    def path(cls, n: int) -> "GraphSpec":
        return cls.from_edges(n, [(i, i + 1) for i in range(1, n)])

    def sorted_edges(self) -> list:
        return sorted(tuple(sorted(e)) for e in self.edges)


def parse_edge_list(text: str) -> GraphSpec:
    """Parse an edge list: first line ``n_qubits``, then one ``i j`` pair per line.

    Blank lines and ``#`` comments are ignored.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty graph file")
    n = int(lines[0])
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return GraphSpec.from_edges(n, edges)


def read_graph(path) -> GraphSpec:
    return parse_edge_list(Path(path).read_text())


def graph_state(g: GraphSpec) -> np.ndarray:
    """Apply CZ on every edge to |+>^n.

    CZ gates are diagonal, so the amplitude of basis state x is
    ``2**(-n/2) * (-1)**(number of edges with both endpoints set)``.
    """
    n = g.n_qubits
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> (n - np.arange(1, n + 1))[None, :]) & 1
    parity = np.zeros(1 << n, dtype=np.int64)
    for i, j in g.sorted_edges():
        parity += bits[:, i - 1] & bits[:, j - 1]
    return (2.0 ** (-n / 2)) * (1 - 2 * (parity % 2)).astype(complex)


def linear_cluster(n: int = 4) -> np.ndarray:
    return graph_state(GraphSpec.path(n))


@dataclass(frozen=True)
class EncodingMask:
    """Per-qubit choice of identity (False) or Hadamard (True)."""

    hadamard: tuple

    def __post_init__(self):
        object.__setattr__(self, "hadamard", tuple(bool(h) for h in self.hadamard))
        if not self.hadamard:
            raise ValueError("mask must cover at least one qubit")

    @classmethod
    def from_bits(cls, bits: str) -> "EncodingMask":
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"mask must be a bitstring, got {bits!r}")
        return cls(tuple(c == "1" for c in bits))

    @classmethod
    def all_hadamard(cls, n: int) -> "EncodingMask":
        return cls((True,) * n)

    @classmethod
    def identity(cls, n: int) -> "EncodingMask":
        return cls((False,) * n)

    @property
    def n(self) -> int:
        return len(self.hadamard)

    @property
    def bits(self) -> str:
        return "".join("1" if h else "0" for h in self.hadamard)

    def is_identity(self) -> bool:
        return not any(self.hadamard)

    def unitary(self) -> np.ndarray:
        return kron(*[H if h else I2 for h in self.hadamard])


def cluster_mask(n: int = 4) -> EncodingMask:
    """Hadamards on the two end qubits of the linear cluster (H, 1, ..., 1, H)."""
    return EncodingMask(tuple(q in (0, n - 1) for q in range(n)))


def apply_mask(psi, mask: EncodingMask) -> np.ndarray:
    psi = as_state(psi)
    if num_qubits(psi.shape[0]) != mask.n:
        raise ValueError(f"mask has {mask.n} qubits, state has {num_qubits(psi.shape[0])}")
    n = mask.n
    t = psi.reshape((2,) * n)
    for q, h in enumerate(mask.hadamard):
        if h:
            t = np.moveaxis(np.tensordot(H, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def phase_unitary(phi: float, n: int) -> np.ndarray:
    """``U_phi^{(x)n}`` with ``U_phi = exp(-i phi Z / 2)`` (diagonal, dense)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.diag(phase_diagonal(phi, n))


def phase_diagonal(phi: float, n: int) -> np.ndarray:
    return np.exp(-0.5j * phi * z_weights(n))


def hamming_weights(n: int) -> np.ndarray:
    return popcount(np.arange(1 << n))
