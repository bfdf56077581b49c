"""Dephasing, local-unitary conjugation and the encode/dephase/decode/phase pipeline."""
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import kernels
from .operators import as_operator, is_unitary, num_qubits
from .states import EncodingMask, as_state, phase_diagonal


@dataclass(frozen=True)
class NoiseSpec:
    """Dephasing strength per qubit; ``p = 0`` is noiseless, ``p = 1`` full dephasing."""

    p: tuple

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if not p:
            raise ValueError("noise spec needs at least one qubit")
        for x in p:
            if not 0.0 <= x <= 1.0 or not np.isfinite(x):
                raise ValueError(f"dephasing strength {x} outside [0, 1]")
        object.__setattr__(self, "p", p)

    @classmethod
    def uniform(cls, p: float, n: int) -> "NoiseSpec":
        return cls((p,) * n)

    @property
    def n(self) -> int:
        return len(self.p)


def damping_table(spec: NoiseSpec) -> np.ndarray:
    """``table[z] = prod_k (1 - p_k)`` over the qubits where ``z`` has a set bit."""
    n = spec.n
    table = np.ones(1 << n)
    for k, p in enumerate(spec.p):
        bit = 1 << (n - 1 - k)
        idx = np.arange(1 << n)
        table[(idx & bit) != 0] *= 1.0 - p
    return table


def dephase(rho, spec: Union[NoiseSpec, float]) -> np.ndarray:
    """Apply ``(1 - p/2) rho + (p/2) Z rho Z`` independently on every qubit.

    Implemented as element-wise damping: entry ``(x, y)`` is multiplied by
    ``(1 - p_k)`` for every qubit ``k`` on which ``x`` and ``y`` differ.
    """
    rho = as_operator(rho)
    n = num_qubits(rho.shape[0])
    if not isinstance(spec, NoiseSpec):
        spec = NoiseSpec.uniform(spec, n)
    if spec.n != n:
        raise ValueError(f"noise spec covers {spec.n} qubits, state has {n}")
    return kernels.damp(rho, damping_table(spec))


def conjugate(rho, u) -> np.ndarray:
    """``u rho u^dagger`` for a unitary ``u``."""
    rho = as_operator(rho)
    u = np.asarray(u, dtype=complex)
    if u.shape != rho.shape:
        raise ValueError(f"unitary shape {u.shape} does not match state {rho.shape}")
    if not is_unitary(u):
        raise ValueError("conjugating matrix is not unitary")
    return u @ rho @ u.conj().T


def apply_phase(rho, phi: float) -> np.ndarray:
    """Imprint ``U_phi`` on every qubit; diagonal, so applied element-wise."""
    rho = as_operator(rho)
    diag = phase_diagonal(phi, num_qubits(rho.shape[0]))
    return rho * np.outer(diag, diag.conj())


# pipeline stages -----------------------------------------------------------

@dataclass(frozen=True)
class Encode:
    mask: EncodingMask


@dataclass(frozen=True)
class Decode:
    mask: EncodingMask


@dataclass(frozen=True)
class Dephase:
    noise: Union[NoiseSpec, float]


@dataclass(frozen=True)
class Phase:
    phi: float


Stage = Union[Encode, Decode, Dephase, Phase]


class PipelineError(ValueError):
    pass


def canonical_pipeline(mask: EncodingMask, p: Union[NoiseSpec, float], phi: float = None) -> list:
    """encode -> dephase -> decode (-> phase). An identity mask skips the unitaries."""
    stages = [] if mask.is_identity() else [Encode(mask)]
    stages.append(Dephase(p))
    if not mask.is_identity():
        stages.append(Decode(mask))
    if phi is not None:
        stages.append(Phase(phi))
    return stages


def _check_masks(stages: Sequence[Stage]) -> None:
    open_masks = []
    for st in stages:
        if isinstance(st, Encode):
            open_masks.append(st.mask)
        elif isinstance(st, Decode):
            if not open_masks:
                raise PipelineError("decode stage without a preceding encode")
            enc = open_masks.pop()
            if enc != st.mask:
                raise PipelineError(f"decode mask {st.mask.bits} does not match encode mask {enc.bits}")


def run_pipeline(psi, stages: Sequence[Stage]) -> np.ndarray:
    """Apply ``stages`` left to right to the pure state ``psi``; returns a density matrix."""
    _check_masks(stages)
    if np.ndim(psi) == 1:
        psi = as_state(psi)
        rho = np.outer(psi, psi.conj())
    else:
        rho = as_operator(psi)
    n = num_qubits(rho.shape[0])
    for st in stages:
        if isinstance(st, (Encode, Decode)):
            if st.mask.n != n:
                raise PipelineError(f"mask has {st.mask.n} qubits, state has {n}")
            u = st.mask.unitary()
            # Hadamard masks are real and self-inverse: encode and decode coincide
            rho = u @ rho @ u
        elif isinstance(st, Dephase):
            rho = dephase(rho, st.noise)
        elif isinstance(st, Phase):
            rho = apply_phase(rho, st.phi)
        else:
            raise PipelineError(f"unknown stage {st!r}")
    return rho
