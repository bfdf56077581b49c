"""Independent reference computations shared by unit and acceptance tests."""
import numpy as np

from dephase_lab.channels import apply_phase
from dephase_lab.metrics import fidelity
from dephase_lab.operators import I2, local_operator


def kraus_channel(rho, ps, pauli):
    """Sum over single-qubit Kraus pairs, qubit by qubit."""
    n = len(ps)
    for q, p in enumerate(ps, start=1):
        k0 = np.sqrt(1 - p / 2) * local_operator(I2, q, n)
        k1 = np.sqrt(p / 2) * local_operator(pauli, q, n)
        rho = k0 @ rho @ k0.conj().T + k1 @ rho @ k1.conj().T
    return rho


def bures_qfi(rho, delta=1e-4):
    """QFI under the collective phase from the fidelity of two nearby states."""
    f = fidelity(rho, apply_phase(rho, delta))
    return 8 * (1 - np.sqrt(f)) / delta ** 2


def verify_certificate(rho, k, value, cert):
    """Check primal feasibility, the reported objective and the dual bound."""
    d = rho.shape[0]
    assert np.linalg.eigvalsh(cert.blocks).min() >= -1e-9
    assert np.linalg.eigvalsh(cert.total(d) - rho).min() >= -1e-8
    for j in range(len(cert.supports)):
        s = cert.embedded(j, d)
        outside = np.ones(d, bool)
        outside[cert.supports[j]] = False
        assert np.abs(s[outside]).max(initial=0) < 1e-9 and np.abs(s[:, outside]).max(initial=0) < 1e-9
    assert abs(np.trace(cert.blocks, axis1=1, axis2=2).real.sum() - 1 - value) < 1e-12
    w = cert.witness
    assert np.linalg.eigvalsh(w).min() >= -1e-10
    subs = w[cert.supports[:, :, None], cert.supports[:, None, :]]
    assert np.linalg.eigvalsh(subs).max() <= 1 + 1e-10
    lower = np.trace(rho @ w).real - 1
    assert lower <= value + 1e-9
    assert value - lower <= 1e-6
