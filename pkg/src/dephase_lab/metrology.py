"""Noisy phase estimation: fringes, error-propagation variance and QFI sweeps.

The estimator is the probability of finding every qubit in ``|+>`` after the
phase ``U_phi = exp(-i phi Z/2)`` has been imprinted on each qubit.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import metrics
from .channels import apply_phase
from .families import Family, make_family
from .operators import z_weights

DERIVATIVE_STEP = 1e-3
FLAT_SLOPE = 1e-12


def _as_family(family) -> Family:
    return make_family(family) if isinstance(family, str) else family


@dataclass
class FringeCurve:
    phi_grid: np.ndarray
    expectation: np.ndarray
    p: float
    family: Family


@dataclass
class VarianceReport:
    phi_star: float
    var_phi: float
    shots: int
    expectation: float
    slope: float
    qfi: float

    @property
    def cramer_rao_bound(self) -> float:
        return np.inf if self.qfi <= 0 else 1.0 / (self.shots * self.qfi)


def all_plus_expectation(rho) -> float:
    """``<+...+| rho |+...+>``: the mean of all matrix elements."""
    return float(np.real(rho.sum()) / rho.shape[0])


def fringe_values(family, p: float, phis) -> np.ndarray:
    family = _as_family(family)
    rho = family.rho(p)
    return np.array([all_plus_expectation(apply_phase(rho, phi)) for phi in np.atleast_1d(phis)])


def fringe(family, p: float, phi_grid) -> FringeCurve:
    """Expectation of the all-plus projector along ``phi_grid``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p = {p} outside [0, 1]")
    family = _as_family(family)
    phi_grid = np.asarray(phi_grid, dtype=float)
    return FringeCurve(phi_grid, fringe_values(family, p, phi_grid), p, family)


# closed forms -------------------------------------------------------------------

def bare_ghz_fringe(n: int, p: float, phi):
    return (1.0 + (1.0 - p) ** n * np.cos(n * np.asarray(phi))) / 2 ** n


def bare_ghz_fringe_slope(n: int, p: float, phi):
    return -n * (1.0 - p) ** n * np.sin(n * np.asarray(phi)) / 2 ** n


def encoded_ghz4_full_dephasing_fringe(phi):
    phi = np.asarray(phi)
    return (4 * np.cos(2 * phi) + np.cos(4 * phi) + 11) / 128


def encoded_ghz4_full_dephasing_slope(phi):
    phi = np.asarray(phi)
    return -(8 * np.sin(2 * phi) + 4 * np.sin(4 * phi)) / 128


def closed_form_fringe(family: Family, p: float):
    """``(value, slope)`` callables when an analytic fringe is known, else ``None``."""
    if family.base == "ghz" and (not family.encoded or p == 0.0):
        # without noise decoding undoes the encoding exactly
        n = family.n
        return (lambda phi: bare_ghz_fringe(n, p, phi),
                lambda phi: bare_ghz_fringe_slope(n, p, phi))
    if (family.base == "ghz" and family.n == 4 and p == 1.0
            and family.mask.hadamard == (True,) * 4):
        return encoded_ghz4_full_dephasing_fringe, encoded_ghz4_full_dephasing_slope
    return None


def fringe_slope(family, p: float, phi, h: float = DERIVATIVE_STEP, analytic: bool = False):
    """d(expectation)/d(phi): central difference, or the closed form when ``analytic``."""
    family = _as_family(family)
    if analytic:
        cf = closed_form_fringe(family, p)
        if cf is None:
            raise ValueError(f"no closed-form fringe for {family.name} at p={p}")
        return cf[1](phi)
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    up = fringe_values(family, p, phi + h)
    down = fringe_values(family, p, phi - h)
    return (up - down) / (2 * h)


def phase_variance(curve: FringeCurve, nu: int, h: float = DERIVATIVE_STEP) -> VarianceReport:
    """Error-propagation variance ``eps (1 - eps) / nu / slope**2`` at the steepest point.

    Every local maximum of the slope on the grid is refined by a bounded 1-D
    search within one grid step; among equally steep points the smallest
    phase wins. Flat fringes give an infinite variance.
    """
    if nu < 1:
        raise ValueError("number of shots must be positive")
    family, p = curve.family, curve.p
    grid = curve.phi_grid
    qfi_value = family_qfi(family, p)
    slopes = np.abs(fringe_slope(family, p, grid, h))
    top = slopes.max()
    if top <= FLAT_SLOPE:
        phi_star = float(grid[0])
        eps = float(fringe_values(family, p, phi_star)[0])
        return VarianceReport(phi_star, np.inf, nu, eps, 0.0, qfi_value)
    step = float(np.min(np.diff(grid))) if grid.size > 1 else h
    padded = np.concatenate([[-np.inf], slopes, [-np.inf]])
    peaks = np.flatnonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]))
    candidates = []
    for i in peaks:
        if slopes[i] < 0.5 * top:
            continue
        res = minimize_scalar(lambda x: -abs(fringe_slope(family, p, x, h)[0]),
                              bounds=(grid[i] - step, grid[i] + step), method="bounded",
                              options={"xatol": 1e-10})
        if -res.fun > slopes[i]:
            candidates.append((float(res.x), -float(res.fun)))
        else:
            candidates.append((float(grid[i]), float(slopes[i])))
    best = max(c[1] for c in candidates)
    # periodic copies of the steepest point tie; keep the smallest phase
    phi_star = min(c[0] for c in candidates if c[1] >= best * (1 - 1e-7))
    cf = closed_form_fringe(family, p)
    if cf is not None:
        slope = float(cf[1](phi_star))
    else:
        slope = float(fringe_slope(family, p, phi_star, h)[0])
    eps = float(fringe_values(family, p, phi_star)[0])
    var = eps * (1 - eps) / nu / slope ** 2 if abs(slope) > FLAT_SLOPE else np.inf
    return VarianceReport(phi_star, var, nu, eps, slope, qfi_value)


# Fisher information --------------------------------------------------------------

def family_qfi(family, p: float) -> float:
    """QFI of the family's output state for the generator ``1/2 sum_k Z_k``."""
    family = _as_family(family)
    return metrics.qfi_diagonal_generator(family.rho(p), 0.5 * z_weights(family.n))


def closed_form_qfi(family: Family, p: float) -> Optional[float]:
    n = family.n
    if family.base == "ghz":
        if not family.encoded:
            return metrics.bare_ghz_qfi(n, p)
        if family.mask.hadamard == (True,) * n:
            return metrics.encoded_ghz_qfi(n, p)
    if family.base == "product":
        if not family.encoded:
            return n * (1 - p) ** 2
        if family.mask.hadamard == (True,) * n:
            return float(n)
    return None


def qfi_sweep(family, n_range: Sequence[int], p_grid: Sequence[float]) -> list:
    """Rows of ``n, p, qfi, qfi_closed, snl, hl`` for every grid point."""
    family = _as_family(family)
    rows = []
    for n in n_range:
        if n > 10:
            raise ValueError("dense simulation is limited to n <= 10")
        fam = family if n == family.n else make_family(family.name, n)
        for p in p_grid:
            rows.append({
                "n": n,
                "p": float(p),
                "qfi": family_qfi(fam, p),
                "qfi_closed": closed_form_qfi(fam, p),
                "snl": float(n),
                "hl": float(n * n),
            })
    return rows


def snl_crossover(family, n: Optional[int] = None, samples: int = 401) -> Optional[float]:
    """Smallest noise strength where the QFI falls to the shot-noise limit ``n``.

    Returns ``None`` when the QFI stays strictly above the limit on ``[0, 1)``.
    """
    family = _as_family(family)
    if n is not None and n != family.n:
        family = make_family(family.name, n)
    n = family.n
    f = lambda p: family_qfi(family, p) - n  # noqa: E731
    grid = np.linspace(0.0, 1.0, samples)
    vals = np.array([f(p) for p in grid])
    for i in range(len(grid) - 1):
        if vals[i] > 0 and vals[i + 1] <= 0:
            if i + 1 == len(grid) - 1 and vals[i + 1] > -1e-9:
                # touching the limit only at full dephasing is not a crossing
                return None
            return brentq(f, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-14)
    return None
