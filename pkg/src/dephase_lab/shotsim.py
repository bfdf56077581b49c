"""Finite-statistics simulation: Born probabilities, Poisson counts, Monte-Carlo intervals.

Random numbers come from numpy's Philox-4x64 counter-based generator. Every
task gets its own stream keyed by ``SeedSequence([seed, *task])``, so results
never depend on scheduling order.
"""
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import norm

from .operators import H, as_operator, kron

DEFAULT_RESAMPLES = 10_000
COMPLETENESS_TOL = 1e-10


def make_rng(seed: int, *task: int) -> np.random.Generator:
    """Independent Philox stream for ``(seed, *task)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, task)])))


def sigma_percentiles(level: int) -> tuple:
    """Two-sided percentile pair matching a ``level``-sigma normal interval (3 -> 0.135, 99.865)."""
    tail = 100.0 * norm.sf(level)
    return tail, 100.0 - tail


def product_basis(n: int, basis: str = "x") -> tuple:
    """Labels and rank-1 projectors of the ``2**n`` outcome product basis.

    ``basis="x"`` gives the ``|+>/|->`` basis, ``"z"`` the computational one.
    """
    if basis == "z":
        single = {"0": np.array([1, 0], dtype=complex), "1": np.array([0, 1], dtype=complex)}
    elif basis == "x":
        single = {"+": H[:, 0].copy(), "-": H[:, 1].copy()}
    else:
        raise ValueError(f"unknown basis {basis!r}")
    labels, projs = [], []
    for combo in product(single, repeat=n):
        v = kron(*[single[c][:, None] for c in combo])[:, 0] if n > 1 else single[combo[0]]
        labels.append("".join(combo))
        projs.append(np.outer(v, v.conj()))
    return labels, projs


def born_probabilities(rho, projectors: Sequence[np.ndarray]) -> np.ndarray:
    """``Tr[rho P_i]`` for a complete set of projectors."""
    rho = as_operator(rho)
    total = sum(np.asarray(p) for p in projectors)
    if np.max(np.abs(total - np.eye(rho.shape[0]))) > COMPLETENESS_TOL:
        raise ValueError("projectors do not resolve the identity")
    probs = np.array([np.real(np.sum(rho * np.asarray(p).T)) for p in projectors])
    probs[(probs < 0) & (probs > -COMPLETENESS_TOL)] = 0.0
    if np.any(probs < 0):
        raise ValueError("negative outcome probability; input is not a valid state")
    return probs


@dataclass(frozen=True)
class CountRecord:
    labels: tuple
    rates: np.ndarray
    counts: np.ndarray
    shots: int
    seed: int
    task: tuple = field(default=())

    def frequencies(self) -> np.ndarray:
        total = self.counts.sum()
        return self.counts / total if total else np.zeros(len(self.counts))


def sample_counts(probs, nu: int, seed: int, labels: Optional[Sequence[str]] = None,
                  task: Sequence[int] = ()) -> CountRecord:
    """Poisson counts with mean ``nu * p_i`` per outcome."""
    probs = np.array(probs, dtype=float)  # private copy; the input is never touched
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > COMPLETENESS_TOL:
        raise ValueError("probabilities must be non-negative and sum to one")
    rates = nu * probs
    counts = make_rng(seed, *task, 0).poisson(rates)
    if labels is None:
        labels = tuple(str(i) for i in range(len(probs)))
    return CountRecord(tuple(labels), rates, counts, int(nu), int(seed), tuple(task))


def frequency(index: int) -> Callable:
    """Statistic: normalised frequency of outcome ``index`` (vectorised over leading axes)."""
    def stat(counts):
        counts = np.asarray(counts, dtype=float)
        total = counts.sum(axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(total > 0, counts[..., index] / total, 0.0)
    return stat


@dataclass(frozen=True)
class ConfidenceInterval:
    center: float
    lower: float
    upper: float
    level: int

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper


def resample_statistic(statistic: Callable, record: CountRecord,
                       resamples: int = DEFAULT_RESAMPLES) -> np.ndarray:
    """``statistic`` evaluated on Poisson redraws around the observed counts.

    ``statistic`` maps a counts array of shape ``(..., K)`` to shape ``(...)``.
    """
    rng = make_rng(record.seed, *record.task, 1)
    draws = rng.poisson(record.counts, size=(resamples, len(record.counts)))
    return np.asarray(statistic(draws), dtype=float)


def mc_interval(statistic: Callable, record: CountRecord, resamples: int = DEFAULT_RESAMPLES,
                level: int = 3) -> ConfidenceInterval:
    """Percentile interval of ``statistic`` over Poisson resamples of the observed counts."""
    if level not in (1, 2, 3):
        raise ValueError("level must be 1, 2 or 3 sigma")
    if level == 3 and resamples < 1000:
        raise ValueError("3-sigma intervals need at least 1000 resamples")
    values = resample_statistic(statistic, record, resamples)
    lo_pct, hi_pct = sigma_percentiles(level)
    lower, upper = np.percentile(values, [lo_pct, hi_pct])
    center = float(statistic(record.counts))
    return ConfidenceInterval(center, float(min(lower, center)), float(max(upper, center)), level)
