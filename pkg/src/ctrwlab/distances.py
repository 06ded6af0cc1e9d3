"""Empirical-law distances used by the comparison harness."""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def ks_two_sample(a, b) -> float:
    """sup |ECDF_a - ECDF_b| by merge scan; always in [0, 1]."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise DomainError("ks_two_sample needs nonempty samples")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / len(a)
    cdf_b = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_critical_value(n: int, m: int, confidence: float = 0.99) -> float:
    """Asymptotic two-sample KS threshold at the given confidence."""
    coeffs = {0.90: 1.224, 0.95: 1.358, 0.99: 1.628}
    if confidence not in coeffs:
        raise DomainError(f"confidence must be one of {sorted(coeffs)}")
    return coeffs[confidence] * np.sqrt((n + m) / (n * m))


def wasserstein1(a, b) -> float:
    """Mean absolute difference of order statistics (equal sizes), or of
    matched quantiles when the sizes differ."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise DomainError("wasserstein1 needs nonempty samples")
    if len(a) == len(b):
        return float(np.mean(np.abs(a - b)))
    m = max(len(a), len(b))
    probs = (np.arange(m) + 0.5) / m
    qa = np.quantile(a, probs)
    qb = np.quantile(b, probs)
    return float(np.mean(np.abs(qa - qb)))
