"""Empirical CDFs and Kolmogorov-Smirnov distances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True, eq=False)
class Ecdf:
    sorted_values: np.ndarray
    size: int

    def __post_init__(self) -> None:
        if self.size != len(self.sorted_values):
            raise ValueError("size does not match the number of values")

    def __call__(self, x):
        return ecdf_eval(self, x)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ecdf):
            return NotImplemented
        return self.size == other.size and np.array_equal(self.sorted_values, other.sorted_values)


def build_ecdf(values) -> Ecdf:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("cannot build an ECDF from an empty sample")
    if not np.all(np.isfinite(arr)):
        raise ValueError("ECDF input contains non-finite values")
    arr = np.sort(arr, kind="stable")
    arr.flags.writeable = False
    return Ecdf(arr, int(arr.size))


def ecdf_eval(e: Ecdf, x):
    """Right-continuous ``#{values <= x} / size``; scalar in, scalar out."""
    out = np.searchsorted(e.sorted_values, x, side="right") / e.size
    return float(out) if np.ndim(out) == 0 else out


def _cdf_at(cdf: Callable, xs: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(cdf(xs), dtype=np.float64)
        if out.shape == xs.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(cdf(float(x))) for x in xs])


def ks_one_sample(e: Ecdf, cdf: Callable) -> float:
    """Exact ``sup |F_N - F|``, checked on both sides of every jump.

    ``cdf`` may be vectorised; a scalar-only callable is evaluated point by point.
    """
    xs = e.sorted_values
    f = _cdf_at(cdf, xs)
    k = np.arange(1, e.size + 1)
    d_plus = k / e.size - f
    d_minus = f - (k - 1) / e.size
    return float(max(d_plus.max(), d_minus.max(), 0.0))


def ks_two_sample(a: Ecdf, b: Ecdf) -> float:
    support = np.concatenate([a.sorted_values, b.sorted_values])
    fa = np.searchsorted(a.sorted_values, support, side="right") / a.size
    fb = np.searchsorted(b.sorted_values, support, side="right") / b.size
    return float(np.abs(fa - fb).max())


def ks_critical_value(alpha: float, n_a: int, n_b: int | None = None) -> float:
    """Asymptotic Kolmogorov critical value ``c(alpha) * sqrt(...)``.

    ``c(alpha) = sqrt(-log(alpha / 2) / 2)``, which is 1.95 at ``alpha = 0.001``.
    With ``n_b`` omitted this is the one-sample value ``c / sqrt(n_a)``.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    if n_b is None:
        return c / math.sqrt(n_a)
    return c * math.sqrt((n_a + n_b) / (n_a * n_b))
