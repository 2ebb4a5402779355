"""Scalar special functions and exact integer-parameter CDFs.

Everything here is a pure function of its arguments. The digamma, trigamma
and log-gamma routines use upward recurrence into the asymptotic regime
followed by a Bernoulli-number expansion, which keeps the absolute error
near machine precision for every positive argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.57721566490153286061

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Bernoulli-series coefficients, lowest order first, in powers of 1/x^2.
_DIGAMMA_ASYMP = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)
_TRIGAMMA_ASYMP = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)
_LGAMMA_ASYMP = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)

# Below this, log-gamma of an integer is taken from the exact factorial.
_EXACT_FACTORIAL_MAX = 170
# Integer gamma ratios with at most this many factors use an exact product.
_EXACT_RATIO_SPAN = 256
# Above this, e^{-y} underflows and the Poisson sum moves to log space.
_LOG_SPACE_Y = 700.0


class DomainError(ValueError):
    """Raised when an argument lies outside a function's domain."""


@dataclass(frozen=True)
class AccuracyConfig:
    abs_tol: float = 1e-12
    series_switch: float = 20.0

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.series_switch >= 1:
            raise DomainError(f"series_switch must be >= 1, got {self.series_switch}")


DEFAULT_ACCURACY = AccuracyConfig()


def _check_positive(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"{name} must be positive and finite, got {x}")
    return x


def _horner(coeffs: tuple[float, ...], z: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _is_int(x: float) -> bool:
    return float(x).is_integer()


def digamma(x: float, config: AccuracyConfig = DEFAULT_ACCURACY) -> float:
    """Logarithmic derivative of the Gamma function for ``x > 0``."""
    x = _check_positive(x)
    shift = 0.0
    while x < config.series_switch:
        shift += 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    return math.log(x) - 0.5 / x + inv2 * _horner(_DIGAMMA_ASYMP, inv2) - shift


def trigamma(x: float, config: AccuracyConfig = DEFAULT_ACCURACY) -> float:
    x = _check_positive(x)
    shift = 0.0
    while x < config.series_switch:
        shift += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    return inv + 0.5 * inv2 + inv * inv2 * _horner(_TRIGAMMA_ASYMP, inv2) + shift


def log_gamma(x: float, config: AccuracyConfig = DEFAULT_ACCURACY) -> float:
    """``log Gamma(x)`` for ``x > 0``.

    Integer arguments up to 170 go through the exact factorial so that
    ``log_gamma(1) == log_gamma(2) == 0`` exactly. Once the result exceeds
    about 1e4 in magnitude the error is a few ulps rather than ``abs_tol``.
    """
    x = _check_positive(x)
    if _is_int(x) and x <= _EXACT_FACTORIAL_MAX:
        k = int(x)
        return 0.0 if k <= 2 else math.log(math.factorial(k - 1))
    prod = 1.0
    while x < config.series_switch:
        prod *= x
        x += 1.0
    inv = 1.0 / x
    stirling = (x - 0.5) * math.log(x) - x + _LOG_SQRT_2PI + inv * _horner(_LGAMMA_ASYMP, inv * inv)
    return stirling - math.log(prod)


def harmonic_prefix(n: int) -> float:
    """Return ``sum_{k=1}^{n-1} 1/k`` with correctly rounded summation."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n}")
    n = int(n)
    if n == 1:
        return 0.0
    # fsum is exactly rounded, so the result does not depend on platform or order.
    return math.fsum(1.0 / np.arange(1, n, dtype=np.float64))


def gamma_ratio_log(a: float, b: float) -> float:
    """``log(Gamma(b) / Gamma(a))``.

    Close integer pairs are handled by an exact integer product, which keeps
    identities such as ``Gamma(i) / Gamma(i - 2) = (i - 1)(i - 2)`` exact.
    """
    a = _check_positive(a, "a")
    b = _check_positive(b, "b")
    if a == b:
        return 0.0
    if _is_int(a) and _is_int(b) and abs(b - a) <= _EXACT_RATIO_SPAN:
        lo, hi = sorted((int(a), int(b)))
        value = math.log(math.prod(range(lo, hi)))
        return value if b > a else -value
    return log_gamma(b) - log_gamma(a)


def _poisson_upper(i: int, y: float) -> float:
    """``e^{-y} sum_{j<i} y^j / j!`` by forward accumulation."""
    if y <= _LOG_SPACE_Y:
        term = math.exp(-y)
        total = term
        for j in range(1, i):
            term *= y / j
            total += term
        return min(total, 1.0)
    log_y = math.log(y)
    log_term = -y
    log_total = -math.inf
    for j in range(i):
        if j:
            log_term += log_y - math.log(j)
        log_total = np.logaddexp(log_total, log_term)
    return min(math.exp(log_total), 1.0)


def _poisson_lower(i: int, y: float) -> float:
    """``P(Gamma(i) < y)`` by the convergent series, for ``y < i``."""
    if y == 0.0:
        return 0.0
    log_pref = -y + i * math.log(y) - log_gamma(i + 1)
    if log_pref < -745.0:
        return 0.0
    term = 1.0
    total = 1.0
    k = i
    while True:
        k += 1
        term *= y / k
        total += term
        if term <= 1e-17 * total:
            break
    return min(math.exp(log_pref) * total, 1.0)


def gamma_int_tails(i: int, y: float) -> tuple[float, float]:
    """Return ``(P(Gamma(i) < y), P(Gamma(i) >= y))`` for integer shape ``i``.

    The smaller of the two tails is computed directly, the other one as its
    complement, so both carry small relative error where it matters.
    """
    if int(i) != i or i < 1:
        raise DomainError(f"i must be an integer >= 1, got {i}")
    y = float(y)
    if not (y >= 0) or math.isinf(y):
        raise DomainError(f"y must be finite and >= 0, got {y}")
    i = int(i)
    if y < i:
        lower = _poisson_lower(i, y)
        return lower, 1.0 - lower
    upper = _poisson_upper(i, y)
    return 1.0 - upper, upper


def h_i(i: int, y: float) -> float:
    """Upper tail of Gamma(i), ``H_i(y) = e^{-y} sum_{j=0}^{i-1} y^j / j!``."""
    return gamma_int_tails(i, y)[1]


def binomial_tail(n: int, k: int, p: float) -> float:
    """``P(Binomial(n, p) >= k)``, summing whichever tail is smaller."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n}")
    if int(k) != k or not 0 <= k <= n + 1:
        raise DomainError(f"k must be an integer in [0, n+1], got {k}")
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    n, k = int(n), int(k)
    if k == 0:
        return 1.0
    if k == n + 1 or p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    log_p = math.log(p)
    log_q = math.log1p(-p)
    log_nfact = log_gamma(n + 1)

    def pmf(j: int) -> float:
        return math.exp(log_nfact - log_gamma(j + 1) - log_gamma(n - j + 1) + j * log_p + (n - j) * log_q)

    if k > n * p:
        return min(math.fsum(pmf(j) for j in range(k, n + 1)), 1.0)
    return max(1.0 - math.fsum(pmf(j) for j in range(k)), 0.0)


def binomial_tails(n: int, p: np.ndarray) -> np.ndarray:
    """Vectorised tails: ``out[..., k] = P(Binomial(n, p) >= k)`` for ``k = 0..n+1``.

    Same smaller-tail rule as :func:`binomial_tail`, over an array of ``p``.
    """
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    j = np.arange(n + 1, dtype=np.float64)
    log_binom = np.array([log_gamma(n + 1) - log_gamma(t + 1) - log_gamma(n - t + 1) for t in range(n + 1)])
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = np.log(p)[:, None]
        log_q = np.log1p(-p)[:, None]
        log_pmf = log_binom + j * log_p + (n - j) * log_q
        # 0 * log(0) terms at p in {0, 1}
        log_pmf = np.where((j == 0) & (p[:, None] == 0.0), 0.0, log_pmf)
        log_pmf = np.where((j == n) & (p[:, None] == 1.0), 0.0, log_pmf)
    pmf = np.exp(np.nan_to_num(log_pmf, nan=-np.inf))
    upper = np.cumsum(pmf[:, ::-1], axis=1)[:, ::-1]  # P(X >= k), k = 0..n
    lower = np.cumsum(pmf, axis=1)  # P(X <= k), k = 0..n
    out = np.empty((p.size, n + 2))
    out[:, 0] = 1.0
    out[:, n + 1] = 0.0
    ks = np.arange(1, n + 1)
    use_upper = ks[None, :] > n * p[:, None]
    out[:, 1 : n + 1] = np.where(use_upper, upper[:, 1:], 1.0 - lower[:, :-1])
    return np.clip(out, 0.0, 1.0)


def std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))
