"""Reference laws for the spectral radius.

* ``finite_n_cdf_m1``: exact CDF of ``M_n`` for a single factor.
* ``limit_cdf_m1``: the fixed-``m`` limit law of ``M_n / n^{1/2}`` at ``m = 1``,
  ``H(x) = prod_i H_i(x^{-2})``, with a certified truncation error.
* ``build_mc_reference``: Monte Carlo ECDF of the limit variable for ``m >= 2``,
  where no closed form exists.
* ``normal_params`` / ``theorem2_normalize``: centring and scale of the normal
  limit of ``log M_n`` when ``m`` grows with ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sampler import sample_limit_batch, truncation_bound
from .specfun import DomainError, binomial_tails, harmonic_prefix, log_gamma, trigamma
from .stats import Ecdf, build_ecdf

DEFAULT_EPS = 1e-10

# Below e^{-745} the leading factor H_1(y) = e^{-y} is an exact double zero.
_UNDERFLOW_Y = 745.0


@dataclass(frozen=True)
class NormalLimitParams:
    n: int
    m: int
    mu_n: float
    sigma_n: float


@dataclass(frozen=True)
class TruncatedProductLaw:
    """Callable ``H`` with truncation error at most ``eps``."""

    eps: float = DEFAULT_EPS
    i_cutoff_rule: str = field(
        default="smallest I with sum_{i>I} y^i/i! <= eps, y = x^-2 (Poisson tail bound on 1 - H_i)",
        compare=False,
    )

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps}")

    def cdf(self, x):
        return limit_cdf_m1(x, self.eps)

    def sf(self, x):
        return limit_sf_m1(x, self.eps)

    __call__ = cdf


@dataclass(frozen=True, eq=False)
class McReferenceLaw:
    m: int
    i_max: int
    ref_count: int
    seed: int
    ecdf: Ecdf
    truncation_t: float
    truncation_bound: float

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, McReferenceLaw):
            return NotImplemented
        return (self.m, self.i_max, self.ref_count, self.seed) == (
            other.m,
            other.i_max,
            other.ref_count,
            other.seed,
        ) and self.ecdf == other.ecdf


def _poisson_tail_log_bound(i_cut: int, y: float) -> float:
    """Log of an upper bound on ``sum_{i > i_cut} y^i / i!``."""
    k = i_cut + 1
    if y >= k + 1:
        return math.inf
    return k * math.log(y) - log_gamma(k + 1) - math.log1p(-y / (k + 1))


def _cutoff(y: float, log_eps: float) -> int:
    i = 1
    while _poisson_tail_log_bound(i, y) > log_eps:
        i += 1
    return i


def _log_h_product(y: float, eps: float) -> float:
    """``log prod_{i<=I} H_i(y)`` for the certified cutoff ``I``."""
    if y > _UNDERFLOW_Y:
        return -math.inf
    if y == 0.0:
        return 0.0
    log_eps = math.log(eps)
    i_cut = _cutoff(y, log_eps)
    # Extra terms so the backward sums for the lower tails are converged.
    j_top = max(i_cut, _cutoff(y, log_eps - 40.0)) + 1
    j = np.arange(j_top + 1, dtype=np.float64)
    log_y = math.log(y)
    log_pmf = -y + j * log_y - np.array([log_gamma(t + 1) for t in range(j_top + 1)])
    pmf = np.exp(log_pmf)
    i = np.arange(1, i_cut + 1)
    upper = np.cumsum(pmf)[: i_cut]  # P(Gamma(i) >= y) = P(Poisson(y) <= i-1)
    lower = np.cumsum(pmf[::-1])[::-1][1 : i_cut + 1]  # P(Poisson(y) >= i)
    with np.errstate(divide="ignore"):
        log_h = np.where(y < i, np.log1p(-np.minimum(lower, 1.0)), np.log(upper))
    return float(log_h.sum())


def _check_x(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if np.any(~(arr > 0)) or np.any(~np.isfinite(arr)):
        raise DomainError(f"x must be positive and finite, got {x!r}")
    return arr


def _eval(x, eps: float, fn) -> float | np.ndarray:
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    arr = _check_x(x)
    with np.errstate(over="ignore"):
        y = arr**-2.0
    out = np.array([fn(_log_h_product(float(v), eps)) for v in y.ravel()]).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def limit_cdf_m1(x, eps: float = DEFAULT_EPS):
    """``H(x) = prod_{i>=1} H_i(x^{-2})``, the ``m = 1`` limit law of ``M_n / sqrt(n)``.

    The product is cut at the smallest ``I`` whose Poisson tail bound
    ``sum_{i>I} y^i/i!`` is at most ``eps``; the dropped factors are all at
    least ``1 - (that bound)``, so the returned value overshoots ``H`` by at
    most ``eps``. Since ``I`` shrinks as ``x`` grows, the result is
    non-decreasing in ``x``. Accepts scalars or arrays.
    """
    return _eval(x, eps, math.exp)


def limit_sf_m1(x, eps: float = DEFAULT_EPS):
    """``1 - H(x)`` without cancellation in the far tail."""
    return _eval(x, eps, lambda log_h: -math.expm1(log_h))


def finite_n_cdf_m1(n: int, x):
    """Exact ``P(M_n <= x)`` for one factor (``m = 1``).

    Each factor ``b_i / a_i`` is beta-prime, so with ``p = x^2 / (1 + x^2)``
    ``P(b_i / a_i <= x^2) = P(Bin(n, p) >= n + 1 - i)`` and the CDF is the
    product of those binomial tails over ``i``.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n}")
    n = int(n)
    arr = _check_x(x)
    flat = arr.ravel()
    out = np.empty(flat.size)
    chunk = max(1, 2_000_000 // (n + 2))
    for s in range(0, flat.size, chunk):
        xs = flat[s : s + chunk]
        with np.errstate(over="ignore"):
            p = 1.0 / (1.0 + xs**-2.0)
        tails = binomial_tails(n, p)[:, 1 : n + 1]
        with np.errstate(divide="ignore"):
            out[s : s + chunk] = np.exp(np.log(tails).sum(axis=1))
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def normal_params(n: int, m: int) -> NormalLimitParams:
    """Centring ``(m/2) sum_{k<n} 1/k`` and scale ``sqrt(m pi^2 / 24)``."""
    for name, value in (("n", n), ("m", m)):
        if int(value) != value or value < 1:
            raise DomainError(f"{name} must be a positive integer, got {value!r}")
    mu_n = 0.5 * m * harmonic_prefix(n)
    sigma_n = math.sqrt(m) * math.pi / math.sqrt(24.0)
    return NormalLimitParams(int(n), int(m), mu_n, sigma_n)


def theorem2_normalize(log_mn, params: NormalLimitParams):
    """``(log M_n - mu_n) / sigma_n``; works elementwise on arrays."""
    if not params.sigma_n > 0:
        raise DomainError("sigma_n must be positive")
    out = (np.asarray(log_mn, dtype=np.float64) - params.mu_n) / params.sigma_n
    return float(out) if out.ndim == 0 else out


def sigma_identity_gap(m: int) -> float:
    """``|sigma_n^2 - m * trigamma(1) / 4|``; zero up to rounding."""
    return abs(normal_params(1, m).sigma_n ** 2 - m * trigamma(1.0) / 4.0)


def build_mc_reference(
    m: int,
    i_max: int,
    ref_count: int,
    seed: int,
    workers: int | None = 1,
) -> McReferenceLaw:
    """Monte Carlo ECDF of the log limit variable for fixed ``m``.

    The truncation bound is recorded at ``t = exp(0.1% quantile)`` of the
    drawn values, i.e. the chance that indices past ``i_max`` would have moved
    a draw sitting above the bottom 0.1% of the sample.
    """
    if m < 2:
        raise DomainError(f"the Monte Carlo reference is for m >= 2; use limit_cdf_m1 at m=1 (got m={m})")
    values = sample_limit_batch(m, i_max, ref_count, seed, workers)
    ecdf = build_ecdf(values)
    t = math.exp(float(np.quantile(ecdf.sorted_values, 0.001)))
    return McReferenceLaw(m, i_max, ref_count, seed, ecdf, t, truncation_bound(m, i_max, t))
