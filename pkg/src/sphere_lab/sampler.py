"""Exact-in-law sampling of spectral radii through independent Gamma variates.

For the product of ``m`` spherical-ensemble matrices of size ``n``,

    M_n  =_d  max_{1<=i<=n} prod_{j=1}^m sqrt(b_ij / a_ij),

with ``a_ij ~ Gamma(i)`` and ``b_ij ~ Gamma(n + 1 - i)``, all independent.
Everything is evaluated on the log scale: for large ``m`` the product itself
leaves double range long before its logarithm does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Iterator

import numpy as np

from .parallel import map_chunks
from .stats import Ecdf, build_ecdf
from .streams import RngStreamSpec, as_generator


@dataclass(frozen=True)
class EnsembleSpec:
    n: int
    m: int = 1

    def __post_init__(self) -> None:
        for name in ("n", "m"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class GammaPairDraw:
    """One ``(a, b)`` pair: ``a ~ Gamma(i)``, ``b ~ Gamma(n + 1 - i)``."""

    i: int
    j: int
    a: float
    b: float


@dataclass(frozen=True)
class LogRadiusSample:
    log_mn: float
    trace: np.ndarray | None = None  # log V_i for i = 1..n


@dataclass(frozen=True)
class SampleBatch:
    spec: EnsembleSpec
    values: np.ndarray
    seed: int
    count: int

    def __post_init__(self) -> None:
        if self.count != len(self.values):
            raise ValueError(f"count {self.count} does not match {len(self.values)} values")


def gamma_variate(shape: float | np.ndarray, stream: RngStreamSpec | np.random.Generator) -> float | np.ndarray:
    """Draw from Gamma(shape, 1) (Marsaglia-Tsang squeeze, O(1) per draw)."""
    if np.any(np.asarray(shape) < 1):
        raise ValueError(f"shape must be >= 1, got {shape!r}")
    return as_generator(stream).standard_gamma(shape)


def _pair_shapes(n: int, m: int) -> np.ndarray:
    i = np.arange(1, n + 1, dtype=np.float64)
    return np.tile(np.concatenate([i, n + 1 - i]), (m, 1))


def _draw_pairs(n: int, gen: np.random.Generator, shapes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = gen.standard_gamma(shapes)
    return g[:, :n], g[:, n:]


def _log_v(n: int, gen: np.random.Generator, shapes: np.ndarray) -> np.ndarray:
    a, b = _draw_pairs(n, gen, shapes)
    return 0.5 * (np.log(b) - np.log(a)).sum(axis=0)


def iter_gamma_pairs(spec: EnsembleSpec, stream: RngStreamSpec | np.random.Generator) -> Iterator[GammaPairDraw]:
    """The ``2nm`` variates behind one draw, in the same order the sampler consumes them."""
    a, b = _draw_pairs(spec.n, as_generator(stream), _pair_shapes(spec.n, spec.m))
    for j in range(spec.m):
        for i in range(spec.n):
            yield GammaPairDraw(i + 1, j + 1, float(a[j, i]), float(b[j, i]))


def sample_log_radius(
    spec: EnsembleSpec,
    stream: RngStreamSpec | np.random.Generator,
    with_trace: bool = False,
) -> LogRadiusSample:
    log_v = _log_v(spec.n, as_generator(stream), _pair_shapes(spec.n, spec.m))
    log_mn = float(log_v.max())
    return LogRadiusSample(log_mn, log_v if with_trace else None)


def _radius_chunk(n: int, m: int, seed: int, start: int, stop: int) -> np.ndarray:
    shapes = _pair_shapes(n, m)
    out = np.empty(stop - start)
    for k in range(start, stop):
        out[k - start] = _log_v(n, RngStreamSpec(seed, k).generator(), shapes).max()
    return out


def _trace_chunk(n: int, m: int, seed: int, start: int, stop: int) -> np.ndarray:
    shapes = _pair_shapes(n, m)
    out = np.empty((stop - start, n))
    for k in range(start, stop):
        out[k - start] = _log_v(n, RngStreamSpec(seed, k).generator(), shapes)
    return out


def sample_batch(spec: EnsembleSpec, count: int, seed: int, workers: int | None = 1) -> SampleBatch:
    """``count`` draws of ``log M_n``; draw ``k`` always comes from stream ``(seed, k)``."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    values = map_chunks(partial(_radius_chunk, spec.n, spec.m, seed), count, workers)
    return SampleBatch(spec, values, seed, count)


def sample_traces(spec: EnsembleSpec, count: int, seed: int, workers: int | None = 1) -> np.ndarray:
    """Per-index ``log V_i`` for each draw, shape ``(count, n)``; row maxima equal :func:`sample_batch`."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return map_chunks(partial(_trace_chunk, spec.n, spec.m, seed), count, workers)


def _log_v_index_chunk(n: int, m: int, i: int, seed: int, start: int, stop: int) -> np.ndarray:
    shapes = np.tile(np.array([i, n + 1 - i], dtype=np.float64), (m, 1))
    out = np.empty(stop - start)
    for k in range(start, stop):
        g = RngStreamSpec(seed, k).generator().standard_gamma(shapes)
        out[k - start] = 0.5 * (np.log(g[:, 1]) - np.log(g[:, 0])).sum()
    return out


def sample_log_v(spec: EnsembleSpec, i: int, count: int, seed: int, workers: int | None = 1) -> np.ndarray:
    """Independent draws of ``log V_i`` for a single index (no maximum taken)."""
    if not 1 <= i <= spec.n:
        raise IndexError(f"index i={i} outside 1..{spec.n}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return map_chunks(partial(_log_v_index_chunk, spec.n, spec.m, i, seed), count, workers)


def per_index_cdf_ordering_probe(spec: EnsembleSpec, i: int, count: int, seed: int, workers: int | None = 1) -> Ecdf:
    return build_ecdf(sample_log_v(spec, i, count, seed, workers))


def sample_limit_variable(m: int, i_max: int, stream: RngStreamSpec | np.random.Generator) -> float:
    """Log of ``max_{i<=i_max} prod_j a_ij^{-1/2}`` with ``a_ij ~ Gamma(i)``.

    This truncates the fixed-``m`` limit variable at ``i_max``; see
    :func:`truncation_bound` for how much probability the cut can move.
    """
    if i_max < 3:
        raise ValueError(f"i_max must be >= 3, got {i_max}")
    shapes = np.tile(np.arange(1, i_max + 1, dtype=np.float64), (m, 1))
    a = as_generator(stream).standard_gamma(shapes)
    return float((-0.5 * np.log(a).sum(axis=0)).max())


def _limit_chunk(m: int, i_max: int, seed: int, start: int, stop: int) -> np.ndarray:
    shapes = np.tile(np.arange(1, i_max + 1, dtype=np.float64), (m, 1))
    out = np.empty(stop - start)
    for k in range(start, stop):
        a = RngStreamSpec(seed, k).generator().standard_gamma(shapes)
        out[k - start] = (-0.5 * np.log(a).sum(axis=0)).max()
    return out


def sample_limit_batch(m: int, i_max: int, count: int, seed: int, workers: int | None = 1) -> np.ndarray:
    if i_max < 3:
        raise ValueError(f"i_max must be >= 3, got {i_max}")
    return map_chunks(partial(_limit_chunk, m, i_max, seed), count, workers)


# Terms past this many indices are replaced by an integral upper bound.
_EXPLICIT_TERMS = 100_000


def truncation_bound(m: int, i_max: int, t: float) -> float:
    """Markov bound on ``P(max_{i > i_max} prod_j a_ij^{-1/2} > t)``.

    Uses ``E(a^{-2}) = 1 / ((i-1)(i-2))`` for ``a ~ Gamma(i)``, so the bound is
    ``t^{-4} sum_{i > i_max} ((i-1)(i-2))^{-m}``. For ``m = 1`` the sum
    telescopes to ``1 / (i_max - 1)``; otherwise it is summed explicitly and
    the far tail is bounded by an integral, so the result never undershoots.
    """
    if int(i_max) != i_max or i_max < 3:
        raise ValueError(f"i_max must be an integer >= 3, got {i_max}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if m == 1:
        total = 1.0 / (i_max - 1)
    else:
        i = np.arange(i_max + 1, i_max + 1 + _EXPLICIT_TERMS, dtype=np.float64)
        terms = np.exp(-m * (np.log(i - 1) + np.log(i - 2)))
        last = i_max + _EXPLICIT_TERMS
        # sum_{i > last} (i-2)^{-2m} <= int_{last-1}^inf (x-2)^{-2m} dx
        tail = (last - 3.0) ** (1 - 2 * m) / (2 * m - 1)
        total = math.fsum(terms) + tail
    return t**-4 * total


def default_i_max(m: int, t: float = 0.1, target: float = 1e-3) -> int:
    """Smallest ``i_max >= 3`` whose :func:`truncation_bound` at ``t`` is at most ``target``."""
    if m == 1:
        return max(3, math.ceil(t**-4 / target) + 1)
    hi = 3
    while truncation_bound(m, hi, t) > target:
        hi *= 2
    lo = max(3, hi // 2)
    if truncation_bound(m, lo, t) <= target:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if truncation_bound(m, mid, t) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def slln_max_deviation(n: int, m: int, stream: RngStreamSpec | np.random.Generator) -> float:
    """``max |G/n - 1|`` over ``n*m`` independent ``G ~ Gamma(n)``.

    Probe for the almost-sure concentration of the partial sums
    ``Gamma_ij[2:(n+1)]`` that drives the fixed-``m`` limit.
    """
    g = as_generator(stream).standard_gamma(float(n), size=(m, n))
    return float(np.abs(g / n - 1.0).max())
