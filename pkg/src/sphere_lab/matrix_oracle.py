"""Direct simulation of products of spherical-ensemble matrices.

Slow (``O(n^3)`` per draw) but independent of the Gamma representation, which
makes it the distributional oracle for :mod:`sphere_lab.sampler`. Matrices are
plain ``complex128`` numpy arrays.

Variance convention: real and imaginary parts are ``Normal(0, variance / 2)``,
so ``E|z|^2 = variance`` (1 by default). ``A^{-1} B`` is unchanged by a common
rescaling of ``A`` and ``B``, so the choice cannot affect any spectral law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial, reduce
from typing import Sequence

import numpy as np

from .parallel import map_chunks
from .streams import RngStreamSpec, as_generator

# A solve whose relative residual exceeds this is treated as near-singular.
_SOLVE_RESIDUAL_LIMIT = 1e-8


class SingularDrawError(RuntimeError):
    """Two consecutive denominator draws were numerically singular."""


class EigenConvergenceError(RuntimeError):
    """The QR iteration did not converge; ``matrix`` holds the offending input."""

    def __init__(self, message: str, matrix: np.ndarray):
        super().__init__(message)
        self.matrix = matrix


@dataclass(frozen=True)
class EigenModuli:
    values: np.ndarray
    residual: float


def sample_complex_ginibre(
    n: int,
    stream: RngStreamSpec | np.random.Generator,
    variance: float = 1.0,
) -> np.ndarray:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    gen = as_generator(stream)
    scale = math.sqrt(variance / 2.0)
    parts = gen.normal(0.0, scale, size=(2, n, n))
    return parts[0] + 1j * parts[1]


def solve_residual(a: np.ndarray, x: np.ndarray, b: np.ndarray) -> float:
    """``||A X - B||_inf / ||B||_inf`` (row-sum norms)."""
    num = np.abs(a @ x - b).sum(axis=1).max()
    den = np.abs(b).sum(axis=1).max()
    return float(num / den) if den > 0 else float(num)


def sample_spherical(
    n: int,
    stream: RngStreamSpec | np.random.Generator,
    variance: float = 1.0,
) -> np.ndarray:
    """``X`` solving ``A X = B`` for independent Ginibre ``A``, ``B`` (LU with partial pivoting).

    A numerically singular ``A`` is redrawn once; a second failure raises
    :class:`SingularDrawError`, since it points to a bug rather than bad luck.
    """
    gen = as_generator(stream)
    last = None
    for _ in range(2):
        a = sample_complex_ginibre(n, gen, variance)
        b = sample_complex_ginibre(n, gen, variance)
        try:
            x = np.linalg.solve(a, b)
        except np.linalg.LinAlgError as exc:
            last = f"LinAlgError: {exc}"
            continue
        res = solve_residual(a, x, b)
        if np.all(np.isfinite(x)) and res <= _SOLVE_RESIDUAL_LIMIT:
            return x
        last = f"relative residual {res:.3e}, cond(A) ~ {np.linalg.cond(a):.3e}"
    raise SingularDrawError(f"denominator matrix singular twice in a row (n={n}): {last}")


def product_chain(
    n: int,
    m: int,
    stream: RngStreamSpec | np.random.Generator,
    factors: Sequence[np.ndarray] | None = None,
    variance: float = 1.0,
) -> np.ndarray:
    """``X_1 X_2 ... X_m``, multiplied left to right.

    ``factors`` replaces the random draws (for testing).
    """
    if factors is None:
        if m < 1:
            raise ValueError(f"m must be >= 1, got {m}")
        gen = as_generator(stream)
        factors = [sample_spherical(n, gen, variance) for _ in range(m)]
    return reduce(np.matmul, factors)


def eigen_moduli(matrix: np.ndarray) -> EigenModuli:
    """Moduli of all eigenvalues of a general complex matrix.

    LAPACK ``geev``: Hessenberg reduction then shifted QR. The residual is
    ``max_k ||M v_k - lambda_k v_k|| / (||M||_F ||v_k||)``, a backward-error
    estimate for the computed eigenpairs.
    """
    mat = np.asarray(matrix, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix has non-finite entries")
    try:
        lam, vec = np.linalg.eig(mat)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"eigenvalue iteration failed: {exc}", mat) from exc
    norm = np.linalg.norm(mat)
    if norm == 0:
        return EigenModuli(np.abs(lam), 0.0)
    r = np.linalg.norm(mat @ vec - vec * lam, axis=0) / (norm * np.linalg.norm(vec, axis=0))
    return EigenModuli(np.abs(lam), float(r.max()))


def oracle_spectral_radius(
    n: int,
    m: int,
    stream: RngStreamSpec | np.random.Generator,
    variance: float = 1.0,
) -> float:
    """Log spectral radius of one simulated product."""
    return float(np.log(eigen_moduli(product_chain(n, m, stream, variance=variance)).values.max()))


def _oracle_chunk(n: int, m: int, seed: int, variance: float, start: int, stop: int) -> np.ndarray:
    return np.array([oracle_spectral_radius(n, m, RngStreamSpec(seed, k), variance) for k in range(start, stop)])


def oracle_batch(
    n: int,
    m: int,
    count: int,
    seed: int,
    workers: int | None = 1,
    variance: float = 1.0,
) -> np.ndarray:
    """``count`` oracle draws of ``log M_n``; draw ``k`` uses stream ``(seed, k)``."""
    return map_chunks(partial(_oracle_chunk, n, m, seed, variance), count, workers)
