import math

import mpmath
import numpy as np
import pytest

from sphere_lab.limit_laws import finite_n_cdf_m1, limit_cdf_m1
from sphere_lab.sampler import (
    EnsembleSpec,
    SampleBatch,
    default_i_max,
    gamma_variate,
    iter_gamma_pairs,
    per_index_cdf_ordering_probe,
    sample_batch,
    sample_limit_batch,
    sample_limit_variable,
    sample_log_radius,
    sample_log_v,
    sample_traces,
    slln_max_deviation,
    truncation_bound,
)
from sphere_lab.specfun import digamma, harmonic_prefix, trigamma
from sphere_lab.stats import build_ecdf, ks_one_sample
from sphere_lab.streams import RngStreamSpec, derive_seed


def test_ensemble_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(0, 1)
    with pytest.raises(ValueError):
        EnsembleSpec(3, 0)
    with pytest.raises(ValueError):
        EnsembleSpec(2.5, 1)


def test_stream_spec_validation():
    with pytest.raises(ValueError):
        RngStreamSpec(-1, 0)
    with pytest.raises(ValueError):
        RngStreamSpec(0, 2**64)
    RngStreamSpec(2**64 - 1, 2**64 - 1).generator()


def test_derive_seed_wraps():
    assert derive_seed(2**64 - 1, 2) == 1
    assert derive_seed(5, 0) == 5


def test_gamma_variate_mean():
    draws = gamma_variate(np.full(10**6, 5.0), RngStreamSpec(1, 0))
    assert abs(draws.mean() - 5) <= 4 * math.sqrt(5) / 1e3


def test_gamma_variate_log_mean_is_digamma():
    draws = gamma_variate(np.full(10**6, 3.0), RngStreamSpec(2, 0))
    assert abs(np.log(draws).mean() - digamma(3)) <= 4 * math.sqrt(trigamma(3) / 1e6)


def test_gamma_variate_deterministic():
    a = gamma_variate(np.full(50, 2.0), RngStreamSpec(9, 4))
    b = gamma_variate(np.full(50, 2.0), RngStreamSpec(9, 4))
    c = gamma_variate(np.full(50, 2.0), RngStreamSpec(9, 5))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_gamma_variate_rejects_small_shape():
    with pytest.raises(ValueError):
        gamma_variate(0.5, RngStreamSpec(0))


def test_gamma_pairs_shapes():
    pairs = list(iter_gamma_pairs(EnsembleSpec(4, 2), RngStreamSpec(0, 0)))
    assert len(pairs) == 8
    assert {(p.i, p.j) for p in pairs} == {(i, j) for i in range(1, 5) for j in (1, 2)}
    assert all(p.a > 0 and p.b > 0 for p in pairs)


def test_gamma_pairs_consistent_with_radius():
    spec = EnsembleSpec(5, 3)
    pairs = list(iter_gamma_pairs(spec, RngStreamSpec(4, 1)))
    log_v = np.zeros(spec.n)
    for p in pairs:
        log_v[p.i - 1] += 0.5 * (math.log(p.b) - math.log(p.a))
    s = sample_log_radius(spec, RngStreamSpec(4, 1), with_trace=True)
    assert np.allclose(s.trace, log_v, atol=1e-13)


def test_trace_max_is_exact():
    s = sample_log_radius(EnsembleSpec(20, 3), RngStreamSpec(5, 0), with_trace=True)
    assert s.trace.shape == (20,)
    assert s.log_mn == s.trace.max()
    assert sample_log_radius(EnsembleSpec(20, 3), RngStreamSpec(5, 0)).trace is None


def test_n1_m1_symmetric():
    vals = sample_batch(EnsembleSpec(1, 1), 10**5, 17).values
    assert abs((vals <= 0).mean() - 0.5) <= max(3 * math.sqrt(0.25 / 1e5), 0.005)


def test_n2_m1_probability():
    # P(M_2 <= 1) = I_{1/2}(2,1) * I_{1/2}(1,2) = 1/4 * 3/4
    vals = sample_batch(EnsembleSpec(2, 1), 10**5, 18).values
    assert abs((vals <= 0).mean() - 3 / 16) <= 4 * math.sqrt(0.1875 * 0.8125 / 1e5)


def test_batch_independent_of_workers():
    spec = EnsembleSpec(6, 2)
    a = sample_batch(spec, 600, 7, workers=1).values
    b = sample_batch(spec, 600, 7, workers=3).values
    assert np.array_equal(a, b)
    c = sample_batch(spec, 8, 7, workers=8).values
    assert np.array_equal(c, a[:8])


def test_batch_element_k_uses_stream_k():
    spec = EnsembleSpec(5, 2)
    batch = sample_batch(spec, 300, 21)
    assert batch.values[257] == sample_log_radius(spec, RngStreamSpec(21, 257)).log_mn


def test_traces_agree_with_batch():
    spec = EnsembleSpec(7, 2)
    traces = sample_traces(spec, 50, 3)
    assert np.array_equal(traces.max(axis=1), sample_batch(spec, 50, 3).values)


def test_batch_rejects_zero_count():
    with pytest.raises(ValueError):
        sample_batch(EnsembleSpec(2, 1), 0, 1)


def test_sample_batch_invariant():
    with pytest.raises(ValueError):
        SampleBatch(EnsembleSpec(2), np.zeros(3), 0, 4)


@pytest.mark.parametrize("n", [1, 3, 20])
def test_exact_law_m1(n):
    values = sample_batch(EnsembleSpec(n, 1), 10**5, 100 + n).values
    d = ks_one_sample(build_ecdf(values), lambda v: finite_n_cdf_m1(n, np.exp(v)))
    assert d <= 0.008


def test_limit_variable_dominates_first_term():
    for k in range(20):
        stream = RngStreamSpec(8, k)
        a = stream.generator().standard_gamma(np.tile(np.arange(1, 4, dtype=float), (3, 1)))
        first = -0.5 * np.log(a[:, 0]).sum()
        assert sample_limit_variable(3, 3, stream) >= first


def test_limit_variable_m1_matches_h():
    vals = sample_limit_batch(1, 2000, 10**5, 31)
    assert abs((vals <= math.log(2)).mean() - limit_cdf_m1(2.0)) <= 0.01


def test_limit_variable_rejects_small_i_max():
    with pytest.raises(ValueError):
        sample_limit_variable(1, 2, RngStreamSpec(0))


def test_truncation_bound_examples():
    assert truncation_bound(1, 101, 1.0) == pytest.approx(0.01, rel=1e-15)
    assert truncation_bound(1, 101, 2.0) == pytest.approx(6.25e-4, rel=1e-15)
    integral = float(mpmath.quad(lambda x: (x * (x - 1)) ** -2, [10, mpmath.inf]))
    b = truncation_bound(2, 11, 1.0)
    assert b <= integral < 4e-4


def test_truncation_bound_m2_is_tight_upper_bound():
    exact = float(mpmath.nsum(lambda i: ((i - 1) * (i - 2)) ** -2, [12, mpmath.inf]))
    b = truncation_bound(2, 11, 1.0)
    assert exact <= b <= exact * (1 + 1e-9)


def test_truncation_bound_m1_matches_mc():
    # P(the cut at 101 changes a value above log 1) is at most the bound
    rng_vals = []
    for k in range(3000):
        a = RngStreamSpec(41, k).generator().standard_gamma(np.arange(1, 2001, dtype=float))
        log_terms = -0.5 * np.log(a)
        rng_vals.append(log_terms[101:].max() > max(log_terms[:101].max(), 0.0))
    assert np.mean(rng_vals) <= truncation_bound(1, 101, 1.0) + 3 * math.sqrt(0.01 / 3000)


def test_truncation_bound_domain():
    with pytest.raises(ValueError):
        truncation_bound(1, 2, 1.0)
    with pytest.raises(ValueError):
        truncation_bound(1, 10, 0.0)


def test_default_i_max_rule():
    for m in (2, 3, 5):
        i = default_i_max(m)
        assert truncation_bound(m, i, 0.1) <= 1e-3
        assert i == 3 or truncation_bound(m, i - 1, 0.1) > 1e-3
    assert default_i_max(1) == 10**7 + 1


def test_log_v1_mean_identity():
    spec = EnsembleSpec(100, 5)
    vals = sample_log_v(spec, 1, 4 * 10**4, 51)
    expected = 0.5 * spec.m * harmonic_prefix(spec.n)
    assert expected == pytest.approx(0.5 * spec.m * (digamma(100) - digamma(1)), abs=1e-10)
    assert abs(vals.mean() - expected) <= 4 * vals.std(ddof=1) / math.sqrt(vals.size)


def test_log_v1_median_n1():
    e = per_index_cdf_ordering_probe(EnsembleSpec(1, 1), 1, 20000, 3)
    assert abs(e(0.0) - 0.5) <= 4 * math.sqrt(0.25 / 20000)


def test_stochastic_ordering_small():
    spec = EnsembleSpec(50, 2)
    grid = np.linspace(-3, 6, 200)
    ecdfs = [per_index_cdf_ordering_probe(spec, i, 20000, 60 + i) for i in range(1, 6)]
    for lo, hi in zip(ecdfs, ecdfs[1:]):
        assert np.all(hi(grid) >= lo(grid) - 0.02)


def test_log_v_index_range():
    with pytest.raises(IndexError):
        sample_log_v(EnsembleSpec(4, 1), 5, 10, 0)


def test_slln_probe():
    assert slln_max_deviation(10**4, 3, RngStreamSpec(77, 0)) <= 0.1
