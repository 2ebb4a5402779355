import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from sphere_lab.stats import build_ecdf, ecdf_eval, ks_critical_value, ks_one_sample, ks_two_sample

samples = st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=60)


def uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


def test_build_ecdf_sorts():
    e = build_ecdf([3, 1, 2])
    assert list(e.sorted_values) == [1, 2, 3]
    assert e.size == 3


def test_singleton():
    e = build_ecdf([5])
    assert ecdf_eval(e, 4.999) == 0.0
    assert ecdf_eval(e, 5) == 1.0
    assert ecdf_eval(e, 6) == 1.0


def test_ties_count():
    e = build_ecdf([1, 1, 2])
    assert ecdf_eval(e, 1) == pytest.approx(2 / 3)


def test_eval_edges():
    e = build_ecdf([0.3, -1.0, 7.0])
    assert ecdf_eval(e, -1.5) == 0.0
    assert ecdf_eval(e, 7.0) == 1.0
    assert list(ecdf_eval(e, np.array([-1.0, 0.0, 0.3]))) == pytest.approx([1 / 3, 1 / 3, 2 / 3])


@pytest.mark.parametrize("bad", [[], [1.0, float("nan")], [float("inf")]])
def test_build_ecdf_rejects(bad):
    with pytest.raises(ValueError):
        build_ecdf(bad)


def test_ks_one_sample_hand_enumeration():
    # gaps: 1/2 - 0.25, 0.25 - 0, 1 - 0.75, 0.75 - 1/2 -> all 0.25
    assert ks_one_sample(build_ecdf([0.25, 0.75]), uniform_cdf) == pytest.approx(0.25)


def test_ks_one_sample_exact_quantiles():
    n = 40
    e = build_ecdf((np.arange(1, n + 1) - 0.5) / n)
    assert ks_one_sample(e, uniform_cdf) <= 1 / (2 * n) + 1e-15


def test_ks_one_sample_degenerate_cdf():
    assert ks_one_sample(build_ecdf([0.1, 0.2]), lambda x: np.zeros_like(x)) == 1.0


def test_ks_one_sample_scalar_callable_fallback():
    e = build_ecdf([0.25, 0.75])
    assert ks_one_sample(e, lambda x: min(max(float(x), 0.0), 1.0)) == pytest.approx(0.25)


def test_ks_one_sample_matches_scipy():
    x = np.random.default_rng(0).normal(size=500)
    assert ks_one_sample(build_ecdf(x), sps.norm.cdf) == pytest.approx(sps.kstest(x, "norm").statistic, abs=1e-14)


def test_ks_invariant_under_increasing_transform():
    x = np.random.default_rng(1).uniform(0.01, 3.0, size=300)
    base = ks_one_sample(build_ecdf(x), lambda v: sps.expon.cdf(v))
    moved = ks_one_sample(build_ecdf(np.log(x)), lambda v: sps.expon.cdf(np.exp(v)))
    assert moved == pytest.approx(base, abs=1e-12)


def test_ks_two_sample_hand_merge():
    assert ks_two_sample(build_ecdf([1, 2]), build_ecdf([1.5, 2.5])) == 0.5


def test_ks_two_sample_identical():
    e = build_ecdf([4, 1, 1, 9])
    assert ks_two_sample(e, e) == 0.0


def test_ks_two_sample_matches_scipy_with_ties():
    rng = np.random.default_rng(3)
    a = rng.integers(0, 20, size=300).astype(float)
    b = rng.integers(2, 22, size=170).astype(float)
    expected = sps.ks_2samp(a, b).statistic
    assert ks_two_sample(build_ecdf(a), build_ecdf(b)) == pytest.approx(expected, abs=1e-14)


@settings(max_examples=100)
@given(samples, samples)
def test_ks_two_sample_symmetric_and_bounded(a, b):
    ea, eb = build_ecdf(a), build_ecdf(b)
    d = ks_two_sample(ea, eb)
    assert d == ks_two_sample(eb, ea)
    assert 0.0 <= d <= 1.0


@settings(max_examples=100)
@given(samples)
def test_ks_one_sample_bounded(a):
    d = ks_one_sample(build_ecdf(a), lambda x: sps.norm.cdf(x))
    assert 0.0 <= d <= 1.0


def test_critical_value():
    assert ks_critical_value(0.001, 2000, 2000) == pytest.approx(0.0617, abs=1e-4)
    assert math.sqrt(-0.5 * math.log(0.0005)) == pytest.approx(1.95, abs=1e-3)
    assert ks_critical_value(0.001, 10**5) == pytest.approx(1.95 / math.sqrt(1e5), rel=1e-3)
