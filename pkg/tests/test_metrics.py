import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TOL_MICRO, random_measure, random_probability
from depapprox.errors import DivergenceError
from depapprox.measures import FamilyParams, SignedMeasure, delta, poisson
from depapprox.metrics import (
    kolmogorov,
    nonuniform_kolmogorov,
    nonuniform_local,
    nonuniform_weight,
    total_variation,
    wasserstein_norm,
)
from depapprox.models import exact_sum_distribution, poisson_binomial_model


def _cdf_on(m, xs):
    return np.array([m.weights[: max(0, x - m.lo + 1)].sum() for x in xs])


# --------------------------------------------------------------------------
# Two-point cases
# --------------------------------------------------------------------------


def test_point_masses():
    d0, d1 = delta(0), delta(1)
    k = nonuniform_kolmogorov(d0, d1, 1.0)
    assert k.value == 2.0 and k.argmax_x == 0
    loc = nonuniform_local(d0, d1, 1.0)
    assert loc.value == 2.0 and loc.argmax_x == 0
    assert total_variation(d0, d1).value == 2.0
    assert wasserstein_norm(d0, d1).value == 1.0
    assert kolmogorov(d0, d1).value == 1.0


def test_weight():
    assert nonuniform_weight(3, 2.0) == 1.5
    assert np.array_equal(nonuniform_weight([2, 4], 2.0), [1.0, 3.0])


def test_identical_inputs_give_zero(rng):
    m = random_probability(rng)
    for res in (
        nonuniform_kolmogorov(m, m, 2.0),
        nonuniform_local(m, m, 2.0),
        total_variation(m, m),
        wasserstein_norm(m, m),
    ):
        assert res.value == 0.0


def test_weight_uses_real_lambda():
    # at lam = 0.5 the only gap point x = 0 has weight 1 + 0.25 / 0.5
    assert nonuniform_kolmogorov(delta(0), delta(1), 0.5).value == 1.5


def test_sentinel_catches_gap_below_support():
    f = SignedMeasure(2, [0.5, 0.5])
    a = SignedMeasure(3, [1.0])
    res = nonuniform_kolmogorov(f, a, 3.0)
    assert res.argmax_x == 2
    assert res.value == pytest.approx(0.5 * (1 + 1 / 3))


def test_mass_mismatch():
    f = delta(0)
    a = delta(0, 0.5)
    assert nonuniform_kolmogorov(f, a, 1.0).value == math.inf
    assert nonuniform_kolmogorov(f, a, 1.0).truncation_error_bound == 0.5
    with pytest.raises(DivergenceError):
        wasserstein_norm(f, a)


def test_lambda_must_be_positive():
    with pytest.raises(ValueError):
        nonuniform_kolmogorov(delta(0), delta(1), 0.0)
    with pytest.raises(ValueError):
        nonuniform_local(delta(0), delta(1), -1.0)


# --------------------------------------------------------------------------
# Direct evaluation oracles
# --------------------------------------------------------------------------


def test_kolmogorov_against_brute_scan(rng):
    for _ in range(50):
        f, a = random_probability(rng), random_probability(rng)
        lam = float(rng.uniform(0.5, 5))
        xs = np.arange(min(f.lo, a.lo) - 5, max(f.hi, a.hi) + 6)
        gap = np.abs(_cdf_on(f, xs) - _cdf_on(a, xs))
        assert abs(nonuniform_kolmogorov(f, a, lam).value - np.max(gap * (1 + (xs - lam) ** 2 / lam))) < TOL_MICRO
        assert abs(wasserstein_norm(f, a).value - gap.sum()) < TOL_MICRO


def test_total_variation_summation_orders():
    f, a = poisson(FamilyParams(1.0)), poisson(FamilyParams(1.1))
    lo = min(f.lo, a.lo)
    hi = max(f.hi, a.hi)
    diffs = [abs(f.pmf(x) - a.pmf(x)) for x in range(lo, hi + 1)]
    forward = math.fsum(diffs)
    backward = 0.0
    for d in reversed(diffs):
        backward += d
    assert abs(total_variation(f, a).value - forward) < 1e-14
    assert abs(total_variation(f, a).value - backward) < 1e-14


def test_local_against_loop(rng):
    f, a = random_measure(rng), random_measure(rng)
    lam = 3.3
    best = max(
        (1 + (x - lam) ** 2 / lam) * abs(f.pmf(x) - a.pmf(x))
        for x in range(min(f.lo, a.lo) - 1, max(f.hi, a.hi) + 2)
    )
    assert nonuniform_local(f, a, lam).value == pytest.approx(best, rel=1e-15)


def test_unweighted_mode_is_kolmogorov(rng):
    for _ in range(20):
        f, a = random_probability(rng), random_probability(rng)
        assert nonuniform_kolmogorov(f, a, 7.0, weighted=False).value == kolmogorov(f, a).value


# --------------------------------------------------------------------------
# Axioms on random pairs
# --------------------------------------------------------------------------


def _sup(fn, f, a):
    return fn(f, a).value


METRIC_FUNCS = {
    "nonuniform_kolmogorov": lambda f, a: nonuniform_kolmogorov(f, a, 2.5),
    "nonuniform_local": lambda f, a: nonuniform_local(f, a, 2.5),
    "total_variation": total_variation,
    "wasserstein": wasserstein_norm,
    "kolmogorov": kolmogorov,
}


@pytest.mark.parametrize("name", sorted(METRIC_FUNCS))
def test_symmetry_and_triangle(name, rng):
    fn = METRIC_FUNCS[name]
    for _ in range(100):
        f, g, h = (random_probability(rng) for _ in range(3))
        assert abs(_sup(fn, f, g) - _sup(fn, g, f)) <= TOL_MICRO
        assert _sup(fn, f, h) <= _sup(fn, f, g) + _sup(fn, g, h) + TOL_MICRO


def test_domination_chain(rng):
    for _ in range(200):
        f, a = random_probability(rng), random_probability(rng)
        k = kolmogorov(f, a).value
        assert wasserstein_norm(f, a).value >= k - TOL_MICRO
        assert total_variation(f, a).value >= 2 * k - TOL_MICRO


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10),
    st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10),
    st.integers(-4, 4),
)
def test_signed_differences_are_symmetric(wf, wa, shift):
    f = SignedMeasure(0, wf)
    a = SignedMeasure(shift, wa)
    assert total_variation(f, a).value == pytest.approx(total_variation(a, f).value, abs=1e-15)
    assert nonuniform_local(f, a, 1.7).value == pytest.approx(nonuniform_local(a, f, 1.7).value, abs=1e-15)


# --------------------------------------------------------------------------
# Barbour-Xia type bound on a Poisson binomial
# --------------------------------------------------------------------------


def test_wasserstein_dominates_kolmogorov_for_poisson_binomial(rng):
    p = rng.random(400) * 0.02
    law = exact_sum_distribution(poisson_binomial_model(p))
    pi = poisson(FamilyParams(p.sum()))
    w = wasserstein_norm(law, pi).value
    assert w >= kolmogorov(law, pi).value
    assert w <= 1.1437 * (p**2).sum() / math.sqrt(p.sum())
