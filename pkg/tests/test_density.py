import math

import mpmath
import numpy as np
import pytest

from momentlock import density as dm
from momentlock.errors import InvalidParams, NoConvergence, Unsupported

E = math.e


def test_uniform_pdf():
    assert dm.pdf_eval(dm.uniform(), 0.3) == 1.0
    assert dm.pdf_eval(dm.uniform(), 1.5) == 0.0


def test_beta13_at_zero():
    # normalizer 1/B(1,3) = 1 / int_0^1 (1-x)^2 dx, by mpmath quadrature
    norm = 1 / mpmath.quad(lambda t: (1 - t) ** 2, [0, 1])
    assert dm.pdf_eval(dm.beta(1, 3), 0.0) == pytest.approx(float(norm), rel=1e-14)


def test_beta24_vanishes_at_endpoints():
    d = dm.beta(2, 4)
    assert dm.pdf_eval(d, 0.0) == 0.0
    assert dm.pdf_eval(d, 1.0) == 0.0


@pytest.mark.parametrize("params", [(0, 3), (-1, 2), (2, 0)])
def test_beta_rejects_bad_params(params):
    with pytest.raises(InvalidParams):
        dm.beta(*params)


@pytest.mark.parametrize("d,l,expected", [
    (dm.uniform(), 2, 1 / 3),
    (dm.beta(1, 3), 1, 0.25),
    (dm.std_normal(), 4, 3.0),
    (dm.std_normal(), 5, 0.0),
    (dm.beta(2, 4), 2, 1 / 7),
])
def test_exact_moments(d, l, expected):
    assert dm.exact_polynomial_moment(d, l) == pytest.approx(expected, rel=1e-15)


def test_custom_moments_unsupported():
    d = dm.custom(lambda x: 2 * x, (0, 1))
    with pytest.raises(Unsupported):
        dm.exact_polynomial_moment(d, 1)
    assert dm.expectation_oracle(d, lambda x: x) == pytest.approx(2 / 3, abs=1e-12)


@pytest.mark.parametrize("d", [dm.uniform(), dm.beta(1, 3), dm.beta(2, 4),
                               dm.beta(0.5, 0.5), dm.std_normal()],
                         ids=lambda d: d.name)
def test_normalization(d):
    assert dm.expectation_oracle(d, lambda x: 1.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("d", [dm.uniform(), dm.beta(1, 3), dm.beta(2, 4), dm.std_normal()],
                         ids=lambda d: d.name)
@pytest.mark.parametrize("l", range(1, 9))
def test_analytic_matches_oracle(d, l):
    oracle = dm.expectation_oracle(d, lambda x: x ** l)
    assert abs(dm.exact_polynomial_moment(d, l) - oracle) <= 1e-10


@pytest.mark.parametrize("d,g,expected", [
    (dm.beta(1, 3), math.exp, 3 * (-5 + 2 * E)),
    (dm.beta(2, 4), math.exp, 20 * (49 - 18 * E)),
    (dm.uniform(), lambda x: x ** 4.5, 2 / 11),
])
def test_oracle_exact_expectations(d, g, expected):
    assert dm.expectation_oracle(d, g) == pytest.approx(expected, rel=1e-10)


def test_oracle_reports_stall():
    wild = lambda x: math.sin(1e7 * x)  # noqa: E731
    with pytest.raises(NoConvergence):
        dm.expectation_oracle(dm.uniform(), wild)


def test_parse_density():
    assert dm.parse_density("beta:1,3") == dm.beta(1, 3)
    assert dm.parse_density("uniform") == dm.uniform()
    assert dm.parse_density("std_normal").kind == "std_normal"
    with pytest.raises(InvalidParams):
        dm.parse_density("gamma:2")


def test_pdf_vectorized_nonnegative():
    x = np.linspace(-0.5, 1.5, 101)
    for d in (dm.uniform(), dm.beta(1, 3), dm.beta(2, 4)):
        v = dm.pdf_eval(d, x)
        assert v.shape == x.shape and np.all(v >= 0)
        assert np.all(v[(x < 0) | (x > 1)] == 0)
