import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from vofde.mittag_leffler import ml_series, relaxation_co


def test_exponential_case():
    assert ml_series(1.0, -1.0) == pytest.approx(math.exp(-1), abs=1e-12)


@given(st.floats(0.05, 1.0))
def test_zero_argument(beta):
    assert ml_series(beta, 0.0) == 1.0


def test_erfc_identity_via_quadrature():
    # e * erfc(1) with erfc from an independent quadrature
    erfc1 = 2 / math.sqrt(math.pi) * integrate.quad(lambda x: math.exp(-x * x), 1, np.inf, epsabs=1e-16)[0]
    assert ml_series(0.5, -1.0) == pytest.approx(math.e * erfc1, abs=1e-10)


@given(st.floats(0.3, 1.0), st.floats(-5.0, 5.0))
def test_against_mpmath_sum(beta, z):
    # plain partial sum, with precision sized to the largest term so cancellation cannot bite
    peak = max(k * math.log(abs(z) + 1e-300) - math.lgamma(beta * k + 1) for k in range(1, 3000))
    with mpmath.workdps(60 + int(max(peak, 0) / math.log(10))):
        zz, b, ref = mpmath.mpf(z), mpmath.mpf(beta), mpmath.mpf(0)
        for k in range(20_000):
            term = zz**k / mpmath.gamma(b * k + 1)
            ref += term
            if k > 10 and abs(term) < mpmath.mpf(10) ** -40 * (1 + abs(ref)):
                break
    assert ml_series(beta, z) == pytest.approx(float(ref), rel=1e-12, abs=1e-14)


def test_out_of_range():
    with pytest.raises(ValueError):
        ml_series(0.5, -6.0)
    with pytest.raises(ValueError):
        ml_series(0.2, -5.0)


def test_relaxation_initial_value():
    ys = relaxation_co(0.6, 1.0, 2.5, [0.0, 1.0])
    assert ys[0] == 2.5


def test_relaxation_classical():
    assert relaxation_co(1.0, 1.0, 1.0, [2.0])[0] == pytest.approx(math.exp(-2), abs=1e-9)


@pytest.mark.parametrize("alpha,lam,t", [(0.6, 1.0, 1.0), (0.3, 0.5, 2.0), (0.9, 2.0, 0.7), (0.75, 1.0, 4.0)])
def test_relaxation_against_series(alpha, lam, t):
    y = relaxation_co(alpha, lam, 1.0, [t])[0]
    assert y == pytest.approx(ml_series(alpha, -lam * t**alpha), abs=1e-12)
