import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from vofde.errors import BranchCutError, PoleError
from vofde.transition import (
    ExponentialTransition,
    circle_bound,
    laplace_order,
    magnitude_decomposition,
    order_at,
    phi_hat,
    psi_hat,
    psi_hat_h,
    s_alpha_product,
)

orders = st.floats(0.05, 0.95)
rates = st.floats(0.1, 10.0)
transitions = st.builds(ExponentialTransition, orders, orders, rates)
right_half = st.builds(complex, st.floats(0.05, 50.0), st.floats(-50.0, 50.0))


def test_order_endpoints(tr):
    assert order_at(tr, 0.0) == 0.6
    t = np.linspace(20, 200, 50)
    assert np.abs(order_at(tr, t) - 0.8).max() < 1e-12
    assert np.all(order_at(ExponentialTransition(0.5, 0.5, 1.0), np.linspace(0, 9, 10)) == 0.5)


@pytest.mark.parametrize("bad", [(1.5, 0.5, 1.0), (0.5, 0.0, 1.0), (0.5, 0.5, 0.0), (0.5, 0.5, -1.0)])
def test_constructor_rejects(bad):
    with pytest.raises(ValueError):
        ExponentialTransition(*bad)


def test_laplace_order_closed_form(tr):
    assert laplace_order(tr, 1.0) == pytest.approx(2.2 / 3, rel=1e-15)
    co = ExponentialTransition(0.4, 0.4, 3.0)
    assert laplace_order(co, 2 - 1j) == pytest.approx(0.4 / (2 - 1j), rel=1e-15)


def test_laplace_order_against_quadrature():
    tr = ExponentialTransition(0.5, 0.9, 1.0)
    s = 1 + 1j
    re = integrate.quad(lambda t: order_at(tr, t) * math.exp(-t) * math.cos(t), 0, np.inf, epsabs=1e-14)[0]
    im = integrate.quad(lambda t: -order_at(tr, t) * math.exp(-t) * math.sin(t), 0, np.inf, epsabs=1e-14)[0]
    assert abs(laplace_order(tr, s) - complex(re, im)) < 1e-12


def test_s_alpha_limits(tr):
    assert s_alpha_product(tr, 2.0) == pytest.approx(0.7, abs=1e-15)
    assert abs(s_alpha_product(tr, 2e9) - 0.6) < 1e-8
    assert s_alpha_product(tr, 0.0) == 0.8
    with pytest.raises(PoleError):
        s_alpha_product(tr, -2.0)


@given(transitions, st.floats(0.0, 2 * math.pi))
def test_s_alpha_continuous_across_switch(tr, theta):
    # the two algebraic forms meet on |s| = c
    s = tr.c * cmath.exp(1j * theta)
    if abs(s + tr.c) < 1e-3:
        return
    inside, outside = s * (1 - 1e-12), s * (1 + 1e-12)
    assert abs(s_alpha_product(tr, inside) - s_alpha_product(tr, outside)) < 1e-9


@given(transitions, right_half)
def test_sonine_in_laplace_domain(tr, s):
    assert abs(psi_hat(tr, s) * phi_hat(tr, s) * s - 1) < 1e-13


def test_sonine_example():
    for tr in (ExponentialTransition(0.6, 0.8, 2), ExponentialTransition(0.3, 0.9, 0.5)):
        s = 2 + 3j
        assert abs(psi_hat(tr, s) * phi_hat(tr, s) * s - 1) < 1e-14


@given(orders, rates, right_half)
def test_constant_order_power(alpha, c, s):
    tr = ExponentialTransition(alpha, alpha, c)
    assert abs(psi_hat(tr, s) - s ** -alpha) <= 1e-14 * abs(s ** -alpha)


def test_psi_at_one(tr):
    assert psi_hat(tr, 1.0) == 1.0


def test_branch_cut_rejected(tr):
    with pytest.raises(BranchCutError):
        psi_hat(tr, -1.0)
    with pytest.raises(BranchCutError):
        phi_hat(tr, 0.0)
    with pytest.raises(BranchCutError):
        psi_hat_h(tr, 0.1, 1.5)


@given(transitions, st.floats(1e-3, 0.9))
def test_psi_h_constant_term(tr, h):
    expected = h ** ((tr.alpha2 * tr.c * h + tr.alpha1) / (tr.c * h + 1))
    assert psi_hat_h(tr, h, 0.0) == pytest.approx(expected, rel=1e-14)


def test_psi_h_constant_order():
    tr = ExponentialTransition(0.7, 0.7, 1.0)
    assert psi_hat_h(tr, 0.1, 0.3) == pytest.approx(0.1**0.7 * 0.7**-0.7, rel=1e-14)


def test_psi_h_composition(tr):
    h, xi = 2.0**-4, 0.5j
    assert abs(psi_hat_h(tr, h, xi) - psi_hat(tr, (1 - xi) / h)) < 1e-14 * abs(psi_hat_h(tr, h, xi))


def test_magnitude_decomposition(tr, rng):
    h = 2.0**-5
    rad = np.sqrt(rng.uniform(0, 1, 200)) * 0.999
    xi = rad * np.exp(2j * np.pi * rng.uniform(0, 1, 200))
    md = magnitude_decomposition(tr, h, xi)
    direct = np.abs(psi_hat_h(tr, h, xi))
    assert np.max(np.abs(md.magnitude / direct - 1)) < 1e-13

    real = magnitude_decomposition(tr, h, np.array([0.2, -0.5, 0.9]))
    assert np.all(real.Bxy == 0)
    co = magnitude_decomposition(ExponentialTransition(0.4, 0.4, 1.0), h, xi)
    assert np.allclose(co.Axy, 0.4, atol=1e-15) and np.allclose(co.Bxy, 0.0, atol=1e-15)


def test_circle_bound_dominates_samples(tr):
    h, r = 2.0**-6, 0.9
    theta = np.linspace(0, 2 * np.pi, 10_000, endpoint=False)
    sampled = np.abs(psi_hat_h(tr, h, r * np.exp(1j * theta))).max()
    assert sampled <= circle_bound(tr, h, r)
    assert circle_bound(tr, h, 0.5) <= circle_bound(tr, h, 0.9)


def test_circle_bound_constant_order():
    tr = ExponentialTransition(0.5, 0.5, 3.0)
    h, r = 0.05, 0.6
    assert circle_bound(tr, h, r) == pytest.approx(h**0.5 * (1 - r) ** -0.5, rel=1e-14)


def test_circle_bound_domain(tr):
    with pytest.raises(ValueError):
        circle_bound(tr, 0.5, 0.6)
