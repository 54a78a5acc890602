import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vofde.analysis import (
    ROOT_TOL,
    RelaxationSpec,
    find_singularities,
    g_function,
    kernel_ratio_study,
    reference_relaxation,
    relaxation_difference_study,
    scan_singularities,
    sonine_convolution,
    transform_H,
)
from vofde.experiments import FIG3_SETS
from vofde.laplace_inversion import Contour, ContourSpec
from vofde.mittag_leffler import relaxation_co
from vofde.transition import ExponentialTransition


def test_transform_H_values(tr):
    assert transform_H(RelaxationSpec(tr, 1.0), 1.0) == pytest.approx(0.5, abs=1e-15)
    s = 1e8
    assert s * transform_H(RelaxationSpec(tr, 1.0), s) == pytest.approx(1.0, abs=1e-4)


@given(st.floats(0.1, 0.9), st.floats(0.1, 5.0), st.builds(complex, st.floats(0.1, 10), st.floats(-10, 10)))
def test_transform_H_constant_order(alpha, lam, s):
    spec = RelaxationSpec(ExponentialTransition(alpha, alpha, 1.0), lam)
    expected = s ** (alpha - 1) / (s**alpha + lam)
    assert abs(transform_H(spec, s) - expected) <= 1e-13 * abs(expected)


@pytest.mark.parametrize("lam", [0.3, 1.0, 2.5])
def test_reference_matches_co(lam):
    spec = RelaxationSpec(ExponentialTransition(0.6, 0.6, 2.0), lam, 1.0)
    ts = np.geomspace(0.05, 20, 30)
    assert np.max(np.abs(reference_relaxation(spec, ts) - relaxation_co(0.6, lam, 1.0, ts))) < 1e-8


def test_reference_initial_value(tr):
    spec = RelaxationSpec(tr, 1.0, 2.0)
    assert reference_relaxation(spec, 0.0) == 2.0
    assert abs(reference_relaxation(spec, 1e-8) - 2.0) < 1e-2


def test_roots_certified_and_paired():
    tr = ExponentialTransition(0.6, 0.8, 2.0)
    for lam in (0.5, 2.0, 5.0):
        roots = find_singularities(tr, lam)
        assert roots, "expected complex roots in the default box"
        for z in roots:
            assert abs(g_function(tr, lam, z)) < ROOT_TOL
            assert not (abs(z.imag) < 1e-9 and z.real <= 0)
            assert any(abs(w - z.conjugate()) < 1e-8 for w in roots)


@pytest.mark.parametrize("params", FIG3_SETS)
def test_scan_continuity(params):
    scan = scan_singularities(ExponentialTransition(*params))
    assert all(max(r, default=0.0) < ROOT_TOL for r in scan.residuals)
    assert scan.unexplained_events() == []
    assert np.nanmax(scan.max_jump) < 0.5


@pytest.mark.parametrize("params", FIG3_SETS)
def test_contour_right_of_roots(params):
    tr = ExponentialTransition(*params)
    for lam in np.geomspace(0.01, 5.0, 8):
        roots = find_singularities(tr, lam)
        # reference_relaxation raises ContourError if a window fails to enclose a root
        reference_relaxation(RelaxationSpec(tr, lam), np.geomspace(0.1, 10, 5), roots=roots)


def test_kernel_ratios(tr):
    kr = kernel_ratio_study(tr, np.geomspace(1e-3, 1, 13), np.geomspace(1, 1e3, 13))
    for curve in (kr.psi_small, kr.phi_small, kr.psi_large, kr.phi_large):
        assert 0.9 <= curve[0] <= 1.1 or 0.9 <= curve[-1] <= 1.1
        assert np.all(curve > 0)
    assert 0.9 <= kr.psi_small[0] <= 1.1 and 0.9 <= kr.phi_small[0] <= 1.1
    assert 0.9 <= kr.psi_large[-1] <= 1.1 and 0.9 <= kr.phi_large[-1] <= 1.1


def test_kernel_ratios_constant_order():
    tr = ExponentialTransition(0.7, 0.7, 1.0)
    kr = kernel_ratio_study(tr, np.geomspace(1e-3, 1, 5), np.geomspace(1, 1e3, 5))
    for curve in (kr.psi_small, kr.phi_small, kr.psi_large, kr.phi_large):
        assert np.allclose(curve, 1.0, atol=1e-8)


def test_relaxation_differences(tr):
    d = relaxation_difference_study(RelaxationSpec(tr, 1.0), np.array([1e-3, 1.0, 50.0]))
    assert abs(d.diff_alpha1[0]) < abs(d.diff_alpha1[1])
    assert abs(d.diff_alpha2[-1]) < 1e-2


def test_relaxation_differences_degenerate():
    tr = ExponentialTransition(0.6, 0.6, 1.0)
    d = relaxation_difference_study(RelaxationSpec(tr, 1.0), np.geomspace(1e-3, 50, 12))
    assert np.max(np.abs(d.diff_alpha1)) < 1e-8 and np.max(np.abs(d.diff_alpha2)) < 1e-8


@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_sonine_pair(tr, t):
    assert abs(sonine_convolution(tr, t) - 1.0) < 1e-6
