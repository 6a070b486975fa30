import math

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st
from scipy.integrate import quad
from scipy.linalg import cholesky

from orthofield.errors import DomainError
from orthofield.kernels import CovarianceModel, Theta, kernel_eval, radial_measure_cdf, spectral_eval

positive = st.floats(0.05, 20.0)


def test_theta_validation():
    for bad in [(0.0, 1.0), (1.0, -1.0), (math.inf, 1.0), (1.0, math.nan)]:
        with pytest.raises(DomainError):
            Theta(*bad)


def test_kernel_examples():
    assert kernel_eval(CovarianceModel(Theta(1, 1)), 0.0) == 1.0
    assert kernel_eval(CovarianceModel(Theta(2, 0.5)), 1.0) == pytest.approx(1.2130613194252668, rel=1e-14)
    far = kernel_eval(CovarianceModel(Theta(1, 1)), np.array([1.0, 10.0, 100.0, 1000.0]))
    assert np.all(np.diff(far) < 0) and far[-1] == 0.0
    with pytest.raises(DomainError):
        kernel_eval(CovarianceModel(Theta(1, 1)), -0.1)


def test_spectral_examples_d1():
    g = CovarianceModel(Theta(1, 1)).spectral_density()
    assert spectral_eval(g, 0.0) == pytest.approx(1 / math.pi, rel=1e-15)
    assert spectral_eval(g, 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-15)


@given(positive, positive, st.floats(0.0, 50.0))
@settings(max_examples=100, deadline=None)
def test_d1_density_is_paper_formula(s2, a, k):
    g = CovarianceModel(Theta(s2, a)).spectral_density()
    assert spectral_eval(g, k) == pytest.approx(s2 * a / (math.pi * (a * a + k * k)), rel=1e-13)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_density_positive_bounded(d):
    g = CovarianceModel(Theta(1.3, 0.7), d).spectral_density()
    k = np.linspace(0.0, 100.0, 1001)
    v = spectral_eval(g, k)
    assert np.all(v > 0) and v.max() == v[0]


@pytest.mark.parametrize("d", [1, 2, 3])
def test_total_spectral_mass(d):
    g = CovarianceModel(Theta(2.5, 0.8), d).spectral_density()
    assert radial_measure_cdf(g, math.inf) == pytest.approx(2.5, rel=1e-10)


@given(st.floats(0.0, 1e4))
@settings(max_examples=50, deadline=None)
def test_cdf_d1_closed_form(b):
    g = CovarianceModel(Theta(1, 1)).spectral_density()
    assert radial_measure_cdf(g, b) == pytest.approx(2 / math.pi * math.atan(b), rel=1e-10, abs=1e-14)


def test_cdf_monotone_and_zero():
    g = CovarianceModel(Theta(1, 2), 3).spectral_density()
    vals = [radial_measure_cdf(g, b) for b in (0.0, 0.1, 1.0, 5.0, 50.0, math.inf)]
    assert vals[0] == 0.0 and all(b >= a for a, b in zip(vals, vals[1:]))


def test_cdf_d2_against_quad():
    g = CovarianceModel(Theta(1, 1), 2).spectral_density()
    ref, _ = quad(lambda k: 2 * math.pi * k * spectral_eval(g, k), 0, 7.0, epsabs=1e-14)
    assert radial_measure_cdf(g, 7.0) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("tau", [0.0, 0.5, 1.0, 2.0])
def test_fourier_consistency_d1(tau):
    g = CovarianceModel(Theta(1, 1)).spectral_density()
    # 2 * int_0^inf cos(k tau) g(k) dk, oscillatory weight handled by QAWF
    if tau == 0.0:
        val = 2 * quad(lambda k: spectral_eval(g, k), 0, np.inf)[0]
    else:
        val = 2 * quad(lambda k: spectral_eval(g, k), 0, np.inf, weight="cos", wvar=tau)[0]
    assert val == pytest.approx(kernel_eval(CovarianceModel(Theta(1, 1)), tau), abs=1e-6)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_positive_definite_witness(d):
    rng = np.random.default_rng(d)
    pts = rng.uniform(-2, 2, (50, d))
    cholesky(CovarianceModel(Theta(1.0, 1.5), d).matrix(pts), lower=True)


def test_matrix_entries_are_kernel_values():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(7, 2))
    model = CovarianceModel(Theta(1.7, 0.4), 2)
    tau = np.linalg.norm(x[:, None] - x[None], axis=-1)
    mat = model.matrix(x)
    np.testing.assert_allclose(mat, kernel_eval(model, tau), rtol=1e-15)
    np.testing.assert_array_equal(mat, mat.T)
    np.testing.assert_allclose(model.matrix(x, x[:3]), mat[:, :3], rtol=1e-15)


@given(positive, positive, st.floats(0, 10), st.floats(0, 10))
@example(1.0, 5.0, 0.0, 1e-17)
@settings(max_examples=100, deadline=None)
def test_lipschitz(s2, a, t1, t2):
    m = CovarianceModel(Theta(s2, a))
    # a few ulps of sigma2 absorb rounding in exp when |t1 - t2| is tiny
    slack = 4 * np.finfo(float).eps * s2
    assert abs(kernel_eval(m, t1) - kernel_eval(m, t2)) <= s2 * a * abs(t1 - t2) * (1 + 1e-12) + slack


def test_distinct_parameters_give_distinct_kernels():
    tau = np.linspace(0, 1, 101)
    pairs = [((1, 1), (2, 1)), ((1, 1), (1, 2)), ((1, 2), (2, 1))]
    for t1, t2 in pairs:
        diff = kernel_eval(CovarianceModel(Theta(*t1)), tau) - kernel_eval(CovarianceModel(Theta(*t2)), tau)
        assert np.max(np.abs(diff)) > 0
