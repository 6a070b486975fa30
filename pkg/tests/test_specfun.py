import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orthofield.errors import DomainError, UnsupportedDimensionError
from orthofield.specfun import (
    BesselOrder,
    HarmonicIndex,
    bessel_j,
    bessel_j_table,
    harmonic_basis,
    harmonic_count,
    sphere_rule,
    spherical_harmonic,
    sqrtz_bessel_bounded,
)

# mpmath.besselj at 40 digits
BESSEL_ORACLE = [
    (0, 0.5, 0.93846980724081290423),
    (0, 25.0, 0.096266783275958116174),
    (0.5, 3.0, 0.065008182877375778114),
    (1, 1.8411837813, 0.58186522428159637933),
    (2.5, 7.3, -0.30084943158749980838),
    (10, 9.5, 0.16502640472619115732),
    (20, 15.0, 0.0073602340792234852583),
    (40, 35.0, 0.014965632617051043521),
    (40, 120.0, 0.07208864699736571712),
    (75.5, 60.0, 0.000038080483435464793365),
    (0, 999.0, 0.017369296355194131847),
    (3, 500.0, -0.010199473891695384945),
    (-0.5, 2.0, -0.23478571040624846917),
    (0.3, 12.0, -0.058942057108976803358),
]


@pytest.mark.parametrize("nu,z,expected", BESSEL_ORACLE)
def test_bessel_frozen_oracle(nu, z, expected):
    assert bessel_j(nu, z) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_bessel_live_mpmath_sweep():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    rng = np.random.default_rng(1)
    for nu in (0.0, 0.5, 1.0, 3.5, 12.0, 40.0):
        z = np.sort(rng.uniform(0.0, 1000.0, 40))
        got = bessel_j(nu, z)
        ref = np.array([float(mp.besselj(nu, t)) for t in z])
        assert np.all(np.abs(got - ref) <= np.maximum(1e-10 * np.abs(ref), 1e-12))


def test_bessel_trivial_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(2, 0.0) == 0.0
    assert abs(bessel_j(0.5, math.pi)) < 1e-15


@given(st.floats(0.01, 1000.0))
@settings(max_examples=200, deadline=None)
def test_half_integer_identity(z):
    expected = math.sqrt(2.0 / (math.pi * z)) * math.sin(z)
    assert bessel_j(0.5, z) == pytest.approx(expected, rel=1e-10, abs=1e-12)


@given(st.floats(0.5, 60.0), st.floats(0.05, 1000.0))
@settings(max_examples=200, deadline=None)
def test_bessel_recurrence(nu, z):
    lhs = bessel_j(nu - 0.5, z) + bessel_j(nu + 1.5, z)
    rhs = 2.0 * (nu + 0.5) / z * bessel_j(nu + 0.5, z)
    assert abs(lhs - rhs) < 1e-8


def test_bessel_table_matches_scalar():
    z = np.linspace(0.0, 150.0, 301)
    tab = bessel_j_table(0.5, 30, z)
    assert tab.shape == (30, 301)
    for k in (0, 1, 7, 29):
        np.testing.assert_allclose(tab[k], bessel_j(0.5 + k, z), rtol=1e-11, atol=1e-13)


def test_bessel_rejects_bad_inputs():
    with pytest.raises(DomainError):
        BesselOrder(-0.6)
    with pytest.raises(DomainError):
        bessel_j(1.0, -1.0)


def test_harmonic_count_cases():
    assert harmonic_count(0, 5) == 1
    assert harmonic_count(1, 7) == 7
    assert harmonic_count(2, 3) == 5
    assert [harmonic_count(m, 2) for m in range(5)] == [1, 2, 2, 2, 2]
    assert [harmonic_count(m, 3) for m in range(5)] == [1, 3, 5, 7, 9]


def _monomials(d, m):
    return [e for e in itertools.product(range(m + 1), repeat=d) if sum(e) == m]


def brute_force_harmonic_dim(m, d):
    """Nullity of the Laplacian from degree-m to degree-(m-2) homogeneous polynomials."""
    src = _monomials(d, m)
    if m < 2:
        return len(src)
    dst = {e: i for i, e in enumerate(_monomials(d, m - 2))}
    lap = np.zeros((len(dst), len(src)))
    for j, e in enumerate(src):
        for k in range(d):
            if e[k] >= 2:
                t = list(e)
                t[k] -= 2
                lap[dst[tuple(t)], j] += e[k] * (e[k] - 1)
    return len(src) - np.linalg.matrix_rank(lap)


@pytest.mark.parametrize("m,d", [(m, d) for m in range(5) for d in range(1, 6)])
def test_harmonic_count_brute_force(m, d):
    assert harmonic_count(m, d) == brute_force_harmonic_dim(m, d)


def test_spherical_harmonic_examples():
    pt2 = np.array([0.6, 0.8])
    assert spherical_harmonic(HarmonicIndex(0, 1, 2), pt2) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert spherical_harmonic(HarmonicIndex(1, 1, 2), np.array([1.0, 0.0])) == pytest.approx(1 / math.sqrt(math.pi))
    pt3 = np.array([0.0, 0.6, 0.8])
    assert spherical_harmonic(HarmonicIndex(0, 1, 3), pt3) == pytest.approx(1 / math.sqrt(4 * math.pi))


def test_spherical_harmonic_matches_scipy():
    special = pytest.importorskip("scipy.special")
    if not hasattr(special, "sph_harm_y"):
        pytest.skip("scipy without sph_harm_y")
    rng = np.random.default_rng(3)
    u = rng.standard_normal((25, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    polar = np.arccos(u[:, 2])
    azim = np.arctan2(u[:, 1], u[:, 0])
    for m in range(6):
        basis = harmonic_basis(m, 3, u)
        for mu in range(-m, m + 1):
            y = special.sph_harm_y(m, abs(mu), polar, azim)
            # drop the Condon-Shortley phase; real part for cos, imaginary for sin
            ref = (-1) ** abs(mu) * (y.real if mu >= 0 else y.imag)
            if mu != 0:
                ref = math.sqrt(2.0) * ref
            np.testing.assert_allclose(basis[m + mu], ref, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_orthonormality(d):
    pts, w = sphere_rule(d, 32)
    rows = np.concatenate([harmonic_basis(m, d, pts) for m in range(7)])
    gram = (rows * w) @ rows.T
    assert np.max(np.abs(gram - np.eye(len(rows)))) < 1e-8


@pytest.mark.parametrize("d", [2, 3])
def test_l1_bound(d):
    pts, w = sphere_rule(d, 64)
    area = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    for m in range(7):
        l1 = np.abs(harmonic_basis(m, d, pts)) @ w
        # equality at m = 0 (Cauchy-Schwarz is tight for constants)
        assert np.all(l1 <= math.sqrt(harmonic_count(m, d) * area) * (1 + 1e-12))


def test_harmonic_domain_errors():
    with pytest.raises(UnsupportedDimensionError):
        HarmonicIndex(1, 1, 4)
    with pytest.raises(DomainError):
        HarmonicIndex(2, 6, 3)
    with pytest.raises(DomainError):
        spherical_harmonic(HarmonicIndex(1, 1, 2), np.array([1.0, 1.0]))


def test_sqrtz_bessel_bounded():
    root = math.sqrt(2.0 / math.pi)
    assert sqrtz_bessel_bounded(0.5) == pytest.approx(root, rel=1e-8)
    assert sqrtz_bessel_bounded(-0.5) == pytest.approx(root, rel=1e-8)
    val = sqrtz_bessel_bounded(1.5)
    assert math.isfinite(val) and val < 1.0
