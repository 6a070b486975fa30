import os
import subprocess
import sys

import numpy as np
import pytest

from orthofield import _kernels_numba as nb
from orthofield import _kernels_numpy as npk

rng = np.random.default_rng(0)
Z = np.ascontiguousarray(np.concatenate([[0.0, 1e-8, 7.999, 8.0, 25.0], rng.uniform(0, 1000, 2000)]))


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 1.0, 3.3, 17.5, 60.0])
def test_jv_backends_agree(nu):
    np.testing.assert_allclose(nb.jv_array(nu, Z), npk.jv_array(nu, Z), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("nu_lo", [-0.5, 0.0, 0.5, 2.0])
def test_bessel_table_backends_agree(nu_lo):
    np.testing.assert_allclose(nb.bessel_table(nu_lo, 45, Z), npk.bessel_table(nu_lo, 45, Z), rtol=1e-11, atol=1e-14)


def test_matrix_kernels_agree():
    x = np.ascontiguousarray(rng.normal(size=(60, 3)))
    y = np.ascontiguousarray(rng.normal(size=(40, 3)))
    np.testing.assert_allclose(nb.exp_cov_matrix(x, y, 1.3, 0.7), npk.exp_cov_matrix(x, y, 1.3, 0.7), rtol=1e-14)
    a, b = nb.exp_cov_symmetric(x, 1.3, 0.7), npk.exp_cov_symmetric(x, 1.3, 0.7)
    np.testing.assert_allclose(a, b, rtol=1e-14)
    np.testing.assert_array_equal(a, a.T)
    np.testing.assert_array_equal(np.diag(b), 1.3)
    r = np.ascontiguousarray(np.linspace(0.01, 10, 64))
    w = np.full(64, 0.1)
    np.testing.assert_allclose(nb.hankel_matrix(1.5, r, w, r), npk.hankel_matrix(1.5, r, w, r), rtol=1e-12, atol=1e-13)


def test_env_flag_selects_numpy():
    env = {**os.environ, "ORTHOFIELD_BACKEND": "numpy"}
    out = subprocess.run(
        [sys.executable, "-c", "import orthofield; print(orthofield.BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"
