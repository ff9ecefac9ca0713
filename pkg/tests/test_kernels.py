"""Compiled and pure-numpy kernels agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from lambdacpa import kernels

pytestmark = pytest.mark.skipif(kernels.numba_impl is None, reason="numba not installed")


def _matched(a, b):
    a, b = a[~np.isnan(a)], b[~np.isnan(b)]
    assert a.size == b.size
    return max((np.min(np.abs(b - z)) / max(1.0, abs(z)) for z in a), default=0.0)


def test_roots_backends_agree():
    rng = np.random.default_rng(1)
    coeffs = rng.normal(size=(300, 8))
    coeffs[:, -1] = np.abs(coeffs[:, -1]) + 0.1
    a = kernels.numpy_impl.poly_roots_batch(coeffs, 3)
    b = kernels.numba_impl.poly_roots_batch(coeffs, 3)
    assert max(_matched(x, y) for x, y in zip(a, b)) < 1e-10
    for row, roots in zip(coeffs, a):
        want = np.roots(row[::-1])
        assert _matched(roots, want) < 1e-8


def test_roots_known():
    # (x - 1)(x - 2)(x + 3)
    r = kernels.poly_roots_batch(np.array([6.0, -7.0, 0.0, 1.0]))
    assert np.allclose(np.sort(r[0].real), [-3, 1, 2])


def test_rhs_and_integrate_backends_agree():
    rng = np.random.default_rng(2)
    y = rng.normal(size=10) + 1j * rng.normal(size=10)
    p = np.abs(rng.normal(size=kernels.N_PARAMS))
    p[kernels.P_LINDBLAD_PUMP] = 1.0
    assert np.allclose(kernels.numpy_impl.rhs(y, p), kernels.numba_impl.rhs(y, p), rtol=1e-13, atol=1e-13)
    y0 = np.zeros(10, complex)
    y0[0] = 1
    p = np.zeros(kernels.N_PARAMS)
    p[[kernels.P_DELTA_P, kernels.P_G, kernels.P_GN, kernels.P_GAMMA31, kernels.P_KAPPA, kernels.P_SRC_RE]] = \
        [2.0, 0.02, 5000.0, 1.0, 1.0, 30.0]
    a = kernels.numpy_impl.integrate(y0, p, 50.0, 1e-2, 1e-10, 1e-9, 0.0, 0)
    b = kernels.numba_impl.integrate(y0, p, 50.0, 1e-2, 1e-10, 1e-9, 0.0, 0)
    assert np.allclose(a[0], b[0], atol=1e-10)
    assert a[3] == b[3]


def test_env_flag_selects_numpy():
    code = "from lambdacpa import kernels, BACKEND; print(kernels.BACKEND, BACKEND)"
    env = dict(os.environ, LAMBDACPA_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "numpy"]
    env["LAMBDACPA_BACKEND"] = "fortran"
    bad = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert bad.returncode != 0


def test_cli_output_identical_across_backends(tmp_path):
    args = [sys.executable, "-m", "lambdacpa", "curve", "--variant", "two-level", "--delta-p", "6",
            "--iin-min", "0", "--iin-max", "300", "--iin-steps", "30"]
    outs = []
    for backend in ("numba", "numpy"):
        env = dict(os.environ, LAMBDACPA_BACKEND=backend)
        outs.append(subprocess.run(args, env=env, capture_output=True, text=True, check=True).stdout)
    assert outs[0] == outs[1]
