"""Backend parity: the compiled kernels must match the pure-python ones."""
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from bitemper import _kernels_py, kernels


def _random_problem(rng, p=14, m=4):
    bits = rng.integers(0, 2, p, dtype=np.uint8)
    modes = rng.integers(0, 2, (m, p), dtype=np.uint8)
    dists = np.sum(modes != bits[None, :], axis=1).astype(np.int64)
    return bits, dists, modes


ALL_CODES = (kernels.KIND_MIN, kernels.KIND_SQRT,
             kernels.KIND_BOUNDED_SQRT, kernels.KIND_MAX)


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")


def test_log_ratios_parity(rng):
    for _ in range(30):
        bits, dists, modes = _random_problem(rng)
        theta, beta = rng.uniform(0.3, 4.0), rng.uniform(0.1, 3.0)
        a = np.empty(bits.size)
        b = np.empty(bits.size)
        kernels.log_ratios(bits, dists, modes, theta, beta, a)
        _kernels_py.log_ratios(bits, dists, modes, theta, beta, b)
        assert np.allclose(a, b, atol=1e-12)
        for i in range(bits.size):
            s = kernels.single_log_ratio(bits, dists, modes, theta, beta, i)
            assert s == pytest.approx(a[i], abs=1e-12)


def test_log_h_parity(rng):
    lr = rng.normal(0, 4, 64)
    for code in ALL_CODES:
        for lg in (0.0, 1.7):
            a = np.asarray(kernels.log_h(lr, code, lg))
            b = np.asarray(_kernels_py.log_h(lr, code, lg))
            assert np.allclose(a, b, atol=1e-14)
            # scalar and 2-d forms
            assert kernels.log_h(float(lr[0]), code, lg) == pytest.approx(
                float(b[0]), abs=1e-14)
            two_d = kernels.log_h(lr.reshape(8, 8), code, lg)
            assert np.asarray(two_d).shape == (8, 8)
            assert np.allclose(np.asarray(two_d).ravel(), b, atol=1e-14)


def test_informed_step_parity(rng):
    for _ in range(60):
        lr = rng.normal(0, 3, 12)
        u = rng.random()
        for code in ALL_CODES:
            got = kernels.informed_step(lr, code, 0.9, u)
            want = _kernels_py.informed_step(lr, code, 0.9, u)
            assert got[0] == want[0]
            assert got[1] == pytest.approx(want[1], rel=1e-12)
            assert got[2] == pytest.approx(want[2], rel=1e-12)


def test_informed_step_choice_probabilities(rng):
    """The inverse-CDF choice matches the normalized h weights exactly."""
    lr = rng.normal(0, 2, 6)
    h = np.exp(_kernels_py.log_h(lr, kernels.KIND_SQRT, 0.0))
    cum = np.cumsum(h) / h.sum()
    for u in np.linspace(0.001, 0.999, 97):
        choice, z, _ = kernels.informed_step(lr, kernels.KIND_SQRT, 0.0, u)
        assert choice == int(np.searchsorted(cum, u, side="right"))
        assert z == pytest.approx(h.mean(), rel=1e-12)


def test_ssiit_advance_parity(rng):
    for trial in range(10):
        bits, dists, modes = _random_problem(rng, p=10, m=3)
        bits2, dists2 = bits.copy(), dists.copy()
        u_prop = rng.random(40)
        u_acc = 1.0 - rng.random(40)
        args = (modes, 1.4, 0.8, 0.3, 1, 0.5, u_prop, u_acc,
                kernels.KIND_BOUNDED_SQRT)
        lg_a, acc_a = kernels.ssiit_advance(bits, dists, *args)
        lg_b, acc_b = _kernels_py.ssiit_advance(bits2, dists2, *args)
        assert acc_a == acc_b
        assert lg_a == pytest.approx(lg_b, abs=1e-12)
        assert np.array_equal(bits, bits2)
        assert np.array_equal(dists, dists2)


def test_pure_env_var_forces_python_backend():
    env = dict(os.environ, BITEMPER_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from bitemper import kernels; print(kernels.BACKEND)"],
        capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"


def test_mode_count_cap():
    if kernels.BACKEND != "cython":
        pytest.skip("cap applies to the compiled backend")
    bits = np.zeros(4, dtype=np.uint8)
    modes = np.zeros((65, 4), dtype=np.uint8)
    dists = np.zeros(65, dtype=np.int64)
    out = np.empty(4)
    with pytest.raises(ValueError):
        kernels.log_ratios(bits, dists, modes, 1.0, 1.0, out)
