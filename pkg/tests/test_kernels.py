import numpy as np
import pytest

from omit_chain import kernels
from omit_chain._accel import HAVE_NUMBA


def _random_systems(rng, n, d):
    M = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    M += d * np.eye(d)
    r = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return M, r


def test_solve_batch_matches_lapack(backend, rng):
    M, r = _random_systems(rng, 50, 11)
    u, singular = kernels.solve_batch(M, r)
    assert not singular.any()
    np.testing.assert_allclose(u, np.linalg.solve(M, r[..., None])[..., 0], rtol=1e-12, atol=1e-14)


def test_solve_batch_needs_pivoting(backend):
    M = np.array([[[0, 1], [1, 0]]], dtype=complex)
    r = np.array([[2, 3]], dtype=complex)
    u, singular = kernels.solve_batch(M, r)
    assert not singular[0]
    np.testing.assert_allclose(u[0], [3, 2])


def test_solve_batch_flags_only_singular_members(backend, rng):
    M, r = _random_systems(rng, 4, 5)
    M[1] = 0.0
    M[3, :, 2] = 0.0
    u, singular = kernels.solve_batch(M, r)
    assert singular.tolist() == [False, True, False, True]
    np.testing.assert_allclose(u[0], np.linalg.solve(M[0], r[0]), rtol=1e-12)


def test_cf_grid_single_cavity(backend):
    x = np.array([-1.0, 0.0, 2.5])
    out, bad = kernels.cf_grid(x, np.zeros(1), np.array([2.0]), np.array([0.001]),
                               np.array([1.0]), np.zeros(0), np.zeros(3, complex), -1)
    assert bad == -1
    expected = 4.0 / (2.0 - 1j * x + 1.0 / (0.001 - 1j * x))
    np.testing.assert_allclose(out, expected, rtol=1e-15)


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")
def test_backends_agree(rng):
    x = rng.uniform(-5, 5, 300)
    args = (x, rng.uniform(-1, 1, 5), rng.uniform(0.01, 2, 5), rng.uniform(0.001, 0.1, 5),
            rng.uniform(0, 2, 5), rng.uniform(0.5, 3, 4), rng.normal(size=300) + 0j, 2)
    a, _ = kernels.cf_grid_numba(*args)
    b, _ = kernels.cf_grid_numpy(*args)
    np.testing.assert_allclose(a, b, rtol=1e-14)
    M, r = _random_systems(rng, 40, 9)
    np.testing.assert_allclose(kernels.solve_batch_numba(M, r)[0],
                               kernels.solve_batch_numpy(M, r)[0], rtol=1e-12)


def test_env_flag_selects_numpy(monkeypatch):
    import importlib

    from omit_chain import _accel

    monkeypatch.setenv("OMIT_CHAIN_DISABLE_NUMBA", "1")
    try:
        importlib.reload(_accel)
        importlib.reload(kernels)
        assert kernels.BACKEND == "numpy"
        assert kernels.solve_batch is kernels.solve_batch_numpy
    finally:
        monkeypatch.delenv("OMIT_CHAIN_DISABLE_NUMBA")
        importlib.reload(_accel)
        importlib.reload(kernels)
