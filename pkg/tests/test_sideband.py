import numpy as np
import pytest

from omit_chain import SingularSystem, assemble, eps_t_direct, preset, solve_linear, validate
from omit_chain.sideband import eps_t_direct_grid


def chain(kappas, G, hopping, gamma_m=0.001, atom=None, eps_p=1.0):
    raw = {"cavities": [{"kappa": k, "omega_m": 20.0, "gamma_m": gamma_m, "G_m": g} for k, g in zip(kappas, G)],
           "hopping": hopping, "drive": {"eps_c": 1.0, "eps_p": eps_p}}
    if atom is not None:
        raw["atom"] = atom
    return validate(raw, warn=False)


def test_single_unknown():
    s = assemble(chain([2.0], [0.0], []), 20.0)
    assert s.dim == 1
    np.testing.assert_array_equal(s.rhs, [1.0])


def test_dimension_counts_unknowns():
    m = preset("fig2d")
    m = m.__class__(**{**m.__dict__, "atom": preset("fig5").atom})
    assert assemble(m, 20.0).dim == 4 + 4 + 3
    assert assemble(preset("fig4a"), 20.0).dim == 4
    assert assemble(preset("fig7"), 20.0).dim == 7


def test_rhs_only_in_driven_row():
    s = assemble(preset("fig6", V=4), 21.0)
    nz = np.flatnonzero(s.rhs)
    assert nz.tolist() == [s.index_map[("c", 4)]]


def test_population_drive_on_sigma_er_row():
    m = chain([2.0], [0.0], [], atom={"cavity": 1, "pop_gg": 0.5, "pop_rr": 0.3, "pop_ee": 0.1})
    s = assemble(m, 20.0)
    assert s.rhs[s.index_map[("sigma_er",)]] == pytest.approx(1j * 1.0 * (0.3 - 0.1))


def test_solve_identity(backend):
    r = np.array([1 + 2j, -3, 0.5j])
    np.testing.assert_array_equal(solve_linear(np.eye(3), r), r)


def test_solve_zero_matrix(backend):
    with pytest.raises(SingularSystem):
        solve_linear(np.zeros((3, 3)), np.ones(3))


def test_solve_random_residual(backend, rng):
    for _ in range(20):
        M = rng.normal(size=(11, 11)) + 1j * rng.normal(size=(11, 11)) + 4 * np.eye(11)
        r = rng.normal(size=11) + 1j * rng.normal(size=11)
        u = solve_linear(M, r)
        bound = 1e-10 * (np.abs(M).sum(1).max() * np.abs(u).max() + np.abs(r).max())
        assert np.abs(M @ u - r).max() <= bound


def test_bare_cavity_on_resonance(backend):
    assert eps_t_direct(chain([2.0], [0.0], []), 20.0).eps_t == 2.0


def test_single_cavity_omit(backend):
    out = eps_t_direct(chain([2.0], [1.0], []), 20.0)
    assert out.eps_t == pytest.approx(4 / 1002, abs=1e-12)
    assert out.chi_p == out.eps_t.real and out.chi_tilde_p == out.eps_t.imag


def test_two_cavity_chain(backend):
    out = eps_t_direct(chain([0.002, 2.0], [0.0, 0.0], [2.0]), 20.0)
    assert out.eps_t == pytest.approx(4 / 2002, abs=1e-12)


def test_oscillator_elimination_identity(rng):
    # eliminating b from the 2x2 block gives the B_j term in the cavity row
    for _ in range(20):
        k, gm, G, x = rng.uniform(0.01, 3), rng.uniform(1e-3, 0.1), rng.uniform(0.1, 2), rng.uniform(-5, 5)
        m = chain([k], [G], [], gamma_m=gm)
        M = assemble(m, 20.0 + x).matrix
        schur = M[0, 0] - M[0, 1] * M[1, 0] / M[1, 1]
        assert schur == pytest.approx(k - 1j * x + G**2 / (gm - 1j * x), rel=1e-13)


def test_probe_amplitude_scaling():
    x = np.linspace(-4, 4, 101)
    a = eps_t_direct_grid(preset("fig6", V=2), x)
    m = preset("fig6", V=2)
    b = eps_t_direct_grid(m.__class__(**{**m.__dict__, "eps_p": 37.5}), x)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_conjugate_symmetry_atom_free():
    x = np.linspace(0.0, 6.0, 301)
    for name in ("fig2b", "fig4d"):
        m = preset(name)
        np.testing.assert_allclose(eps_t_direct_grid(m, -x), np.conj(eps_t_direct_grid(m, x)), atol=1e-12)
