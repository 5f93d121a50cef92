import numpy as np
import pytest

from omit_chain import NonConvergence, lambda_bar, solve_steady, validate
from omit_chain.model import CavityParams
from omit_chain.steady_state import self_consistent_couplings, steady_residual

REF_CAVITY = CavityParams(kappa=2.0, omega_m=20.0, gamma_m=0.001, g_m=1.0)


def single(eps_c=1.0, g_m=1.0):
    return validate({"cavities": [{"kappa": 2.0, "omega_m": 20.0, "gamma_m": 0.001, "g_m": g_m}],
                     "hopping": [], "drive": {"eps_c": eps_c, "eps_p": 1.0}}, warn=False)


def test_lambda_bar_values():
    assert lambda_bar(0.0, REF_CAVITY) == 0.0
    # 2·20·1 / (0.001² + 20²)
    assert lambda_bar(1.0, REF_CAVITY) == pytest.approx(0.09999999975, rel=1e-14)
    assert lambda_bar(2.0, REF_CAVITY) == pytest.approx(2 * lambda_bar(1.0, REF_CAVITY), rel=1e-15)


def test_undriven_chain_is_empty():
    from omit_chain import preset
    from dataclasses import replace

    m = replace(preset("fig2d"), eps_c=0.0)
    st = solve_steady(m)
    assert np.all(st.c_bar == 0) and np.all(st.lambda_bar == 0)


def test_no_radiation_pressure_closed_form():
    st = solve_steady(single(g_m=0.0), 20.0)
    assert st.iterations == 1
    assert st.c_bar[0] == pytest.approx(1 / (2 + 20j), abs=1e-15)
    assert abs(st.c_bar[0]) ** 2 == pytest.approx(1 / 404, rel=1e-12)


def test_self_consistent_fixed_point():
    m = single()
    st = solve_steady(m, 20.0)
    assert st.residual < 1e-10
    assert steady_residual(m, [20.0], st.c_bar) < 1e-10
    c2 = abs(st.c_bar[0]) ** 2
    assert st.lambda_bar[0] == pytest.approx(2 * 20 * c2 / 400.000001, rel=1e-12)
    assert st.delta_tilde[0] == pytest.approx(20.0 - st.lambda_bar[0], rel=1e-15)
    # substitution check: (κ + iΔ̃)c̄ = ε_c
    assert (2.0 + 1j * st.delta_tilde[0]) * st.c_bar[0] == pytest.approx(1.0, abs=1e-10)


def test_monotone_driving():
    mags = [abs(solve_steady(single(eps_c=e), 20.0).c_bar[0]) for e in np.linspace(0, 1, 41)]
    assert np.all(np.diff(mags) >= 0)


def test_chain_residual_at_reference_drive():
    from omit_chain import preset

    for name in ("fig2d", "fig4b", "fig6"):
        m = preset(name)
        st = solve_steady(m)
        assert st.residual < 1e-10
        assert np.all(st.lambda_bar >= 0)


def test_all_gm_zero_matches_direct_solve():
    from omit_chain import preset

    m = preset("fig2c")
    m = validate({"cavities": [{"kappa": c.kappa, "g_m": 0.0} for c in m.cavities],
                  "hopping": list(m.hopping)}, warn=False)
    st = solve_steady(m, 20.0)
    assert st.iterations == 1
    M = np.diag([c.kappa + 20j for c in m.cavities]).astype(complex)
    for k, g in enumerate(m.hopping):
        M[k, k + 1] = M[k + 1, k] = 1j * g
    rhs = np.zeros(m.n, complex)
    rhs[-1] = m.eps_c
    np.testing.assert_allclose(st.c_bar, np.linalg.solve(M, rhs), rtol=1e-12)


def test_nonconvergence_is_loud():
    # strong drive near the bistable region; the capped iteration must raise
    m = validate({"cavities": [{"kappa": 0.1, "omega_m": 1.0, "gamma_m": 0.001, "g_m": 1.0}],
                  "hopping": [], "drive": {"eps_c": 5.0}}, warn=False)
    with pytest.raises(NonConvergence) as e:
        solve_steady(m, 1.0, max_iter=50)
    assert e.value.iterations == 50


def test_self_consistent_couplings():
    from omit_chain import preset

    m = preset("fig5")
    st = solve_steady(m)
    m2 = self_consistent_couplings(m, st)
    assert m2.cavities[0].G_m == pytest.approx(abs(st.c_bar[0]))
    assert m2.cavities[1].G_m == 0.0
    assert m2.atom.G_e == pytest.approx(abs(st.c_bar[0]))
