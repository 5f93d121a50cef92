import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from omit_chain import ConfigError, UnknownPreset, detunings, preset, validate
from omit_chain.model import (
    PRESET_NAMES,
    AtomParams,
    CavityParams,
    ChainModel,
    ModelAdvisory,
    model_to_dict,
)


def reference_raw(n=4):
    cav = [{"kappa": 0.002, "omega_m": 20, "gamma_m": 0.001, "G_m": 1.0} for _ in range(n - 1)]
    cav.append({"kappa": 2.0, "omega_m": 20, "gamma_m": 0.001, "G_m": 1.0})
    return {"units": "g_m", "cavities": cav, "hopping": [2.0] * (n - 1),
            "drive": {"eps_c": 1.0, "eps_p": 1.0}}


def test_reference_configuration_is_valid():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        m = validate(reference_raw())
    assert m.n == 4
    assert m.advisories == ()


def test_hopping_length_mismatch():
    raw = reference_raw()
    raw["hopping"] = [2.0, 2.0]
    with pytest.raises(ConfigError) as e:
        validate(raw)
    assert e.value.field == "hopping"
    assert "length" in e.value.reason


def test_negative_kappa():
    raw = reference_raw()
    raw["cavities"][0]["kappa"] = -1
    with pytest.raises(ConfigError) as e:
        validate(raw)
    assert e.value.field == "cavities[0].kappa"
    assert e.value.reason == "nonpositive"


def test_every_violation_is_listed():
    raw = reference_raw()
    raw["cavities"][1]["gamma_m"] = 0.0
    raw["hopping"] = [1.0]
    raw["atom"] = {"cavity": 7, "pop_gg": 1.2, "gamma_er": -1}
    with pytest.raises(ConfigError) as e:
        validate(raw)
    fields = {f for f, _ in e.value.errors}
    assert {"cavities[1].gamma_m", "hopping", "atom.cavity", "atom.pop_gg", "atom.gamma_er"} <= fields


def test_complex_coupling_rejected():
    raw = reference_raw()
    raw["cavities"][2]["G_m"] = 1 + 0.5j
    with pytest.raises(ConfigError, match="complex"):
        validate(raw)


def test_population_sum():
    raw = reference_raw()
    raw["atom"] = {"cavity": 1, "pop_gg": 0.6, "pop_ee": 0.3, "pop_rr": 0.3}
    with pytest.raises(ConfigError, match="sum"):
        validate(raw)


def test_advisories_warn_but_accept():
    raw = reference_raw()
    raw["cavities"][0]["kappa"] = 30.0
    with pytest.warns(ModelAdvisory):
        m = validate(raw)
    assert any("resolved-sideband" in a for a in m.advisories)
    assert any("weak dissipation" in a for a in m.advisories)


def test_single_cavity_is_legal():
    m = validate({"cavities": [{"kappa": 2.0}], "hopping": []})
    assert m.n == 1 and m.hopping == ()


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_validate_and_are_idempotent(name):
    m = preset(name, V=4.0) if name in ("fig5", "fig6", "fig7", "fig8") else preset(name)
    assert validate(m, warn=False) == m
    assert validate(validate(m, warn=False), warn=False) == validate(m, warn=False)


@pytest.mark.parametrize("name, coupled", [
    ("fig2a", (1, 0, 0, 0)), ("fig2b", (1, 1, 0, 0)), ("fig2c", (1, 1, 1, 0)), ("fig2d", (1, 1, 1, 1)),
    ("fig4a", (0, 0, 0, 0)), ("fig4b", (1, 0, 1, 0)), ("fig4c", (0, 1, 0, 0)), ("fig4d", (0, 1, 0, 1)),
    ("fig5", (1, 0, 0, 0)), ("fig6", (0, 1, 0, 0)), ("fig7", (0, 0, 0, 0)), ("fig8", (0, 0, 0, 0)),
])
def test_preset_oscillators(name, coupled):
    m = preset(name)
    assert tuple(c.G_m for c in m.cavities) == coupled
    assert [c.kappa for c in m.cavities] == [0.002, 0.002, 0.002, 2.0]
    assert m.hopping == (2.0, 2.0, 2.0)
    assert all(c.omega_m == 20.0 and c.gamma_m == 0.001 for c in m.cavities)


def test_atom_presets():
    m = preset("fig5", V=0)
    assert m.atom.cavity == 1 and m.atom.V == 0
    assert preset("fig6", V=10).atom.cavity == 2
    assert preset("fig7").atom.cavity == 1 and preset("fig8").atom.cavity == 2
    a = preset("fig8", V=30).atom
    assert (a.g, a.Omega, a.G_e, a.V) == (1.0, 1.0, 1.0, 30.0)
    assert (a.gamma_ge, a.gamma_gr, a.gamma_er) == (0.001,) * 3
    assert a.default_populations
    assert preset("fig2a").atom is None


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        preset("fig9")


def test_detunings_on_resonance():
    d = detunings(preset("fig2d"), 20.0)
    np.testing.assert_array_equal(d.x, np.zeros(4))


def test_detunings_atom():
    m = preset("fig5", V=4)
    assert detunings(m, 20.0).x_er == -4.0
    assert detunings(preset("fig5", V=0), 20.0).x_gr == -20.0


@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(0, 50))
def test_detunings_linear_and_consistent(d1, d2, V):
    m = preset("fig6", V=V)
    a, b = detunings(m, d1), detunings(m, d2)
    np.testing.assert_allclose(a.x - b.x, d1 - d2, atol=1e-12)
    assert a.x_er - a.x_gr == pytest.approx(m.atom.Delta_e, abs=1e-12)


def test_model_dict_roundtrip():
    for m in (preset("fig2c"), preset("fig6", V=6.0)):
        assert validate(model_to_dict(m), warn=False) == m


def test_dataclass_inputs_accepted():
    raw = ChainModel(cavities=(CavityParams(kappa=1.0), CavityParams(kappa=2.0)), hopping=(2.5,),
                     atom=AtomParams(cavity=2))
    m = validate(raw, warn=False)
    assert m.atom.cavity == 2
