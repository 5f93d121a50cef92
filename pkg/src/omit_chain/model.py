"""Parameter types, validation and the named figure presets.

All rates and frequencies are dimensionless, in units of the bare
optomechanical coupling ``g_m`` (1 kHz in the reference setup).
"""
from __future__ import annotations

import math
import numbers
import warnings
from dataclasses import dataclass, field, fields, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError, UnknownPreset

__all__ = [
    "CavityParams",
    "AtomParams",
    "ChainModel",
    "DetuningSet",
    "ModelAdvisory",
    "validate",
    "detunings",
    "preset",
    "PRESET_NAMES",
]


class ModelAdvisory(UserWarning):
    """Soft violation: the model is usable but outside the intended regime."""


@dataclass(frozen=True)
class CavityParams:
    kappa: float
    omega_m: float = 20.0
    gamma_m: float = 0.001
    g_m: float = 1.0
    G_m: float = 0.0

    @property
    def resolved_sideband(self) -> bool:
        return self.kappa < self.omega_m


@dataclass(frozen=True)
class AtomParams:
    """The driven Rydberg atom plus its permanently excited partner.

    ``cavity`` is 1-based. ``V`` is the dipole-dipole shift entering the
    sideband detunings as S. ``coh_ge`` is the steady coherence that feeds
    back on the steady cavity field; it only matters to the steady solver.
    """

    cavity: int
    g: float = 1.0
    Omega: float = 1.0
    Delta_e: float = 20.0
    Delta_r: float = 20.0
    V: float = 0.0
    gamma_ge: float = 0.001
    gamma_gr: float = 0.001
    gamma_er: float = 0.001
    pop_gg: float = 1.0
    pop_ee: float = 0.0
    pop_rr: float = 0.0
    coh_gr: complex = 0j
    coh_er: complex = 0j
    coh_ge: complex = 0j
    G_e: float = 1.0

    @property
    def default_populations(self) -> bool:
        return (
            self.pop_gg == 1.0
            and self.pop_ee == 0.0
            and self.pop_rr == 0.0
            and self.coh_gr == 0
            and self.coh_er == 0
        )


@dataclass(frozen=True)
class ChainModel:
    """N cavities in a line; the last one (index N) is driven and probed."""

    cavities: tuple
    hopping: tuple = ()
    eps_c: float = 1.0
    eps_p: float = 1.0
    atom: Optional[AtomParams] = None
    advisories: tuple = field(default=(), compare=False)

    @property
    def n(self) -> int:
        return len(self.cavities)

    @property
    def kappa_N(self) -> float:
        return self.cavities[-1].kappa

    @property
    def omega_ref(self) -> float:
        """Mechanical frequency defining the sideband axis x = Δ − ω_ref."""
        return self.cavities[-1].omega_m

    def delta_from_x(self, x):
        return np.asarray(x, dtype=float) + self.omega_ref if np.ndim(x) else float(x) + self.omega_ref

    def arrays(self):
        """Per-cavity parameters as float arrays (kappa, omega_m, gamma_m, G_m, hopping)."""
        c = self.cavities
        return (
            np.array([p.kappa for p in c], dtype=float),
            np.array([p.omega_m for p in c], dtype=float),
            np.array([p.gamma_m for p in c], dtype=float),
            np.array([p.G_m for p in c], dtype=float),
            np.array(self.hopping, dtype=float),
        )

    def without_atom(self) -> "ChainModel":
        return replace(self, atom=None)

    def with_atom(self, **changes) -> "ChainModel":
        if self.atom is None:
            raise ValueError("model has no atom")
        return replace(self, atom=replace(self.atom, **changes))

    def with_couplings(self, G_m=None, G_e=None) -> "ChainModel":
        cavities = self.cavities
        if G_m is not None:
            if len(G_m) != self.n:
                raise ValueError("need one G_m per cavity")
            cavities = tuple(replace(c, G_m=float(g)) for c, g in zip(cavities, G_m))
        atom = self.atom
        if G_e is not None and atom is not None:
            atom = replace(atom, G_e=float(G_e))
        return replace(self, cavities=cavities, atom=atom)


@dataclass(frozen=True)
class DetuningSet:
    delta: float
    x: np.ndarray
    x_gr: Optional[float] = None
    x_er: Optional[float] = None


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

def _real(value, name, errors):
    if isinstance(value, bool) or value is None:
        errors.append((name, "not a number"))
        return math.nan
    if isinstance(value, complex) or np.iscomplexobj(value):
        if complex(value).imag != 0:
            errors.append((name, "complex"))
            return math.nan
        value = complex(value).real
    if not isinstance(value, numbers.Real):
        try:
            value = float(value)
        except (TypeError, ValueError):
            errors.append((name, "not a number"))
            return math.nan
    value = float(value)
    if not math.isfinite(value):
        errors.append((name, "not finite"))
    return value


def _positive(value, name, errors):
    v = _real(value, name, errors)
    if math.isfinite(v) and v <= 0:
        errors.append((name, "nonpositive"))
    return v


def _nonnegative(value, name, errors):
    v = _real(value, name, errors)
    if math.isfinite(v) and v < 0:
        errors.append((name, "negative"))
    return v


def _complex(value, name, errors):
    if isinstance(value, (list, tuple)) and len(value) == 2:
        value = complex(value[0], value[1])
    try:
        z = complex(value)
    except (TypeError, ValueError):
        errors.append((name, "not a number"))
        return 0j
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        errors.append((name, "not finite"))
    return z


def _get(obj, key, default=None):
    if isinstance(obj, Mapping):
        return obj.get(key, default)
    return getattr(obj, key, default)


def _validate_cavity(raw, j, errors):
    p = f"cavities[{j}]"
    kappa = _positive(_get(raw, "kappa"), f"{p}.kappa", errors)
    omega_m = _positive(_get(raw, "omega_m", 20.0), f"{p}.omega_m", errors)
    gamma_m = _positive(_get(raw, "gamma_m", 0.001), f"{p}.gamma_m", errors)
    g_m = _nonnegative(_get(raw, "g_m", 1.0), f"{p}.g_m", errors)
    G_m = _nonnegative(_get(raw, "G_m", 0.0), f"{p}.G_m", errors)
    return CavityParams(kappa=kappa, omega_m=omega_m, gamma_m=gamma_m, g_m=g_m, G_m=G_m)


def _validate_atom(raw, n, errors):
    cav = _get(raw, "cavity", _get(raw, "cavity_index"))
    if isinstance(cav, bool) or not isinstance(cav, numbers.Integral):
        if isinstance(cav, float) and cav.is_integer():
            cav = int(cav)
        else:
            errors.append(("atom.cavity", "not an integer"))
            cav = 1
    cav = int(cav)
    if not 1 <= cav <= n:
        errors.append(("atom.cavity", f"out of range 1..{n}"))
    vals = {}
    for name in ("g", "Omega", "V", "G_e"):
        default = {"g": 1.0, "Omega": 1.0, "V": 0.0, "G_e": 1.0}[name]
        vals[name] = _nonnegative(_get(raw, name, default), f"atom.{name}", errors)
    for name in ("Delta_e", "Delta_r"):
        vals[name] = _real(_get(raw, name, 20.0), f"atom.{name}", errors)
    for name in ("gamma_ge", "gamma_gr", "gamma_er"):
        vals[name] = _positive(_get(raw, name, 0.001), f"atom.{name}", errors)
    pops = {}
    for name, default in (("pop_gg", 1.0), ("pop_ee", 0.0), ("pop_rr", 0.0)):
        v = _real(_get(raw, name, default), f"atom.{name}", errors)
        if math.isfinite(v) and not 0.0 <= v <= 1.0:
            errors.append((f"atom.{name}", "out of range [0, 1]"))
        pops[name] = v
    total = sum(pops.values())
    if math.isfinite(total) and total > 1.0 + 1e-12:
        errors.append(("atom.populations", "sum exceeds 1"))
    cohs = {
        name: _complex(_get(raw, name, 0j), f"atom.{name}", errors)
        for name in ("coh_gr", "coh_er", "coh_ge")
    }
    return AtomParams(cavity=cav, **vals, **pops, **cohs)


def validate(raw, *, warn: bool = True) -> ChainModel:
    """Check a candidate model and return an immutable :class:`ChainModel`.

    ``raw`` may be a :class:`ChainModel` or a mapping using the config-file
    field names. Every hard violation is collected before raising
    :class:`ConfigError`. Soft violations (resolved-sideband and
    weak-dissipation regimes) are attached as ``advisories`` and, unless
    ``warn`` is false, emitted as :class:`ModelAdvisory` warnings.
    """
    errors: list = []
    raw_cavs = _get(raw, "cavities")
    if raw_cavs is None or isinstance(raw_cavs, (str, bytes)) or len(raw_cavs) < 1:
        raise ConfigError([("cavities", "need at least one cavity")])
    cavities = tuple(_validate_cavity(c, j, errors) for j, c in enumerate(raw_cavs))
    n = len(cavities)

    raw_hop = _get(raw, "hopping", ())
    raw_hop = () if raw_hop is None else raw_hop
    if len(raw_hop) != n - 1:
        errors.append(("hopping", f"length {len(raw_hop)} != N-1 = {n - 1}"))
    hopping = tuple(_nonnegative(g, f"hopping[{k}]", errors) for k, g in enumerate(raw_hop))

    drive = _get(raw, "drive")
    src = drive if drive is not None else raw
    eps_c = _nonnegative(_get(src, "eps_c", 1.0), "eps_c", errors)
    eps_p = _positive(_get(src, "eps_p", 1.0), "eps_p", errors)

    raw_atom = _get(raw, "atom")
    atom = None if raw_atom is None else _validate_atom(raw_atom, n, errors)

    if errors:
        raise ConfigError(errors)

    advisories = []
    for j, c in enumerate(cavities):
        if not c.resolved_sideband:
            advisories.append(f"cavity {j + 1}: kappa >= omega_m, outside the resolved-sideband regime")
    kN = cavities[-1].kappa
    if n > 1:
        if any(g < kN for g in hopping):
            advisories.append("weak dissipation: some hopping rate is below kappa_N")
        if any(c.kappa >= kN for c in cavities[:-1]):
            advisories.append("weak dissipation: inner cavities should decay much slower than cavity N")
    if warn:
        for a in advisories:
            warnings.warn(a, ModelAdvisory, stacklevel=2)
    return ChainModel(
        cavities=cavities,
        hopping=hopping,
        eps_c=eps_c,
        eps_p=eps_p,
        atom=atom,
        advisories=tuple(advisories),
    )


def detunings(model: ChainModel, delta: float) -> DetuningSet:
    """Sideband detunings at probe-control detuning ``delta``.

    ``x_j = Δ − ω_mj`` for each cavity. With an atom, ``x_gr = Δ − Δ_r − Δ_e − S``
    and ``x_er = Δ − Δ_r − S`` with S = V, using the atom's stored Δ_e, Δ_r.
    """
    delta = float(delta)
    x = np.array([delta - c.omega_m for c in model.cavities])
    a = model.atom
    if a is None:
        return DetuningSet(delta=delta, x=x)
    return DetuningSet(
        delta=delta,
        x=x,
        x_gr=delta - a.Delta_r - a.Delta_e - a.V,
        x_er=delta - a.Delta_r - a.V,
    )


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

OMEGA_M = 20.0
GAMMA_M = 0.001
KAPPA_INNER = 0.002
KAPPA_N = 2.0
N_CAVITIES = 4

# cavities (1-based) carrying a coupled oscillator, G_m = 1
_OSCILLATORS = {
    "fig2a": (1,),
    "fig2b": (1, 2),
    "fig2c": (1, 2, 3),
    "fig2d": (1, 2, 3, 4),
    "fig4a": (),
    "fig4b": (1, 3),
    "fig4c": (2,),
    "fig4d": (2, 4),
    "fig5": (1,),
    "fig6": (2,),
    "fig7": (),
    "fig8": (),
}
_ATOM_CAVITY = {"fig5": 1, "fig6": 2, "fig7": 1, "fig8": 2}

PRESET_NAMES = tuple(_OSCILLATORS)

FIG5_V_VALUES = (0.0, 2.0, 4.0, 6.0, 10.0, 30.0)
FIG7_V_VALUES = (0.0, 2.0, 4.0, 30.0)


def preset(name: str, V: float = 0.0) -> ChainModel:
    """Four-cavity configuration behind one of the reference figures.

    ``fig2*``/``fig4*`` are atom-free; ``fig5``–``fig8`` add the Rydberg
    pair with dipole-dipole strength ``V``. The atom detunings follow the
    sideband convention Δ_e = Δ_r = ω_m.
    """
    key = name.lower()
    if key not in _OSCILLATORS:
        raise UnknownPreset(name)
    coupled = _OSCILLATORS[key]
    cavities = []
    for j in range(1, N_CAVITIES + 1):
        cavities.append(
            CavityParams(
                kappa=KAPPA_N if j == N_CAVITIES else KAPPA_INNER,
                omega_m=OMEGA_M,
                gamma_m=GAMMA_M,
                g_m=1.0,
                G_m=1.0 if j in coupled else 0.0,
            )
        )
    atom = None
    if key in _ATOM_CAVITY:
        atom = AtomParams(
            cavity=_ATOM_CAVITY[key],
            g=1.0,
            Omega=1.0,
            Delta_e=OMEGA_M,
            Delta_r=OMEGA_M,
            V=float(V),
            gamma_ge=0.001,
            gamma_gr=0.001,
            gamma_er=0.001,
            G_e=1.0,
        )
    raw = ChainModel(
        cavities=tuple(cavities),
        hopping=(KAPPA_N,) * (N_CAVITIES - 1),
        eps_c=1.0,
        eps_p=1.0,
        atom=atom,
    )
    return validate(raw, warn=False)


def model_to_dict(model: ChainModel) -> dict:
    """Config-file representation (inverse of :func:`validate` on a mapping)."""
    out = {
        "units": "g_m",
        "cavities": [
            {"kappa": c.kappa, "omega_m": c.omega_m, "gamma_m": c.gamma_m, "g_m": c.g_m, "G_m": c.G_m}
            for c in model.cavities
        ],
        "hopping": list(model.hopping),
        "drive": {"eps_c": model.eps_c, "eps_p": model.eps_p},
    }
    a = model.atom
    if a is not None:
        d = {}
        for f in fields(a):
            v = getattr(a, f.name)
            if f.name == "cavity":
                d["cavity"] = v
            elif isinstance(v, complex):
                d[f.name] = [v.real, v.imag]
            else:
                d[f.name] = v
        out["atom"] = d
    return out
