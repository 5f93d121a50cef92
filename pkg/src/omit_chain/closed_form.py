"""Analytic probe response: B_j terms, the Rydberg term A and the continued fraction."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateDenominator, PreconditionViolated
from .model import AtomParams, CavityParams, ChainModel, DetuningSet, detunings

TINY = 1e-300


@dataclass(frozen=True)
class OutputField:
    eps_t: complex
    chi_p: float
    chi_tilde_p: float

    @classmethod
    def from_complex(cls, z) -> "OutputField":
        z = complex(z)
        return cls(eps_t=z, chi_p=z.real, chi_tilde_p=z.imag)


class AtomTermVariant(enum.Enum):
    NONE = "none"
    FULL = "full"
    REDUCED = "reduced"

    @classmethod
    def parse(cls, value) -> "AtomTermVariant":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def b_term(cavity: CavityParams, x):
    """κ − i·x + G_m²/(γ_m − i·x)."""
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    out = cavity.kappa - 1j * x
    if cavity.G_m != 0:
        out = out + cavity.G_m ** 2 / (cavity.gamma_m - 1j * x)
    return out


def _check(value, what):
    if np.any(np.abs(value) < TINY):
        raise DegenerateDenominator(f"vanishing {what}")


def atom_term_full(atom: AtomParams, det: DetuningSet, x=None):
    """Rydberg term with the population-weighted numerator and the P, Q factors.

    ``x`` defaults to the atom cavity's sideband detuning from ``det``.
    Works elementwise when ``x``, ``det.x_gr`` and ``det.x_er`` are arrays.
    """
    if x is None:
        x = det.x[atom.cavity - 1]
    g, Om, Ge, S = atom.g, atom.Omega, atom.G_e, atom.V
    ge_e = atom.gamma_ge + 1j * atom.Delta_e
    Q = (atom.gamma_gr + 1j * atom.Delta_r + 1j * S) * ge_e + Om ** 2
    _check(Q, "Q")
    P = 1j * (atom.Delta_r + S - atom.Delta_e) + atom.gamma_er + Ge ** 2 * ge_e / Q
    _check(P, "P")
    er = atom.gamma_er - 1j * det.x_er
    _check(er, "sigma_er denominator")
    T = atom.gamma_gr - 1j * det.x_gr + Ge ** 2 / er
    w1 = atom.pop_rr + 2.0 * atom.pop_gg - 1.0
    w2 = 2.0 * atom.pop_rr + atom.pop_gg - 1.0
    num = (g ** 2 * T + (g * Om * Ge) ** 2 / (P * Q)) * w1 - (g * Om) ** 2 / P * w2
    den = (atom.gamma_ge - 1j * x) * T + Om ** 2
    _check(den, "A denominator")
    return num / den


def atom_term_reduced(atom: AtomParams, det: DetuningSet, x=None):
    """Rydberg term obtained by eliminating the three coherence equations.

    Valid for σ̄_gg = 1 and vanishing excited populations and coherences:
    g² / (γ_ge − i·x + Ω² / (γ_gr − i·x_gr + G_e² / (γ_er − i·x_er))).
    """
    if not atom.default_populations:
        raise PreconditionViolated(
            "reduced atom term needs pop_gg=1, pop_ee=pop_rr=0 and zero coherences"
        )
    if x is None:
        x = det.x[atom.cavity - 1]
    er = atom.gamma_er - 1j * det.x_er
    _check(er, "sigma_er denominator")
    T = atom.gamma_gr - 1j * det.x_gr + atom.G_e ** 2 / er
    _check(T, "sigma_gr denominator")
    den = atom.gamma_ge - 1j * x + atom.Omega ** 2 / T
    _check(den, "A denominator")
    return atom.g ** 2 / den


def _default_variant(model):
    return AtomTermVariant.REDUCED if model.atom is not None else AtomTermVariant.NONE


def atom_term_grid(model: ChainModel, x, variant=None) -> np.ndarray:
    """A on a grid of reference sideband detunings x (zeros when not used)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    variant = _default_variant(model) if variant is None else AtomTermVariant.parse(variant)
    a = model.atom
    if a is None or variant is AtomTermVariant.NONE:
        return np.zeros(x.shape, dtype=complex)
    delta = x + model.omega_ref
    det = DetuningSet(
        delta=delta,
        x=None,
        x_gr=delta - a.Delta_r - a.Delta_e - a.V,
        x_er=delta - a.Delta_r - a.V,
    )
    xi = delta - model.cavities[a.cavity - 1].omega_m
    if variant is AtomTermVariant.FULL:
        return np.asarray(atom_term_full(a, det, xi), dtype=complex)
    return np.asarray(atom_term_reduced(a, det, xi), dtype=complex)


def eps_t_cf_grid(model: ChainModel, x, variant=None) -> np.ndarray:
    """Continued-fraction ε_T on a grid of reference sideband detunings x.

    Evaluated bottom-up: D_1 = B_1, D_j = B_j + g_{j−1}²/D_{j−1}, ε_T = 2κ_N/D_N,
    with A added to the level of the cavity holding the atom.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    variant = _default_variant(model) if variant is None else AtomTermVariant.parse(variant)
    kappa, omega_m, gamma_m, G_m, hop = model.arrays()
    offsets = model.omega_ref - omega_m
    A = atom_term_grid(model, x, variant)
    idx = -1
    if model.atom is not None and variant is not AtomTermVariant.NONE:
        idx = model.atom.cavity - 1
    out, bad = kernels.cf_grid(x, offsets, kappa, gamma_m, G_m ** 2, hop ** 2, A, idx)
    if bad >= 0:
        raise DegenerateDenominator(x=float(x[bad]))
    # ε_p cancels in the linear response; this keeps 2κ_N c_N/ε_p semantics
    return out


def eps_t_cf(model: ChainModel, delta: float, variant=None) -> OutputField:
    x = float(delta) - model.omega_ref
    return OutputField.from_complex(eps_t_cf_grid(model, [x], variant)[0])


def eps_t_cf_topdown(model: ChainModel, delta: float, variant=None) -> complex:
    """Same fraction evaluated from the outermost level inward.

    Uses the forward three-term recurrence for convergents of
    B_N + g_{N−1}²/(B_{N−1} + g_{N−2}²/(…)), rescaled each step.
    """
    variant = _default_variant(model) if variant is None else AtomTermVariant.parse(variant)
    det = detunings(model, delta)
    x_ref = float(delta) - model.omega_ref
    levels = []
    for j, c in enumerate(model.cavities):
        B = complex(b_term(c, det.x[j]))
        if model.atom is not None and variant is not AtomTermVariant.NONE and model.atom.cavity == j + 1:
            B += complex(atom_term_grid(model, [x_ref], variant)[0])
        levels.append(B)
    b = levels[::-1]
    a = [g * g for g in model.hopping[::-1]]
    # h_k = b_k h_{k-1} + a_k h_{k-2};  value = h_n / k_n
    h_prev, h = 1.0 + 0j, b[0]
    k_prev, k = 0.0 + 0j, 1.0 + 0j
    for i in range(1, len(b)):
        h_prev, h = h, b[i] * h + a[i - 1] * h_prev
        k_prev, k = k, b[i] * k + a[i - 1] * k_prev
        s = max(abs(h), abs(k), TINY)
        h, h_prev, k, k_prev = h / s, h_prev / s, k / s, k_prev / s
    if abs(h) < TINY:
        raise DegenerateDenominator(x=x_ref)
    return 2.0 * model.kappa_N * k / h
