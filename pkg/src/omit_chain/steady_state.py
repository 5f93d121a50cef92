"""Control-field steady state of the chain (zeroth order in the probe)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, SingularSystem
from .model import ChainModel
from .sideband import solve_linear

DAMPING = 0.5
TOL = 1e-12
MAX_ITER = 10_000
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class SteadyState:
    c_bar: np.ndarray
    lambda_bar: np.ndarray
    delta_tilde: np.ndarray
    residual: float
    iterations: int


def lambda_bar(c_bar_sq, cavity) -> float:
    """Static mechanical displacement b̄ + b̄* sustained by |c̄|²."""
    w, gm = cavity.omega_m, cavity.gamma_m
    return 2.0 * w * cavity.g_m * c_bar_sq / (gm * gm + w * w)


def _steady_matrix(model: ChainModel, delta_tilde):
    n = model.n
    M = np.zeros((n, n), dtype=complex)
    for j, c in enumerate(model.cavities):
        M[j, j] = c.kappa + 1j * delta_tilde[j]
    for k, g in enumerate(model.hopping):
        M[k, k + 1] = 1j * g
        M[k + 1, k] = 1j * g
    rhs = np.zeros(n, dtype=complex)
    rhs[-1] = model.eps_c
    a = model.atom
    if a is not None and a.coh_ge != 0:
        rhs[a.cavity - 1] -= 1j * a.g * a.coh_ge
    return M, rhs


def steady_residual(model: ChainModel, delta_cavity, c_bar) -> float:
    """Max-norm residual of the steady cavity equations at ``c_bar``.

    The displacement is recomputed from ``c_bar`` so the check covers the
    self-consistency as well as the linear cavity equations.
    """
    c_bar = np.asarray(c_bar, dtype=complex)
    lam = np.array([lambda_bar(abs(c) ** 2, cav) for c, cav in zip(c_bar, model.cavities)])
    g_m = np.array([c.g_m for c in model.cavities])
    M, rhs = _steady_matrix(model, np.asarray(delta_cavity, dtype=float) - g_m * lam)
    return float(np.max(np.abs(M @ c_bar - rhs)))


def solve_steady(model: ChainModel, delta_cavity=None, *, damping=DAMPING, tol=TOL,
                 max_iter=MAX_ITER) -> SteadyState:
    """Damped fixed-point iteration for c̄_j and λ̄_j.

    ``delta_cavity`` gives Δ_j = ω_j − ω_c per cavity (scalar broadcasts);
    by default Δ_j = ω_mj. Starting from λ̄ = 0, each step solves the linear
    steady cavity system at Δ̃ = Δ − g_m λ̄, recomputes λ̄ and mixes it with
    weight ``damping``. Raises :class:`NonConvergence` instead of returning
    an unsettled iterate.
    """
    n = model.n
    if delta_cavity is None:
        delta = np.array([c.omega_m for c in model.cavities], dtype=float)
    else:
        delta = np.broadcast_to(np.asarray(delta_cavity, dtype=float), (n,)).copy()
    g_m = np.array([c.g_m for c in model.cavities])
    lam = np.zeros(n)
    change = np.inf
    for it in range(1, max_iter + 1):
        M, rhs = _steady_matrix(model, delta - g_m * lam)
        c = solve_linear(M, rhs)
        lam_new = np.array([lambda_bar(abs(cj) ** 2, cav) for cj, cav in zip(c, model.cavities)])
        change = float(np.max(np.abs(lam_new - lam))) if n else 0.0
        lam = (1.0 - damping) * lam + damping * lam_new
        if change < tol:
            break
    else:
        raise NonConvergence(max_iter, change)
    # final c consistent with the settled displacement
    M, rhs = _steady_matrix(model, delta - g_m * lam)
    c = solve_linear(M, rhs)
    lam = np.array([lambda_bar(abs(cj) ** 2, cav) for cj, cav in zip(c, model.cavities)])
    res = steady_residual(model, delta, c)
    if not np.isfinite(res) or res > RESIDUAL_TOL:
        raise NonConvergence(it, res)
    return SteadyState(
        c_bar=c,
        lambda_bar=lam,
        delta_tilde=delta - g_m * lam,
        residual=res,
        iterations=it,
    )


def self_consistent_couplings(model: ChainModel, steady: SteadyState) -> ChainModel:
    """Replace G_m by g_m·|c̄_j| (cavities that had G_m > 0 only) and G_e by g·|c̄_i|."""
    G_m = [
        c.g_m * abs(cb) if c.G_m > 0 else 0.0
        for c, cb in zip(model.cavities, steady.c_bar)
    ]
    G_e = None
    if model.atom is not None:
        G_e = model.atom.g * abs(steady.c_bar[model.atom.cavity - 1])
    return model.with_couplings(G_m=G_m, G_e=G_e)


__all__ = [
    "SteadyState",
    "lambda_bar",
    "solve_steady",
    "steady_residual",
    "self_consistent_couplings",
    "SingularSystem",
]
