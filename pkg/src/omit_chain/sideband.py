"""First-order anti-Stokes sideband equations, solved directly.

This is the reference route for the probe response: every sideband
amplitude (cavities, coupled oscillators, atomic coherences) is an unknown
of one dense linear system per detuning.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .closed_form import OutputField
from .errors import SingularSystem
from .model import ChainModel

RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class LinearSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    index_map: dict

    @property
    def dim(self) -> int:
        return self.rhs.shape[0]


def _layout(model: ChainModel):
    """Unknown ordering: c_1..c_N, b_j (G_m > 0 only), σ_ge, σ_gr, σ_er."""
    index = {}
    for j in range(model.n):
        index[("c", j + 1)] = j
    k = model.n
    for j, c in enumerate(model.cavities):
        if c.G_m > 0:
            index[("b", j + 1)] = k
            k += 1
    if model.atom is not None:
        for name in ("sigma_ge", "sigma_gr", "sigma_er"):
            index[(name,)] = k
            k += 1
    return index


def _base(model: ChainModel):
    """Matrix at x = 0 and the right-hand side; M(x) = M0 − i·x·I.

    Every row's diagonal is (rate − i·detuning) and each detuning is the
    reference sideband detuning x plus a row-specific constant shift.
    """
    index = _layout(model)
    d = len(index)
    M = np.zeros((d, d), dtype=complex)
    r = np.zeros(d, dtype=complex)
    w_ref = model.omega_ref
    for j, c in enumerate(model.cavities):
        row = index[("c", j + 1)]
        shift = w_ref - c.omega_m
        M[row, row] = c.kappa - 1j * shift
        if j > 0:
            M[row, index[("c", j)]] = 1j * model.hopping[j - 1]
        if j < model.n - 1:
            M[row, index[("c", j + 2)]] = 1j * model.hopping[j]
        if c.G_m > 0:
            brow = index[("b", j + 1)]
            M[row, brow] = -1j * c.G_m
            M[brow, brow] = c.gamma_m - 1j * shift
            M[brow, row] = -1j * c.G_m
    r[index[("c", model.n)]] = model.eps_p
    a = model.atom
    if a is not None:
        ci = index[("c", a.cavity)]
        ge, gr, er = index[("sigma_ge",)], index[("sigma_gr",)], index[("sigma_er",)]
        M[ci, ge] += 1j * a.g
        # σ_ge runs at the atom cavity's sideband detuning
        M[ge, ge] = a.gamma_ge - 1j * (w_ref - model.cavities[a.cavity - 1].omega_m)
        M[ge, ci] += -1j * a.g * (a.pop_ee - a.pop_gg)
        M[ge, gr] += 1j * a.Omega
        M[gr, gr] = a.gamma_gr - 1j * (w_ref - a.Delta_r - a.Delta_e - a.V)
        M[gr, er] += -1j * a.G_e
        M[gr, ci] += -1j * a.g * a.coh_er
        M[gr, ge] += 1j * a.Omega
        M[er, er] = a.gamma_er - 1j * (w_ref - a.Delta_r - a.V)
        M[er, gr] += -1j * a.G_e
        M[er, ci] += -1j * a.g * a.coh_gr
        r[er] = 1j * a.Omega * (a.pop_rr - a.pop_ee)
    return M, r, index


def assemble(model: ChainModel, delta: float) -> LinearSystem:
    """Sideband system at probe-control detuning ``delta``.

    G_m and G_e are taken from the model (direct-G mode); use
    :func:`omit_chain.steady_state.self_consistent_couplings` first to
    derive them from a steady state.
    """
    M0, r, index = _base(model)
    x = float(delta) - model.omega_ref
    M = M0 - 1j * x * np.eye(M0.shape[0])
    return LinearSystem(matrix=M, rhs=r, index_map=index)


def _check_residual(M, u, r, x=None):
    res = np.abs(np.einsum("...ij,...j->...i", M, u) - r).max(axis=-1)
    normM = np.abs(M).sum(axis=-1).max(axis=-1)
    bound = RESIDUAL_RTOL * (normM * np.abs(u).max(axis=-1) + np.abs(r).max(axis=-1))
    bad = ~(res <= bound)
    if np.any(bad):
        k = int(np.argmax(bad))
        where = None if x is None else float(np.asarray(x).reshape(-1)[k])
        raise SingularSystem("back-substitution residual check failed", x=where)


def solve_linear(system, rhs=None) -> np.ndarray:
    """Solve ``system`` (a :class:`LinearSystem`, or a matrix plus ``rhs``).

    Gaussian elimination with scaled row pivoting; the answer is checked
    against ‖M·u − r‖∞ ≤ 1e−10·(‖M‖∞‖u‖∞ + ‖r‖∞).
    """
    if isinstance(system, LinearSystem):
        M, r = system.matrix, system.rhs
    else:
        M, r = system, rhs
    M = np.asarray(M, dtype=np.complex128)
    r = np.asarray(r, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or r.shape != (M.shape[0],):
        raise ValueError("need a square matrix and a matching right-hand side")
    if M.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    u, singular = kernels.solve_batch(M[None], r[None])
    if singular[0]:
        raise SingularSystem()
    _check_residual(M, u[0], r)
    return u[0]


def solve_grid(model: ChainModel, x) -> np.ndarray:
    """All sideband amplitudes on a grid of reference detunings x, shape (n, dim)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    M0, r, _ = _base(model)
    d = M0.shape[0]
    M = M0[None, :, :] - 1j * x[:, None, None] * np.eye(d)[None]
    R = np.broadcast_to(r, (x.shape[0], d)).copy()
    u, singular = kernels.solve_batch(M, R)
    if singular.any():
        raise SingularSystem(x=float(x[np.argmax(singular)]))
    _check_residual(M, u, R, x)
    return u


def eps_t_direct_grid(model: ChainModel, x) -> np.ndarray:
    """ε_T = 2κ_N c_{N,−}/ε_p on a grid of reference sideband detunings x."""
    u = solve_grid(model, x)
    return 2.0 * model.kappa_N * u[:, model.n - 1] / model.eps_p


def eps_t_direct(model: ChainModel, delta: float) -> OutputField:
    u = solve_linear(assemble(model, delta))
    return OutputField.from_complex(2.0 * model.kappa_N * u[model.n - 1] / model.eps_p)
