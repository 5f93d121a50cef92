"""Randomised cross-checks of the continued fraction against the direct solve."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closed_form import eps_t_cf_grid
from .model import AtomParams, CavityParams, ChainModel, validate
from .sideband import eps_t_direct_grid
from .spectra import relative_deviation


def random_model(rng: np.random.Generator, n=None, equal_omega=False, atom=False) -> ChainModel:
    """A random valid chain: N ∈ 1..8, each G_m drawn from {0} ∪ [0.1, 2]."""
    if n is None:
        n = int(rng.integers(1, 9))
    omega = rng.uniform(10.0, 30.0)
    cavities = []
    for j in range(n):
        last = j == n - 1
        G = 0.0 if rng.random() < 0.5 else rng.uniform(0.1, 2.0)
        cavities.append(CavityParams(
            kappa=rng.uniform(0.5, 3.0) if last else rng.uniform(0.001, 0.5),
            omega_m=omega if equal_omega else omega + rng.uniform(-1.0, 1.0),
            gamma_m=rng.uniform(0.0005, 0.05),
            g_m=1.0,
            G_m=G,
        ))
    hopping = tuple(rng.uniform(0.2, 3.0, size=n - 1))
    a = None
    if atom:
        w = cavities[-1].omega_m
        a = AtomParams(
            cavity=int(rng.integers(1, n + 1)),
            g=rng.uniform(0.1, 2.0),
            Omega=rng.uniform(0.1, 2.0),
            Delta_e=w + rng.uniform(-2.0, 2.0),
            Delta_r=w + rng.uniform(-2.0, 2.0),
            V=rng.uniform(0.0, 30.0),
            gamma_ge=rng.uniform(0.0005, 0.05),
            gamma_gr=rng.uniform(0.0005, 0.05),
            gamma_er=rng.uniform(0.0005, 0.05),
            G_e=rng.uniform(0.0, 2.0),
        )
    raw = ChainModel(cavities=tuple(cavities), hopping=hopping, eps_c=1.0,
                     eps_p=rng.uniform(0.1, 2.0), atom=a)
    return validate(raw, warn=False)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    n: int
    atom: bool
    max_rel: float
    max_reflection: float


@dataclass(frozen=True)
class VerifyReport:
    trials: tuple
    seed: int
    tol: float

    @property
    def max_rel(self) -> float:
        return max((t.max_rel for t in self.trials), default=0.0)

    @property
    def max_reflection(self) -> float:
        """Largest |ε_T − 1| over atom-free trials (passivity bound is 1)."""
        vals = [t.max_reflection for t in self.trials if not t.atom]
        return max(vals, default=0.0)

    @property
    def failures(self) -> tuple:
        return tuple(t.trial for t in self.trials if not t.max_rel < self.tol)

    @property
    def passed(self) -> bool:
        return not self.failures and self.max_reflection <= 1.0 + 1e-9


def run_oracle_trials(trials=200, seed=7, tol=1e-9, points=64, atom_trials=0) -> VerifyReport:
    """Compare both routes on ``trials`` random atom-free models (``points`` random x each).

    ``atom_trials`` extra models carry a Rydberg pair with default
    populations, checked with the reduced atom term.
    """
    rng = np.random.default_rng(seed)
    results = []
    for k in range(trials + atom_trials):
        with_atom = k >= trials
        m = random_model(rng, atom=with_atom)
        x = rng.uniform(-8.0, 8.0, size=points)
        cf = eps_t_cf_grid(m, x)
        direct = eps_t_direct_grid(m, x)
        rel = relative_deviation(cf, direct)
        results.append(TrialResult(
            trial=k,
            n=m.n,
            atom=with_atom,
            max_rel=float(rel.max()),
            max_reflection=float(np.abs(direct - 1.0).max()),
        ))
    return VerifyReport(trials=tuple(results), seed=seed, tol=tol)
