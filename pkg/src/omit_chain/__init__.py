"""Probe response of optomechanical cavity chains with a dipole-dipole coupled Rydberg pair.

Two independent routes compute ε_T: a continued fraction
(:mod:`omit_chain.closed_form`) and a direct solve of the sideband
equations (:mod:`omit_chain.sideband`).
"""
from .closed_form import (
    AtomTermVariant,
    OutputField,
    atom_term_full,
    atom_term_reduced,
    b_term,
    eps_t_cf,
    eps_t_cf_grid,
)
from .errors import (
    ConfigError,
    DegenerateDenominator,
    DegenerateSlice,
    FitNonConvergence,
    NonConvergence,
    PreconditionViolated,
    SingularSystem,
    UnknownPreset,
)
from .model import AtomParams, CavityParams, ChainModel, DetuningSet, detunings, preset, validate
from .sideband import LinearSystem, assemble, eps_t_direct, eps_t_direct_grid, solve_linear
from .spectra import (
    FanoFit,
    ResonanceTrack,
    Spectrum,
    WindowReport,
    compare_methods,
    fano_fit,
    find_windows,
    sweep,
    track_resonances,
)
from .steady_state import SteadyState, lambda_bar, solve_steady

__version__ = "0.1.0"
