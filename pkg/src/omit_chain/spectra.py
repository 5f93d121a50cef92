"""Spectral sweeps and their analysis: transparency dips, DDI tracking, Fano fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import find_peaks, peak_prominences, peak_widths

from .closed_form import AtomTermVariant, eps_t_cf_grid
from .errors import DegenerateDenominator, DegenerateSlice, FitNonConvergence, PreconditionViolated
from .model import ChainModel
from .sideband import eps_t_direct_grid

DEPTH_MAX = 0.5
PROMINENCE_MIN = 0.05
REFINE_TOL = 1e-7  # absolute, in g_m units
MATCH_TOL = 0.05  # in units of kappa_N

WINDOW_GRID = (-3.0, 3.0, 4001)
DDI_GRID = (-5.0, 20.0, 12501)

_METHODS = ("cf", "direct", "both")
_UNITS = ("kappa_N", "g_m")


def _scale(model, units):
    if units not in _UNITS:
        raise ValueError(f"units must be one of {_UNITS}")
    return model.kappa_N if units == "kappa_N" else 1.0


def evaluate(model: ChainModel, x, method="cf", variant=None) -> np.ndarray:
    """ε_T at reference sideband detunings ``x`` (g_m units)."""
    if method == "direct":
        return eps_t_direct_grid(model, x)
    return eps_t_cf_grid(model, x, variant)


@dataclass(frozen=True)
class Spectrum:
    """ε_T on a uniform ascending grid.

    ``grid`` is in ``units`` (``"kappa_N"`` or ``"g_m"``); ``x`` gives the
    same points in g_m. ``values`` is the cf result unless only the direct
    route was run.
    """

    grid: np.ndarray
    values: np.ndarray
    method: str
    units: str
    model: ChainModel = field(repr=False)
    variant: Optional[AtomTermVariant] = None
    direct: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def scale(self) -> float:
        return _scale(self.model, self.units)

    @property
    def x(self) -> np.ndarray:
        return self.grid * self.scale

    @property
    def chi_p(self) -> np.ndarray:
        return self.values.real

    @property
    def chi_tilde_p(self) -> np.ndarray:
        return self.values.imag

    def evaluator(self):
        """Scalar Re ε_T(x) in grid units, using the method that produced ``values``."""
        method = "direct" if self.method == "direct" else "cf"
        scale, model, variant = self.scale, self.model, self.variant

        def f(u):
            return float(evaluate(model, np.array([u * scale]), method, variant)[0].real)

        return f


def sweep(model: ChainModel, x_min=WINDOW_GRID[0], x_max=WINDOW_GRID[1], n_points=WINDOW_GRID[2],
          method="cf", variant=None, units="kappa_N") -> Spectrum:
    """Evaluate ε_T on ``n_points`` uniform points of [x_min, x_max] (in ``units``)."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not x_min < x_max:
        raise ValueError("x_min must be < x_max")
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}")
    if variant is not None:
        variant = AtomTermVariant.parse(variant)
    elif model.atom is not None:
        variant = AtomTermVariant.REDUCED
    scale = _scale(model, units)
    grid = np.linspace(x_min, x_max, int(n_points))
    x = grid * scale
    direct = None
    if method == "direct":
        values = eps_t_direct_grid(model, x)
    else:
        values = eps_t_cf_grid(model, x, variant)
        if method == "both":
            direct = eps_t_direct_grid(model, x)
    return Spectrum(grid=grid, values=values, method=method, units=units, model=model,
                    variant=variant, direct=direct)


# --------------------------------------------------------------------------
# dips
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Dip:
    x0: float
    depth: float
    prominence: float
    width: float


@dataclass(frozen=True)
class WindowReport:
    dips: tuple
    units: str = "kappa_N"

    def __len__(self):
        return len(self.dips)

    @property
    def positions(self) -> np.ndarray:
        return np.array([d.x0 for d in self.dips])


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, a, b, tol):
    """Minimise a unimodal ``f`` on [a, b] until the bracket is shorter than ``tol``."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def find_windows(spectrum: Spectrum, depth_max=DEPTH_MAX, prominence_min=PROMINENCE_MIN,
                 refine=True) -> WindowReport:
    """Transparency windows: interior minima of Re ε_T with small depth and clear prominence.

    Candidates come from the grid; each accepted dip is then refined by
    golden-section search of the model between its grid neighbours.
    """
    y = np.asarray(spectrum.values.real, dtype=float)
    grid = spectrum.grid
    if y.size < 3:
        return WindowReport(dips=(), units=spectrum.units)
    peaks, _ = find_peaks(-y)
    if peaks.size == 0:
        return WindowReport(dips=(), units=spectrum.units)
    prom, lb, rb = peak_prominences(-y, peaks)
    widths = peak_widths(-y, peaks, rel_height=0.5, prominence_data=(prom, lb, rb))[0]
    step = grid[1] - grid[0]
    f = spectrum.evaluator() if refine else None
    tol = REFINE_TOL / spectrum.scale
    dips = []
    for k, p, w in zip(peaks, prom, widths):
        if y[k] > depth_max or p < prominence_min:
            continue
        x0, depth = grid[k], y[k]
        if refine:
            xr, yr = golden_section(f, grid[k - 1], grid[k + 1], tol)
            if yr <= depth:
                x0, depth = xr, yr
        dips.append(Dip(x0=float(x0), depth=float(depth),
                        prominence=float(p + (y[k] - depth)), width=float(w * step)))
    dips.sort(key=lambda d: d.x0)
    return WindowReport(dips=tuple(dips), units=spectrum.units)


# --------------------------------------------------------------------------
# DDI tracking
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TrackPoint:
    V: float
    extra: tuple
    left: Optional[float]
    right: Optional[float]
    report: WindowReport = field(repr=False)

    @property
    def n_extra(self) -> int:
        return len(self.extra)


@dataclass(frozen=True)
class ResonanceTrack:
    points: tuple
    baseline: WindowReport
    center: float
    units: str = "kappa_N"

    def positions(self, side):
        """Per-V position of the ``side`` extra dip, NaN where it has vanished."""
        return np.array([np.nan if getattr(p, side) is None else getattr(p, side) for p in self.points])

    @property
    def v_values(self):
        return np.array([p.V for p in self.points])


def classify_extra(report: WindowReport, baseline: WindowReport, tol: float) -> tuple:
    """Dips of ``report`` farther than ``tol`` from every baseline dip."""
    base = baseline.positions
    out = []
    for d in report.dips:
        if base.size == 0 or np.min(np.abs(base - d.x0)) > tol:
            out.append(d.x0)
    return tuple(out)


def track_resonances(model: ChainModel, v_values: Sequence[float], baseline: ChainModel = None,
                     x_min=DDI_GRID[0], x_max=DDI_GRID[1], n_points=DDI_GRID[2],
                     variant=None, units="kappa_N", center=0.0) -> ResonanceTrack:
    """Follow the atom-induced extra dips as the DDI strength V changes.

    A dip is "extra" when it lies farther than 0.05 κ_N from every dip of
    the atom-free twin. ``left``/``right`` hold the extra dip closest to
    ``center`` on each side (None once it has vanished).
    """
    if model.atom is None:
        raise ValueError("model has no atom")
    if len(v_values) == 0:
        raise ValueError("v_values must be nonempty")
    if baseline is None:
        baseline = model.without_atom()
    base_report = find_windows(sweep(baseline, x_min, x_max, n_points, "cf", None, units))
    tol = MATCH_TOL * model.kappa_N / _scale(model, units)
    points = []
    for V in v_values:
        m = model.with_atom(V=float(V))
        rep = find_windows(sweep(m, x_min, x_max, n_points, "cf", variant, units))
        extra = classify_extra(rep, base_report, tol)
        lefts = [e for e in extra if e < center]
        rights = [e for e in extra if e >= center]
        points.append(TrackPoint(
            V=float(V),
            extra=extra,
            left=max(lefts) if lefts else None,
            right=min(rights) if rights else None,
            report=rep,
        ))
    return ResonanceTrack(points=tuple(points), baseline=base_report, center=center, units=units)


# --------------------------------------------------------------------------
# Fano fitting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FanoFit:
    x0: float
    gamma_w: float
    q: float
    amplitude: float
    offset: float
    rms_residual: float
    iterations: int = 0

    @property
    def params(self):
        return np.array([self.x0, self.gamma_w, self.q, self.amplitude, self.offset])


# below this |q| the dual branch is numerically meaningless
Q_DUAL_MIN = 1e-6


def fano_profile(x, x0, gamma_w, q, amplitude, offset):
    """A·(qΓ/2 + (x − x0))² / ((Γ/2)² + (x − x0)²) + B."""
    e = np.asarray(x, dtype=float) - x0
    h = 0.5 * gamma_w
    return amplitude * (q * h + e) ** 2 / (h * h + e * e) + offset


def _guesses(x, y):
    n = x.size
    edge = max(1, n // 10)
    far = 0.5 * (y[:edge].mean() + y[-edge:].mean())
    span = x[-1] - x[0]
    dev = np.abs(y - far)
    big = x[dev >= 0.5 * dev.max()]
    gamma0 = max(big[-1] - big[0], 4 * (x[1] - x[0]), 1e-3 * span)
    out = []
    for B, xz in ((y.min(), x[np.argmin(y)]), (y.max(), x[np.argmax(y)])):
        A = far - B
        if A == 0:
            continue
        for q in (-3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0):
            for g in (gamma0, 0.3 * gamma0):
                out.append(np.array([xz + 0.5 * q * g, g, q, A, B]))
    return out


def fano_fit(x, y, initial=None, max_iter=200, xtol=1e-10) -> FanoFit:
    """Least-squares fit of :func:`fano_profile` to ``(x, y)``.

    Uses Levenberg–Marquardt with finite-difference Jacobians. Without
    ``initial`` (x0, Γ, q, A, B) several starts are tried and the lowest
    residual kept.

    The form is invariant under q → −1/q, A → −A·q², B → B + A(1 + q²), so
    results are reported on the A ≥ 0 branch, where B is the profile
    minimum (the interference zero). A Lorentzian peak (q ≈ 0, A < 0) has
    no finite dual and is returned as is.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 8 or x.shape != y.shape:
        raise DegenerateSlice("need at least 8 matching points")
    if np.ptp(y) == 0:
        raise DegenerateSlice("slice is constant")
    starts = [np.asarray(initial, dtype=float)] if initial is not None else _guesses(x, y)

    def resid(p):
        return fano_profile(x, *p) - y

    best = None
    for p0 in starts:
        sol = least_squares(resid, p0, method="lm", xtol=xtol, ftol=1e-15, gtol=1e-15,
                            max_nfev=max_iter * (p0.size + 1))
        if not np.all(np.isfinite(sol.x)):
            continue
        if best is None or sol.cost < best.cost:
            best = sol
    if best is None:
        raise FitNonConvergence(max_iter, math.inf)
    rms = math.sqrt(2.0 * best.cost / x.size)
    iterations = int(math.ceil(best.nfev / (best.x.size + 1)))
    if best.status == 0:
        raise FitNonConvergence(iterations, rms)
    x0, g, q, A, B = best.x
    if g < 0:
        g, q = -g, -q
    if A < 0 and abs(q) > Q_DUAL_MIN:
        A, B, q = -A * q * q, B + A * (1.0 + q * q), -1.0 / q
    return FanoFit(x0=float(x0), gamma_w=float(g), q=float(q), amplitude=float(A),
                   offset=float(B), rms_residual=rms, iterations=iterations)


def resonance_slice(spectrum: Spectrum, x0: float, half_width: float):
    m = np.abs(spectrum.grid - x0) <= half_width
    return spectrum.grid[m], spectrum.values.real[m]


def fit_extra_resonance(model: ChainModel, V: float, side="right", track=None,
                        half_width=None, n_points=2001, units="kappa_N") -> FanoFit:
    """Fano fit of the left/right extra dip at DDI strength ``V``.

    The slice spans ``half_width`` (default: one full width at half
    prominence, at least 0.05) either side of the tracked dip and is
    resampled on ``n_points``.
    """
    if track is None:
        track = track_resonances(model, [V], units=units)
    point = next((p for p in track.points if p.V == float(V)), None)
    if point is None:
        raise ValueError(f"V={V} not in track")
    x0 = getattr(point, side)
    if x0 is None:
        raise DegenerateSlice(f"no {side} extra resonance at V={V}")
    dip = min(point.report.dips, key=lambda d: abs(d.x0 - x0))
    if half_width is None:
        half_width = max(dip.width, 0.05)
    m = model.with_atom(V=float(V))
    sl = sweep(m, x0 - half_width, x0 + half_width, n_points, "cf", None, units)
    return fano_fit(sl.grid, sl.values.real)


# --------------------------------------------------------------------------
# method comparison
# --------------------------------------------------------------------------

def relative_deviation(a, ref):
    a = np.asarray(a)
    ref = np.asarray(ref)
    return np.abs(a - ref) / np.maximum(np.abs(ref), 1e-30)


def compare_methods(model: ChainModel, x_min=WINDOW_GRID[0], x_max=WINDOW_GRID[1],
                    n_points=WINDOW_GRID[2], units="kappa_N") -> dict:
    """Per-point relative deviation of each continued-fraction variant from the direct solve.

    Atom-free models report the single ``"none"`` entry; with an atom both
    ``"reduced"`` and ``"full"`` are reported (``None`` where a variant's
    preconditions fail).
    """
    scale = _scale(model, units)
    grid = np.linspace(x_min, x_max, int(n_points))
    x = grid * scale
    direct = eps_t_direct_grid(model, x)
    variants = [AtomTermVariant.NONE] if model.atom is None else [AtomTermVariant.REDUCED, AtomTermVariant.FULL]
    out = {"grid": grid, "units": units, "direct": direct, "variants": {}}
    for v in variants:
        try:
            cf = eps_t_cf_grid(model, x, v)
        except (PreconditionViolated, DegenerateDenominator) as exc:
            out["variants"][v.value] = {"error": str(exc), "max_rel": None, "per_point": None}
            continue
        rel = relative_deviation(cf, direct)
        out["variants"][v.value] = {"max_rel": float(rel.max()), "per_point": rel, "cf": cf}
    return out
