"""Coherent perfect absorption: closed forms, thresholds, regimes and onsets.

CPA (both outputs dark for in-phase inputs) needs the steady-state
denominator to equal 2 kappa. Its real part fixes the intracavity CPA
intensity, which is what the closed forms below return. The imaginary part
must vanish as well, which pins the cavity detuning to

    delta_ac = delta_p + Im chi(I_cpa).

With delta_ac = 0 the closed-form intensity is never an exact CPA point, so
the analysis routines default to this compensated tuning (``delta_ac="cpa"``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from .errors import FormulaDomain, NoMatchingRoot, NotFound
from .model import (
    chi_rational,
    fold_polynomial,
    input_intensity,
    input_intensity_slope,
    real_nonnegative_roots,
    solve_steady_states,
)
from .params import ModelVariant, ProbeDrive, SystemParams, check_variant, default_variant

CPA_TUNING = "cpa"
DeltaAc = Union[None, float, str]

SCAN_WINDOW = (-12.0, 12.0)
SCAN_SAMPLES = 4801
XTOL = 1e-9
MATCH_RTOL = 1e-6
PASS_TOL_EXACT = 1e-8
PASS_TOL_REDUCED = 1e-6


@dataclass(frozen=True)
class CpaPoint:
    delta_p: float
    intensity_intracavity: float
    intensity_input: float
    feasible: bool
    formula: str = "three-level"


# ------------------------------------------------------------- closed forms

def _formula_for(params: SystemParams) -> str:
    params.require_symmetric()
    if params.omega1 > 0:
        return "three-level"
    if params.gamma32 == 0:
        return "two-level"
    raise FormulaDomain(
        "omega1 = 0 with gamma32 > 0: the three-level CPA formula is 0/0 and the "
        "two-level one does not apply; use SystemParams.two_level()"
    )


def _x_terms(params: SystemParams, dp):
    G, G32, om2, k = params.gamma, params.gamma32, params.omega1 ** 2, params.kappa
    dp2 = dp * dp
    x1 = G32 * (G * G * dp2 - 4 * om2 * om2) + 8 * G * om2 * (dp2 + om2)
    x2 = 2 * params.g2n * G * dp2 - k * (G * G * dp2 + 4 * (dp2 - om2) ** 2)
    x3 = G * dp2 + G32 * (om2 - dp2)
    return x1, x2, x3


def _three_level_parts(params: SystemParams, dp):
    G, G31, G32 = params.gamma, params.gamma31, params.gamma32
    om2, r, k, g2, g2n = params.omega1 ** 2, params.r_pump, params.kappa, params.g ** 2, params.g2n
    x1, x2, x3 = _x_terms(params, dp)
    num = 4 * G31 * om2 * x2 - r * ((G * G32 + 8 * om2) * (2 * g2n * G * dp * dp - x2) + 8 * g2n * om2 * x3)
    den = 4 * g2 * (2 * r * om2 * (G32 * (G * k + g2n) + 2 * k * (dp * dp + om2)) + k * x1)
    return num, den


def _two_level_parts(params: SystemParams, dp):
    G, r, k = params.gamma, params.r_pump, params.kappa
    num = 2 * params.g2n * G * (G - r) - k * (G + 2 * r) * (G * G + 4 * dp * dp)
    den = 4 * params.g ** 2 * k * (2 * G + r) * np.ones_like(dp)
    return num, den


def cpa_parts(params: SystemParams, delta_p):
    """Numerator and denominator of the closed-form |alpha_CPA|^2 (vectorized)."""
    dp = np.asarray(delta_p, dtype=float)
    if _formula_for(params) == "three-level":
        return _three_level_parts(params, dp)
    return _two_level_parts(params, dp)


def cpa_intensity_curve(params: SystemParams, delta_p) -> np.ndarray:
    """Closed-form |alpha_CPA|^2 over an array of detunings (negative = infeasible)."""
    num, den = cpa_parts(params, delta_p)
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / den


def _point(params, dp, value, formula):
    feasible = bool(np.isfinite(value) and value >= 0)
    return CpaPoint(float(dp), float(value), float(params.kappa_tau * value), feasible, formula)


def cpa_intracavity_intensity(params: SystemParams, delta_p: float) -> CpaPoint:
    formula = _formula_for(params)
    return _point(params, delta_p, float(cpa_intensity_curve(params, delta_p)), formula)


def cpa_intensity_taylor(params: SystemParams, delta_p: float) -> CpaPoint:
    """First order in r of the closed-form CPA intensity."""
    formula = _formula_for(params)
    G, r, k, g2, g2n = params.gamma, params.r_pump, params.kappa, params.g ** 2, params.g2n
    dp = float(delta_p)
    if formula == "two-level":
        lin = G * G + 4 * dp * dp
        value = ((2 * g2n * G - k * lin) / (8 * g2 * k)
                 - r * (6 * g2n * G + 3 * k * lin) / (16 * g2 * k * G))
    else:
        G31, G32, om2 = params.gamma31, params.gamma32, params.omega1 ** 2
        x1, x2, x3 = _x_terms(params, dp)
        value = (G31 * om2 * x2 / (g2 * k * x1)
                 - r / (4 * g2 * k * k * x1 * x1) * (
                     8 * G31 * om2 * om2 * x2 * (2 * k * (dp * dp + om2) + G32 * (g2n + G * k))
                     + k * x1 * (8 * g2n * om2 * x3 + (G * G32 + 8 * om2) * (2 * g2n * G * dp * dp - x2))))
    return _point(params, dp, value, formula)


# --------------------------------------------------------- scans in delta_p

def _scan_grid(window, samples):
    lo, hi = window
    if not hi > lo or samples < 2:
        raise ValueError(f"bad scan window {window} / samples {samples}")
    return np.linspace(lo, hi, int(samples))


def _sign_change_roots(func, num_den, grid, xtol):
    """Roots of func on grid via sign changes, skipping brackets where den flips (poles)."""
    num, den = num_den(grid)
    vals = num / den
    roots = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if vals[i] == 0:
            roots.append(float(grid[i]))
            continue
        if not (np.isfinite(a) and np.isfinite(b)) or a * b >= 0:
            continue
        if den[i] * den[i + 1] <= 0:
            continue
        roots.append(brentq(func, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
    if vals[-1] == 0:
        roots.append(float(grid[-1]))
    return roots


def cpa_frequency_thresholds(params: SystemParams, window=SCAN_WINDOW, samples=SCAN_SAMPLES,
                             xtol=XTOL) -> list[float]:
    """Detunings where the closed-form CPA intensity changes sign, sorted."""
    grid = _scan_grid(window, samples)
    func = lambda x: float(cpa_intensity_curve(params, x))
    return sorted(_sign_change_roots(func, lambda x: cpa_parts(params, x), grid, xtol))


def cpa_bands(params: SystemParams, window=SCAN_WINDOW, samples=SCAN_SAMPLES,
              xtol=XTOL) -> list[tuple[float, float]]:
    """Feasible detuning intervals, clipped to the scan window."""
    edges = [window[0]] + cpa_frequency_thresholds(params, window, samples, xtol) + [window[1]]
    bands = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0:
            continue
        mid = float(cpa_intensity_curve(params, 0.5 * (lo + hi)))
        if np.isfinite(mid) and mid >= 0:
            if bands and abs(bands[-1][1] - lo) == 0:
                bands[-1] = (bands[-1][0], hi)
            else:
                bands.append((lo, hi))
    return bands


def cpa_frequencies_at_intensity(params: SystemParams, i_in: float, window=SCAN_WINDOW,
                                 samples=SCAN_SAMPLES, xtol=XTOL) -> list[float]:
    """Detunings where the CPA input intensity equals ``i_in``."""
    if not i_in > 0:
        raise ValueError(f"i_in must be positive, got {i_in}")
    kt = params.kappa_tau

    def parts(x):
        num, den = cpa_parts(params, x)
        return kt * num - i_in * den, den

    func = lambda x: float(np.divide(*parts(x)))
    return sorted(_sign_change_roots(func, parts, _scan_grid(window, samples), xtol))


def cpa_pump_cutoff(params: SystemParams, delta_p: float = 0.0, r_max: float = 10.0,
                    xtol: float = 1e-12) -> float:
    """Smallest pump rate at which CPA stops being feasible at ``delta_p``."""
    f = lambda r: float(cpa_intensity_curve(params.replace(r_pump=r), delta_p))
    if f(0.0) < 0:
        return 0.0
    rs = np.linspace(0.0, r_max, 2001)
    vals = np.array([f(r) for r in rs])
    neg = np.nonzero(vals < 0)[0]
    if neg.size == 0:
        raise NotFound(f"CPA stays feasible up to r = {r_max}")
    i = neg[0]
    return brentq(f, rs[i - 1], rs[i], xtol=xtol, rtol=4 * np.finfo(float).eps)


# ------------------------------------------------------ cavity tuning

def exact_cpa_intensities(params: SystemParams, delta_p: float, variant=None) -> np.ndarray:
    """Intensities where Re chi(I) = -kappa for the given variant (Re P + kappa Q = 0)."""
    rat = chi_rational(params, delta_p, variant)
    poly = npoly.polyadd(np.real(rat.p), params.kappa * rat.q)
    roots, _ = real_nonnegative_roots(poly, params=params)
    return roots


def cpa_cavity_detuning(params: SystemParams, delta_p: float, variant=None) -> float:
    """Cavity detuning that makes the CPA point exact at ``delta_p``.

    Falls back to the linear (I = 0) dispersion when CPA is infeasible there.
    """
    rat = chi_rational(params, delta_p, variant)
    roots = exact_cpa_intensities(params, delta_p, variant)
    i_cpa = float(roots[0]) if roots.size else 0.0
    return float(delta_p + np.imag(rat(i_cpa)))


def tuned(params: SystemParams, delta_p: float, delta_ac: DeltaAc = CPA_TUNING, variant=None) -> SystemParams:
    """``params`` with the cavity detuning resolved: None keeps it, "cpa" compensates, a float sets it."""
    if delta_ac is None:
        return params
    if isinstance(delta_ac, str):
        if delta_ac.strip().lower() != CPA_TUNING:
            raise ValueError(f"delta_ac must be a number or {CPA_TUNING!r}, got {delta_ac!r}")
        return params.replace(delta_ac=cpa_cavity_detuning(params, delta_p, variant))
    return params.replace(delta_ac=float(delta_ac))


# ------------------------------------------------------- back-substitution

@dataclass(frozen=True)
class CpaCheck:
    delta_p: float
    variant: ModelVariant
    delta_ac: float
    intensity_expected: float
    intensity_root: float
    i_in: float
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def verify_cpa(params: SystemParams, delta_p: float, variant=None, delta_ac: DeltaAc = CPA_TUNING) -> CpaCheck:
    """Drive the solver at the closed-form CPA input and measure the leftover output."""
    variant = check_variant(params, variant if variant is not None else default_variant(params))
    point = cpa_intracavity_intensity(params, delta_p)
    if not point.feasible or point.intensity_intracavity == 0:
        raise NoMatchingRoot(f"CPA infeasible at delta_p={delta_p} (|alpha|^2={point.intensity_intracavity})")
    p = tuned(params, delta_p, delta_ac, variant)
    drive = ProbeDrive.from_intensity(delta_p, point.intensity_input)
    states = solve_steady_states(p, drive, variant)
    target = point.intensity_intracavity
    if not len(states):
        raise NoMatchingRoot(f"no steady state at delta_p={delta_p}")
    best = states.nearest(target)
    if abs(best.intensity - target) > MATCH_RTOL * target:
        raise NoMatchingRoot(
            f"nearest root I={best.intensity!r} misses the CPA intensity {target!r} at delta_p={delta_p}")
    residual = (best.i_out_l + best.i_out_r) / (2 * drive.i_in)
    tol = PASS_TOL_EXACT if variant.is_two_level else PASS_TOL_REDUCED
    return CpaCheck(float(delta_p), variant, p.delta_ac, target, best.intensity, drive.i_in, residual, tol)


# ----------------------------------------------------------- regimes

class RegimeLabel(str, enum.Enum):
    LINEAR = "Linear"
    NORMALLY_NONLINEAR = "NormallyNonlinear"
    BISTABLE = "Bistable"
    NO_CPA = "NoCpa"


@dataclass(frozen=True)
class Fold:
    intensity: float
    i_in: float


def curve_folds(params: SystemParams, delta_p: float, variant=None) -> list[Fold]:
    """Turning points of i_in(I) (odd-multiplicity roots of the fold polynomial)."""
    roots, _ = real_nonnegative_roots(fold_polynomial(params, delta_p, variant), params=params)
    roots = roots[roots > 0]
    folds = []
    for root in roots:
        h = max(1e-7 * root, 1e-12)
        s_lo = input_intensity_slope(params, delta_p, max(root - h, 0.0), variant)
        s_hi = input_intensity_slope(params, delta_p, root + h, variant)
        if s_lo * s_hi < 0:
            folds.append(Fold(float(root), float(input_intensity(params, delta_p, root, variant))))
    return folds


def bistable_window(params: SystemParams, delta_p: float, variant=None) -> Optional[tuple[float, float]]:
    """(i_in low fold, i_in high fold) of the widest multi-valued window, or None."""
    folds = curve_folds(params, delta_p, variant)
    if len(folds) < 2:
        return None
    windows = []
    for a, b in zip(folds[:-1], folds[1:]):
        mid = 0.5 * (a.intensity + b.intensity)
        if input_intensity_slope(params, delta_p, mid, variant) < 0:
            windows.append((min(a.i_in, b.i_in), max(a.i_in, b.i_in)))
    if not windows:
        return None
    return max(windows, key=lambda w: w[1] - w[0])


def is_bistable(params: SystemParams, delta_p: float, variant=None) -> bool:
    return bistable_window(params, delta_p, variant) is not None


@dataclass(frozen=True)
class RegimeReport:
    label: RegimeLabel
    delta_p: float
    delta_ac: float
    cpa_intensity: Optional[float] = None
    cpa_i_in: Optional[float] = None
    window: Optional[tuple[float, float]] = None
    cpa_on_stable_branch: Optional[bool] = None
    cpa_in_window: Optional[bool] = None
    linear_bound: float = 0.0
    flags: tuple = field(default_factory=tuple)


def regime_classify(params: SystemParams, delta_p: float, variant=None,
                    delta_ac: DeltaAc = CPA_TUNING) -> RegimeReport:
    params.require_symmetric()
    variant = check_variant(params, variant if variant is not None else default_variant(params))
    p = tuned(params, delta_p, delta_ac, variant)
    bound = p.linear_bound
    window = bistable_window(p, delta_p, variant)
    candidates = exact_cpa_intensities(p, delta_p, variant)
    # a CPA root needs the dispersive part to cancel too
    chi = chi_rational(p, delta_p, variant)
    exact = [i for i in candidates
             if abs(delta_p - p.delta_ac + np.imag(chi(i))) <= 1e-8 * max(1.0, abs(delta_p))]
    if not exact:
        return RegimeReport(RegimeLabel.NO_CPA, float(delta_p), p.delta_ac, window=window, linear_bound=bound)
    i_cpa = float(exact[0])
    i_in = float(input_intensity(p, delta_p, i_cpa, variant))
    stable = bool(input_intensity_slope(p, delta_p, i_cpa, variant) > 0)
    common = dict(delta_p=float(delta_p), delta_ac=p.delta_ac, cpa_intensity=i_cpa, cpa_i_in=i_in,
                  window=window, cpa_on_stable_branch=stable, linear_bound=bound)
    if window is not None:
        inside = window[0] <= i_in <= window[1]
        flags = () if stable else ("CPA on unstable branch",)
        return RegimeReport(RegimeLabel.BISTABLE, cpa_in_window=inside, flags=flags, **common)
    label = RegimeLabel.LINEAR if i_in <= bound else RegimeLabel.NORMALLY_NONLINEAR
    return RegimeReport(label, cpa_in_window=False, **common)


# ----------------------------------------------------------- onset

@dataclass(frozen=True)
class OnsetResult:
    parameter: str
    value: float
    bracket: tuple[float, float]
    below_bracket: bool = False
    evaluations: int = 0


_SWEPT = {"omega1": "omega1", "r_pump": "r_pump", "r": "r_pump"}


def bistability_onset(params: SystemParams, delta_p: float, swept: str = "omega1",
                      bracket: tuple[float, float] = (1.5, 3.0), variant=None,
                      delta_ac: DeltaAc = CPA_TUNING, tol: float = 1e-3, samples: int = 31) -> OnsetResult:
    """First value of ``swept`` inside ``bracket`` at which a bistable window appears."""
    if swept not in _SWEPT:
        raise ValueError(f"swept must be one of {sorted(_SWEPT)}, got {swept!r}")
    name = _SWEPT[swept]
    lo, hi = map(float, bracket)
    if not hi >= lo:
        raise ValueError(f"bad bracket {bracket}")
    count = 0

    def bistable_at(x):
        nonlocal count
        count += 1
        p = params.replace(**{name: x})
        var = variant if variant is not None else default_variant(p)
        return is_bistable(tuned(p, delta_p, delta_ac, var), delta_p, var)

    xs = np.linspace(lo, hi, samples) if hi > lo else np.array([lo])
    flags = [bistable_at(x) for x in xs]
    if flags[0]:
        return OnsetResult(name, lo, (lo, hi), below_bracket=True, evaluations=count)
    try:
        k = flags.index(True)
    except ValueError:
        raise NotFound(f"no bistable window for {name} in [{lo}, {hi}] at delta_p={delta_p}") from None
    a, b = float(xs[k - 1]), float(xs[k])
    while b - a > tol:
        m = 0.5 * (a + b)
        if bistable_at(m):
            b = m
        else:
            a = m
    return OnsetResult(name, 0.5 * (a + b), (lo, hi), evaluations=count)
