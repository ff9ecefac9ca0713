"""Input-output curves, hysteresis traces, output density maps and CPA loci.

Curves are parameterized by the intracavity intensity I and inverted to the
input intensity analytically, so every branch comes out in one pass and the
stability test reduces to the sign of d(i_in)/dI.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .cpa import CPA_TUNING, DeltaAc, cpa_intensity_curve, curve_folds, tuned
from .errors import FormulaDomain, GridError, NotBistable
from .model import (
    chi_rational,
    drive_factor,
    input_intensity,
    input_intensity_slope,
    real_nonnegative_roots_batch,
    response_numerator,
    solve_steady_states,
    _residual_poly,
)
from .params import ModelVariant, ProbeDrive, SystemParams, check_variant, default_variant


def _variant(params, variant):
    return check_variant(params, variant if variant is not None else default_variant(params))


def check_grid(grid, name="grid", nonnegative=True) -> np.ndarray:
    try:
        arr = np.asarray(grid, dtype=float)
    except (TypeError, ValueError) as exc:
        raise GridError(f"{name} is not numeric: {exc}") from None
    if arr.ndim != 1 or arr.size == 0:
        raise GridError(f"{name} must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise GridError(f"{name} contains non-finite values")
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise GridError(f"{name} must be strictly increasing")
    if nonnegative and arr[0] < 0:
        raise GridError(f"{name} must be >= 0")
    return arr


def intensity_grid(i_min: float, i_max: float, steps: int, log: Optional[bool] = None) -> np.ndarray:
    """Input grid; logarithmic by default when it spans more than two decades."""
    if steps < 2 or not i_max > i_min or i_min < 0:
        raise GridError(f"bad intensity grid ({i_min}, {i_max}, {steps})")
    if log is None:
        log = i_min > 0 and i_max / i_min > 100
    if log:
        if i_min <= 0:
            raise GridError("a logarithmic grid needs i_min > 0")
        return np.geomspace(i_min, i_max, steps)
    return np.linspace(i_min, i_max, steps)


def detuning_grid(dp_min: float, dp_max: float, step: float = 0.02, fine_step: float = 0.005,
                  fine_half_width: float = 0.5) -> np.ndarray:
    """Detuning axis with a refined stretch around the two-photon resonance."""
    if not dp_max > dp_min or step <= 0 or fine_step <= 0:
        raise GridError(f"bad detuning grid ({dp_min}, {dp_max}, {step})")
    coarse = np.arange(dp_min, dp_max + 0.5 * step, step)
    lo, hi = max(dp_min, -fine_half_width), min(dp_max, fine_half_width)
    fine = np.arange(lo, hi + 0.5 * fine_step, fine_step) if hi > lo else np.empty(0)
    grid = np.unique(np.round(np.concatenate([coarse, fine]), 12))
    return grid[(grid >= dp_min - 1e-12) & (grid <= dp_max + 1e-12)]


# ------------------------------------------------------------------ curves

def _fields_along(params, delta_p, intensity, variant, phi=0.0):
    """(i_in, out_l, out_r) along the curve at intracavity intensities ``intensity``."""
    rat = chi_rational(params, delta_p, variant)
    i_in = input_intensity(params, delta_p, intensity, variant, phi)
    amp = np.sqrt(np.clip(i_in, 0.0, None))
    s = amp * (math.sqrt(params.kappa_l / params.tau) * complex(math.cos(phi), math.sin(phi))
               + math.sqrt(params.kappa_r / params.tau))
    qv = npoly.polyval(intensity, rat.q)
    rv = npoly.polyval(intensity, _residual_poly(params, delta_p, rat))
    alpha = s * qv / rv
    out_l = math.sqrt(params.kappa_l * params.tau) * alpha - amp * complex(math.cos(phi), math.sin(phi))
    out_r = math.sqrt(params.kappa_r * params.tau) * alpha - amp
    return i_in, out_l, out_r


@dataclass(frozen=True)
class BranchCurve:
    delta_p: float
    delta_ac: float
    variant: ModelVariant
    intensity: np.ndarray
    i_in: np.ndarray
    i_out_l: np.ndarray
    i_out_r: np.ndarray
    stable: np.ndarray
    folds: tuple = ()

    @property
    def i_out(self) -> np.ndarray:
        return 0.5 * (self.i_out_l + self.i_out_r)

    @property
    def points(self):
        return list(zip(self.i_in, self.i_out, self.intensity, self.stable))

    @property
    def bistable(self) -> bool:
        return not bool(np.all(self.stable))

    def unstable_segments(self) -> list:
        """(I_lo, I_hi) of each maximal unstable stretch."""
        segs, start = [], None
        for k, ok in enumerate(self.stable):
            if not ok and start is None:
                start = k
            elif ok and start is not None:
                segs.append((self.intensity[start], self.intensity[k - 1]))
                start = None
        if start is not None:
            segs.append((self.intensity[start], self.intensity[-1]))
        return segs


def input_output_curve(params: SystemParams, delta_p: float, i_grid, variant=None,
                       delta_ac: DeltaAc = CPA_TUNING, n_dense: int = 2000, phi: float = 0.0) -> BranchCurve:
    """The full output-versus-input curve covering the input range of ``i_grid``."""
    grid = check_grid(i_grid, "i_grid")
    params.require_symmetric()
    variant = _variant(params, variant)
    p = tuned(params, delta_p, delta_ac, variant)
    folds = curve_folds(p, delta_p, variant)

    def roots_at(i_in):
        return solve_steady_states(p, ProbeDrive.from_intensity(delta_p, i_in, phi), variant).intensities

    i_hi = float(roots_at(grid[-1]).max()) if grid[-1] > 0 else 0.0
    i_lo = float(roots_at(grid[0]).min()) if grid[0] > 0 else 0.0
    pieces = [np.linspace(i_lo, i_hi, n_dense), [f.intensity for f in folds if i_lo <= f.intensity <= i_hi]]
    if i_lo > 0 and i_hi / i_lo > 100:
        pieces.append(np.geomspace(i_lo, i_hi, n_dense))
    elif i_lo == 0 and i_hi > 0:
        pieces.append(np.geomspace(i_hi * 1e-6, i_hi, n_dense // 2))
    for x in grid:
        pieces.append(roots_at(x) if x > 0 else [0.0])
    intensity = np.unique(np.concatenate([np.atleast_1d(np.asarray(x, dtype=float)) for x in pieces]))
    intensity = intensity[(intensity >= i_lo) & (intensity <= i_hi)]
    i_in, out_l, out_r = _fields_along(p, delta_p, intensity, variant, phi)
    slope = input_intensity_slope(p, delta_p, intensity, variant, phi)
    # folds themselves count as stable limit points
    fold_i = np.array([f.intensity for f in folds])
    near_fold = np.zeros(intensity.shape, dtype=bool)
    for f in fold_i:
        near_fold |= np.abs(intensity - f) <= 1e-9 * max(1.0, f)
    stable = (slope > 0) | near_fold
    return BranchCurve(float(delta_p), p.delta_ac, variant, intensity, i_in,
                       np.abs(out_l) ** 2, np.abs(out_r) ** 2, stable, tuple(folds))


# -------------------------------------------------------------- hysteresis

@dataclass(frozen=True)
class HysteresisTrace:
    delta_p: float
    delta_ac: float
    i_grid: np.ndarray
    up_intensity: np.ndarray
    up_i_out: np.ndarray
    down_intensity: np.ndarray
    down_i_out: np.ndarray
    jump_up: Optional[float]
    jump_down: Optional[float]
    folds: tuple = ()

    @property
    def up(self):
        return list(zip(self.i_grid, self.up_i_out))

    @property
    def down(self):
        return list(zip(self.i_grid, self.down_i_out))

    @property
    def bistable(self) -> bool:
        return self.jump_up is not None and self.jump_down is not None

    @property
    def width(self) -> float:
        return (self.jump_up - self.jump_down) if self.bistable else 0.0


def _segment(intensity, fold_i):
    return np.searchsorted(fold_i, intensity)


def _follow(roots_per_step, stable_per_step, fold_i, order, pick_first):
    """Branch-following: stay on the same monotone segment while it exists.

    Returns the chosen root per step (in ``order``) and the step index of the
    first jump, or None.
    """
    chosen = [math.nan] * len(roots_per_step)
    jump = None
    prev_seg = None
    prev_val = None
    for k in order:
        roots = roots_per_step[k]
        ok = roots[stable_per_step[k]] if roots.size else roots
        if ok.size == 0:
            ok = roots
        if ok.size == 0:
            continue
        if prev_seg is None:
            val = ok[0] if pick_first else ok[-1]
        else:
            same = ok[_segment(ok, fold_i) == prev_seg]
            if same.size:
                val = same[np.argmin(np.abs(same - prev_val))]
            else:
                val = ok[np.argmin(np.abs(ok - prev_val))]
                if jump is None:
                    jump = k
        chosen[k] = float(val)
        prev_seg = _segment(val, fold_i)
        prev_val = val
    return np.array(chosen), jump


def hysteresis_trace(params: SystemParams, delta_p: float, i_min: float, i_max: float, steps: int,
                     variant=None, delta_ac: DeltaAc = CPA_TUNING, strict: bool = True,
                     log: Optional[bool] = False) -> HysteresisTrace:
    """Sweep the input up then down, following the occupied stable branch."""
    grid = intensity_grid(i_min, i_max, steps, log)
    params.require_symmetric()
    variant = _variant(params, variant)
    p = tuned(params, delta_p, delta_ac, variant)
    folds = curve_folds(p, delta_p, variant)
    fold_i = np.array(sorted(f.intensity for f in folds))
    roots = [solve_steady_states(p, ProbeDrive.from_intensity(delta_p, x), variant).intensities for x in grid]
    stab = [input_intensity_slope(p, delta_p, r, variant) > 0 if r.size else np.zeros(0, bool) for r in roots]
    n = len(grid)
    up, k_up = _follow(roots, stab, fold_i, range(n), True)
    down, k_down = _follow(roots, stab, fold_i, range(n - 1, -1, -1), False)

    def out_of(intensity):
        i_in, out_l, out_r = _fields_along(p, delta_p, intensity, variant)
        return 0.5 * (np.abs(out_l) ** 2 + np.abs(out_r) ** 2)

    trace = HysteresisTrace(
        float(delta_p), p.delta_ac, grid, up, out_of(up), down, out_of(down),
        None if k_up is None else float(grid[k_up]),
        None if k_down is None else float(grid[k_down]),
        tuple(folds),
    )
    if not trace.bistable and max(len(r) for r in roots) <= 1:
        if strict:
            raise NotBistable(f"single-valued response at delta_p={delta_p} over [{i_min}, {i_max}]",
                              trace=trace)
    return trace


# --------------------------------------------------------------- density maps

class MapPolicy(str, enum.Enum):
    ADIABATIC_UP = "AdiabaticUp"
    ADIABATIC_DOWN = "AdiabaticDown"
    MIN_OUTPUT = "MinOutput"
    MAX_OUTPUT = "MaxOutput"

    @classmethod
    def parse(cls, value) -> "MapPolicy":
        if isinstance(value, cls):
            return value
        key = str(value).replace("-", "").replace("_", "").lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        aliases = {"up": cls.ADIABATIC_UP, "down": cls.ADIABATIC_DOWN, "min": cls.MIN_OUTPUT,
                   "max": cls.MAX_OUTPUT}
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown policy {value!r}; choose from {[m.value for m in cls]}")


@dataclass(frozen=True)
class DensityMap:
    delta_p: np.ndarray
    i_in: np.ndarray
    values: np.ndarray  # shape (len(i_in), len(delta_p)); mean per-side output
    intensity: np.ndarray
    policy: MapPolicy
    delta_ac: np.ndarray
    failures: tuple = field(default_factory=tuple)


def _column_poly(p, dp, variant, phi):
    """Per-detuning polynomials shared by every cell of a map column."""
    rat = chi_rational(p, dp, variant)
    n_poly, q = response_numerator(p, dp, variant)
    fold = npoly.polysub(npoly.polymul(npoly.polyder(n_poly), q),
                         2 * npoly.polymul(n_poly, npoly.polyder(q)))
    return rat, n_poly, q, fold, _residual_poly(p, dp, rat), drive_factor(p, phi)


def _cell_outputs(p, roots, iin, q, resid, phi):
    """Mean per-side output for a matrix of roots (rows share the input in ``iin``)."""
    amp = np.sqrt(iin)[:, None]
    e = complex(math.cos(phi), math.sin(phi))
    s = amp * (math.sqrt(p.kappa_l / p.tau) * e + math.sqrt(p.kappa_r / p.tau))
    with np.errstate(invalid="ignore", divide="ignore"):
        alpha = s * npoly.polyval(roots, q) / npoly.polyval(roots, resid)
    out_l = math.sqrt(p.kappa_l * p.tau) * alpha - amp * e
    out_r = math.sqrt(p.kappa_r * p.tau) * alpha - amp
    return 0.5 * (np.abs(out_l) ** 2 + np.abs(out_r) ** 2)


def density_map(params: SystemParams, dp_grid, iin_grid, policy="MinOutput", variant=None,
                delta_ac: DeltaAc = CPA_TUNING, phi: float = 0.0) -> DensityMap:
    """Output intensity over (delta_p, i_in) with one root picked per cell.

    Only stable roots are eligible unless a cell has none (fold-adjacent cells).
    """
    dps = check_grid(dp_grid, "dp_grid", nonnegative=False)
    iin = check_grid(iin_grid, "iin_grid")
    policy = MapPolicy.parse(policy)
    params.require_symmetric()
    variant = _variant(params, variant)
    ni = iin.size
    columns = []
    for dp in dps:
        p = tuned(params, dp, delta_ac, variant)
        columns.append((p,) + _column_poly(p, dp, variant, phi))
    width = max(max(len(c[2]), 2 * len(c[3]) - 1) for c in columns)
    batch = np.zeros((dps.size * ni, width))
    for j, (p, rat, n_poly, q, fold, resid, df) in enumerate(columns):
        q2 = npoly.polymul(q, q)
        blk = batch[j * ni:(j + 1) * ni]
        blk[:, : len(n_poly)] += n_poly
        blk[:, : len(q2)] -= np.outer(iin * df, q2)
    all_roots, all_failed = real_nonnegative_roots_batch(batch)
    values = np.full((ni, dps.size), np.nan)
    intens = np.full_like(values, np.nan)
    failures = []
    for j, dp in enumerate(dps):
        p, rat, n_poly, q, fold, resid, df = columns[j]
        roots = all_roots[j * ni:(j + 1) * ni]
        failed = all_failed[j * ni:(j + 1) * ni]
        for k in np.nonzero(failed)[0]:
            failures.append((float(dp), float(iin[k]), "root solver returned non-finite values"))
        for k in np.nonzero(~failed & np.all(np.isnan(roots), axis=1))[0]:
            failures.append((float(dp), float(iin[k]), "no admissible root"))
        with np.errstate(invalid="ignore"):
            stable = npoly.polyval(roots, fold) * npoly.polyval(roots, q) > 0
        has = ~np.isnan(roots)
        eligible = np.where(np.any(stable & has, axis=1)[:, None], stable & has, has)
        if policy in (MapPolicy.ADIABATIC_UP, MapPolicy.ADIABATIC_DOWN):
            fold_i = np.array(sorted(f.intensity for f in curve_folds(p, dp, variant)))
            rows = [roots[k][eligible[k]] for k in range(ni)]
            up = policy is MapPolicy.ADIABATIC_UP
            order = range(ni) if up else range(ni - 1, -1, -1)
            chosen, _ = _follow(rows, [np.ones(r.size, bool) for r in rows], fold_i, order, up)
            out = _cell_outputs(p, chosen[:, None], iin, q, resid, phi)[:, 0]
        else:
            outs = _cell_outputs(p, roots, iin, q, resid, phi)
            outs = np.where(eligible, outs, np.nan)
            ok = np.any(eligible, axis=1)
            pick = np.zeros(ni, dtype=int)
            if policy is MapPolicy.MIN_OUTPUT:
                pick[ok] = np.nanargmin(outs[ok], axis=1)
            else:
                pick[ok] = np.nanargmax(outs[ok], axis=1)
            chosen = np.where(ok, roots[np.arange(ni), pick], np.nan)
            out = np.where(ok, outs[np.arange(ni), pick], np.nan)
        values[:, j] = out
        intens[:, j] = chosen
    dacs = np.array([c[0].delta_ac for c in columns])
    return DensityMap(dps, iin, values, intens, policy, dacs, tuple(failures))


# ------------------------------------------------------------- CPA loci

LOCUS_AXES = {"delta_p": "delta_p", "r_pump": "r_pump", "r": "r_pump", "omega1": "omega1"}


@dataclass(frozen=True)
class CpaLocusMap:
    axis1: str
    grid1: np.ndarray
    axis2: str
    grid2: np.ndarray
    intracavity: np.ndarray  # shape (len(grid1), len(grid2)); NaN outside the formula domain
    i_in: np.ndarray  # NaN where infeasible

    @property
    def feasible(self) -> np.ndarray:
        return np.isfinite(self.i_in)


def cpa_locus_map(params: SystemParams, axis1, axis2, delta_p: float = 0.0) -> CpaLocusMap:
    """Closed-form CPA input intensity over two swept quantities.

    ``delta_p`` is used only when neither axis is the detuning.
    """
    (name1, g1), (name2, g2) = axis1, axis2
    try:
        name1, name2 = LOCUS_AXES[name1], LOCUS_AXES[name2]
    except KeyError as exc:
        raise GridError(f"locus axes must come from {sorted(set(LOCUS_AXES))}, got {exc}") from None
    if name1 == name2:
        raise GridError("locus axes must differ")
    g1 = check_grid(g1, name1, nonnegative=name1 != "delta_p")
    g2 = check_grid(g2, name2, nonnegative=name2 != "delta_p")
    params.require_symmetric()
    intra = np.full((g1.size, g2.size), np.nan)
    transpose = name2 != "delta_p" and name1 == "delta_p"
    outer_name, outer, inner_name, inner = (name2, g2, name1, g1) if transpose else (name1, g1, name2, g2)
    for i, a in enumerate(outer):
        try:
            if inner_name == "delta_p":
                row = cpa_intensity_curve(params.replace(**{outer_name: a}), inner)
            else:
                row = np.full(inner.size, np.nan)
                for j, b in enumerate(inner):
                    try:
                        row[j] = cpa_intensity_curve(params.replace(**{outer_name: a, inner_name: b}), delta_p)
                    except FormulaDomain:
                        pass
        except FormulaDomain:
            continue
        if transpose:
            intra[:, i] = row
        else:
            intra[i, :] = row
    i_in = np.where(intra >= 0, params.kappa_tau * intra, np.nan)
    return CpaLocusMap(name1, g1, name2, g2, intra, i_in)
