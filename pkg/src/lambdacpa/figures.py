"""Named presets that regenerate the data behind each published figure.

Every preset starts from the default ``SystemParams`` and returns a
:class:`~lambdacpa.output.Result` of tables; rendering is left to the user.
Cases with omega1 = 0 run the two-level variant (see ``system_for``).
"""

from __future__ import annotations

import numpy as np

from .cpa import (
    CPA_TUNING,
    bistable_window,
    cpa_bands,
    cpa_intensity_curve,
    exact_cpa_intensities,
    tuned,
)
from .errors import NotBistable
from .model import input_intensity
from .output import Result, Table
from .params import ModelVariant, SystemParams
from .sweep import (
    MapPolicy,
    cpa_locus_map,
    density_map,
    detuning_grid,
    hysteresis_trace,
    input_output_curve,
)


def system_for(base: SystemParams, omega1: float, r_pump: float = 0.0):
    """(params, variant): the two-level reduction when omega1 = 0, else reduced three-level."""
    p = base.replace(omega1=omega1, r_pump=r_pump)
    if omega1 == 0:
        return p.two_level(), ModelVariant.TWO_LEVEL
    return p, ModelVariant.REDUCED


def _tag(x: float) -> str:
    return ("%g" % x).replace(".", "p")


# --------------------------------------------------------------- loci

def _locus(base, omega1, r_pump, axis2, grid2, dp_grid):
    p, _ = system_for(base, omega1, r_pump)
    m = cpa_locus_map(p, ("delta_p", dp_grid), (axis2, grid2))
    t = Table(["delta_p_over_Gamma", f"{axis2}_over_Gamma", "i_in_cpa"])
    for j, b in enumerate(m.grid2):
        for i, a in enumerate(m.grid1):
            t.add(a, b, m.i_in[i, j])
    return t


def fig2(base: SystemParams, panel: str, dp_grid=None) -> Result:
    dp_grid = detuning_grid(-10, 10) if dp_grid is None else dp_grid
    if panel == "a":
        t = _locus(base, 0.0, 0.0, "r_pump", np.linspace(0, 1, 101), dp_grid)
    elif panel == "b":
        t = _locus(base, 1.0, 0.0, "r_pump", np.linspace(0, 1, 101), dp_grid)
    elif panel == "c":
        t = _locus(base, 1.0, 0.0, "omega1", np.linspace(0, 3, 151), dp_grid)
    else:
        t = _locus(base, 1.0, 0.5, "omega1", np.linspace(0, 3, 151), dp_grid)
    return Result({f"fig2{panel}": t})


def fig3(base: SystemParams, panel: str) -> Result:
    omega1 = 0.0 if panel == "a" else 1.0
    dps = detuning_grid(-10, 10)
    rates = (0.0, 0.25, 0.5)
    cols = {"delta_p_over_Gamma": dps}
    edges = Table(["r_over_Gamma", "band_lo", "band_hi"])
    for r in rates:
        p, _ = system_for(base, omega1, r)
        v = cpa_intensity_curve(p, dps)
        cols[f"i_in_cpa_r{_tag(r)}"] = np.where(v >= 0, p.kappa_tau * v, np.nan)
        for lo, hi in cpa_bands(p):
            edges.add(r, lo, hi)
    return Result({f"fig3{panel}": Table.from_columns(**cols), f"fig3{panel}_bands": edges})


# --------------------------------------------------------------- curves

def auto_i_max(p: SystemParams, delta_p: float, variant, floor: float = 10.0) -> float:
    """Input range that shows the CPA point and any bistable window with margin."""
    tp = tuned(p, delta_p, CPA_TUNING, variant)
    marks = [floor, tp.linear_bound]
    roots = exact_cpa_intensities(tp, delta_p, variant)
    if roots.size:
        marks.append(float(input_intensity(tp, delta_p, roots[0], variant)))
    window = bistable_window(tp, delta_p, variant)
    if window:
        marks.append(window[1])
    return float(np.ceil(1.5 * max(marks)))


def curve_table(curve) -> Table:
    return Table.from_columns(i_in=curve.i_in, i_out=curve.i_out, intensity=curve.intensity,
                              stable=curve.stable)


def _curves(base, delta_p, cases, name, steps=400):
    tables = {}
    folds = Table(["case", "intensity", "i_in"])
    summary = {}
    for label, (p, variant) in cases:
        i_max = auto_i_max(p, delta_p, variant)
        c = input_output_curve(p, delta_p, np.linspace(0, i_max, steps), variant)
        tables[f"{name}_{label}"] = curve_table(c)
        for f in c.folds:
            folds.add(label, f.intensity, f.i_in)
        summary[f"{label}_delta_ac"] = c.delta_ac
    tables[f"{name}_folds"] = folds
    return tables, summary


def fig4(base: SystemParams, panel: str) -> Result:
    delta_p = 7.2 if panel == "a" else 7.0
    tables, summary = _curves(base, delta_p, [("omega1_1", system_for(base, 1.0))], f"fig4{panel}")
    return Result(tables, summary)


def fig5(base: SystemParams, panel: str, policy=MapPolicy.ADIABATIC_UP) -> Result:
    if panel == "a":
        p, variant = system_for(base, 0.0)
        dps = detuning_grid(-10, 10)
    elif panel == "b":
        p, variant = system_for(base, 1.0)
        dps = detuning_grid(-10, 10)
    else:
        p, variant = system_for(base, 1.0)
        dps = np.round(np.arange(-0.5, 0.5 + 1e-9, 0.002), 12)
    iin = np.linspace(0.05, p.linear_bound, 64)
    m = density_map(p, dps, iin, policy, variant)
    t = Table(["delta_p_over_Gamma", "i_in", "i_out", "delta_ac_over_Gamma"])
    for j, dp in enumerate(m.delta_p):
        for k, x in enumerate(m.i_in):
            t.add(dp, x, m.values[k, j], m.delta_ac[j])
    return Result({f"fig5{panel}": t}, {"policy": m.policy.value, "failures": len(m.failures)})


def fig6(base: SystemParams, panel: str) -> Result:
    delta_p = 7.0 if panel == "a" else 6.0
    cases = [(f"omega1_{_tag(o)}", system_for(base, o)) for o in (0.0, 1.5, 2.5)]
    tables, summary = _curves(base, delta_p, cases, f"fig6{panel}")
    if panel == "b":
        p, variant = system_for(base, 0.0)
        window = bistable_window(tuned(p, delta_p, CPA_TUNING, variant), delta_p, variant)
        lo, hi = (0.5 * window[0], 1.5 * window[1]) if window else (0.0, 100.0)
        try:
            h = hysteresis_trace(p, delta_p, lo, hi, 600, variant)
            tables["fig6b_hysteresis"] = Table.from_columns(i_in=h.i_grid, i_out_up=h.up_i_out,
                                                           i_out_down=h.down_i_out)
            summary.update(jump_up=h.jump_up, jump_down=h.jump_down)
        except NotBistable:
            summary["hysteresis"] = "not bistable"
    return Result(tables, summary)


def fig7(base: SystemParams, panel: str) -> Result:
    delta_p = 7.0 if panel == "a" else 6.0
    cases = [(f"r_{_tag(r)}", system_for(base, 1.0, r)) for r in (0.0, 0.01, 0.05, 0.1)]
    tables, summary = _curves(base, delta_p, cases, f"fig7{panel}")
    return Result(tables, summary)


PRESETS = {
    "fig2a": lambda b: fig2(b, "a"), "fig2b": lambda b: fig2(b, "b"),
    "fig2c": lambda b: fig2(b, "c"), "fig2d": lambda b: fig2(b, "d"),
    "fig3a": lambda b: fig3(b, "a"), "fig3b": lambda b: fig3(b, "b"),
    "fig4a": lambda b: fig4(b, "a"), "fig4b": lambda b: fig4(b, "b"),
    "fig5a": lambda b: fig5(b, "a"), "fig5b": lambda b: fig5(b, "b"), "fig5c": lambda b: fig5(b, "c"),
    "fig6a": lambda b: fig6(b, "a"), "fig6b": lambda b: fig6(b, "b"),
    "fig7a": lambda b: fig7(b, "a"), "fig7b": lambda b: fig7(b, "b"),
}


def run_preset(name: str, base: SystemParams = None) -> Result:
    try:
        builder = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return builder(base if base is not None else SystemParams())
