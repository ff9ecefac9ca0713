"""Command line for CPA and bistability sweeps of a Lambda-atom cavity.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import cpa, dynamics, figures, sweep
from .errors import CpaError, FormulaDomain, GridError, VariantMismatch
from .model import susceptibility
from .output import Result, Table, format_complex, write_result
from .params import ModelVariant, ProbeDrive, SystemParams, default_variant


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


DEFAULTS = {
    "variant": None,
    "delta_p": 7.0,
    "omega1": None,  # 1, or 0 for the two-level variants
    "r": 0.0,
    "g": 0.02,
    "gn": 10.0,
    "kappa": 1.0,
    "kappa_tau": 0.01,
    "gamma12": 0.001,
    "gamma31": None,
    "gamma32": None,
    "delta1": 0.0,
    "delta_ac": "cpa",
    "phi": 0.0,
    "intensity": 0.0,
    "i_in": 10.0,
    "iin_min": 0.0,
    "iin_max": 100.0,
    "iin_steps": 200,
    "dp_min": -12.0,
    "dp_max": 12.0,
    "dp_steps": 4801,
    "policy": "AdiabaticUp",
    "swept": "omega1",
    "bracket_lo": 1.5,
    "bracket_hi": 3.0,
    "axis1": "delta_p:-12:12:481",
    "axis2": "r_pump:0:1:101",
    "pump_model": "rate",
    "t_max": 5000.0,
    "record_dt": 0.0,
    "out": None,
    "format": "csv",
}

def _delta_ac(text):
    if str(text).strip().lower() == "cpa":
        return "cpa"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'cpa', got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    S = argparse.SUPPRESS
    g = common.add_argument_group("system")
    g.add_argument("--variant", choices=[v.value for v in ModelVariant], default=S,
                   help="model variant (default: reduced, or two-level when --omega1 0)")
    g.add_argument("--delta-p", type=float, default=S, help="probe detuning / Gamma (default 7)")
    g.add_argument("--omega1", type=float, default=S,
                   help="coupling Rabi frequency / Gamma (default 1; 0 for two-level variants)")
    g.add_argument("--r", type=float, default=S, help="incoherent pump rate / Gamma (default 0)")
    g.add_argument("--g", type=float, default=S, help="single-atom coupling / Gamma (default 0.02)")
    g.add_argument("--gn", type=float, default=S, help="collective coupling g*sqrt(N) / Gamma (default 10)")
    g.add_argument("--kappa", type=float, default=S, help="mirror decay rate / Gamma (default 1)")
    g.add_argument("--kappa-tau", type=float, default=S, help="kappa * round-trip time (default 0.01)")
    g.add_argument("--gamma12", type=float, default=S, help="ground-state decoherence (default 0.001)")
    g.add_argument("--gamma31", type=float, default=S)
    g.add_argument("--gamma32", type=float, default=S)
    g.add_argument("--delta1", type=float, default=S, help="coupling-laser detuning (default 0)")
    g.add_argument("--delta-ac", type=_delta_ac, default=S,
                   help="cavity detuning, or 'cpa' to compensate the dispersion at CPA (default)")
    g.add_argument("--phi", type=float, default=S, help="relative phase of the left beam (default 0)")
    g.add_argument("--config", type=Path, help="JSON file with any of these options")
    o = common.add_argument_group("output")
    o.add_argument("--out", default=S, help="output file or directory (default stdout)")
    o.add_argument("--format", choices=("csv", "json"), default=S)

    grid = _Parser(add_help=False)
    grid.add_argument("--iin-min", type=float, default=S)
    grid.add_argument("--iin-max", type=float, default=S)
    grid.add_argument("--iin-steps", type=int, default=S)
    dgrid = _Parser(add_help=False)
    dgrid.add_argument("--dp-min", type=float, default=S)
    dgrid.add_argument("--dp-max", type=float, default=S)
    dgrid.add_argument("--dp-steps", type=int, default=S)

    parser = _Parser(prog="lambdacpa", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("chi", parents=[common], help="susceptibility at one (delta_p, I)")
    s.add_argument("--intensity", type=float, default=S, help="intracavity intensity |alpha|^2")
    sub.add_parser("curve", parents=[common, grid], help="output vs input curve with stability")
    sub.add_parser("hysteresis", parents=[common, grid], help="up/down input sweep")
    sub.add_parser("cpa-point", parents=[common], help="closed-form CPA intensity and its Taylor form")
    sub.add_parser("cpa-threshold", parents=[common, dgrid], help="CPA band edges in delta_p")
    s = sub.add_parser("cpa-frequencies", parents=[common, dgrid], help="detunings with CPA at --i-in")
    s.add_argument("--i-in", type=float, default=S)
    sub.add_parser("regime", parents=[common], help="linear / normally nonlinear / bistable / no CPA")
    s = sub.add_parser("onset", parents=[common], help="bistability onset along omega1 or r")
    s.add_argument("--swept", choices=("omega1", "r_pump"), default=S)
    s.add_argument("--bracket-lo", type=float, default=S)
    s.add_argument("--bracket-hi", type=float, default=S)
    s = sub.add_parser("map", parents=[common, grid, dgrid], help="output density over (delta_p, i_in)")
    s.add_argument("--policy", default=S, help="AdiabaticUp, AdiabaticDown, MinOutput or MaxOutput")
    s = sub.add_parser("cpa-locus", parents=[common], help="CPA input intensity over two parameters")
    s.add_argument("--axis1", default=S, help="NAME:MIN:MAX:STEPS with NAME in delta_p, r_pump, omega1")
    s.add_argument("--axis2", default=S)
    s = sub.add_parser("oracle", parents=[common], help="time-domain check of steady states")
    s.add_argument("--i-in", type=float, default=S)
    s.add_argument("--pump-model", choices=dynamics.PUMP_MODELS, default=S)
    s.add_argument("--t-max", type=float, default=S)
    s.add_argument("--record-dt", type=float, default=S, help="dump a trajectory from the ground state instead")
    s = sub.add_parser("figure", parents=[common], help="data for a published figure")
    s.add_argument("preset", choices=sorted(figures.PRESETS))
    return parser


# ------------------------------------------------------------ config

def resolve_options(ns: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if getattr(ns, "config", None) is not None:
        try:
            doc = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("config must be a JSON object")
        flat = dict(doc)
        nested = flat.pop("system", {})
        if not isinstance(nested, dict):
            raise UsageError("config 'system' must be an object")
        flat.update(nested)
        flat = {k.replace("-", "_"): v for k, v in flat.items()}
        unknown = sorted(set(flat) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        opts.update(flat)
    for key, value in vars(ns).items():
        if key in DEFAULTS:
            opts[key] = value
    if isinstance(opts["delta_ac"], str):
        opts["delta_ac"] = _delta_ac(opts["delta_ac"])
    return opts


def system_from(opts: dict):
    """(SystemParams, variant) honoring the two-level shortcut for omega1 = 0."""
    variant = ModelVariant.parse(opts["variant"]) if opts["variant"] else None
    g31, g32 = opts["gamma31"], opts["gamma32"]
    if g31 is None and g32 is None:
        g31 = g32 = 0.5
    elif g31 is None:
        g31 = 1.0 - g32
    elif g32 is None:
        g32 = 1.0 - g31
    kappa = opts["kappa"]
    if not kappa > 0 or not opts["g"] > 0:
        raise UsageError("--kappa and --g must be positive")
    delta_ac = opts["delta_ac"]
    omega1 = opts["omega1"]
    if omega1 is None:
        omega1 = 0.0 if variant is not None and variant.is_two_level else 1.0
    params = SystemParams(
        gamma31=g31, gamma32=g32, gamma12=opts["gamma12"], kappa_l=kappa, kappa_r=kappa,
        tau=opts["kappa_tau"] / kappa, g=opts["g"], n_atoms=(opts["gn"] / opts["g"]) ** 2,
        omega1=omega1, r_pump=opts["r"], delta1=opts["delta1"],
        delta_ac=0.0 if delta_ac == "cpa" else delta_ac,
    )
    if variant is None and params.omega1 == 0:
        variant = ModelVariant.TWO_LEVEL
    if variant is not None and variant.is_two_level:
        if params.omega1 != 0:
            raise VariantMismatch(f"{variant.value} needs --omega1 0 (got {params.omega1})")
        params = params.two_level()
    return params, (variant if variant is not None else default_variant(params))


def _axis(text: str):
    try:
        name, lo, hi, steps = text.split(":")
        return name, np.linspace(float(lo), float(hi), int(steps))
    except ValueError:
        raise UsageError(f"axis must be NAME:MIN:MAX:STEPS, got {text!r}") from None


# ------------------------------------------------------------ commands

def cmd_chi(p, variant, o):
    chi = susceptibility(p, o["delta_p"], o["intensity"], variant)
    t = Table(["delta_p_over_Gamma", "intensity", "variant", "chi_re", "chi_im", "chi"])
    t.add(o["delta_p"], o["intensity"], variant.value, chi.real, chi.imag, format_complex(chi))
    return Result({"chi": t}, {"chi": chi})


def cmd_curve(p, variant, o):
    grid = sweep.intensity_grid(o["iin_min"], o["iin_max"], o["iin_steps"], log=False)
    c = sweep.input_output_curve(p, o["delta_p"], grid, variant, o["delta_ac"], phi=o["phi"])
    t = Table.from_columns(i_in=c.i_in, i_out=c.i_out, i_out_l=c.i_out_l, i_out_r=c.i_out_r,
                           intensity=c.intensity, stable=c.stable)
    return Result({"curve": t}, {"delta_ac": c.delta_ac, "folds": [f.i_in for f in c.folds]})


def cmd_hysteresis(p, variant, o):
    h = sweep.hysteresis_trace(p, o["delta_p"], o["iin_min"], o["iin_max"], o["iin_steps"], variant,
                               o["delta_ac"])
    t = Table.from_columns(i_in=h.i_grid, i_out_up=h.up_i_out, intensity_up=h.up_intensity,
                           i_out_down=h.down_i_out, intensity_down=h.down_intensity)
    return Result({"hysteresis": t}, {"jump_up": h.jump_up, "jump_down": h.jump_down, "width": h.width})


def cmd_cpa_point(p, variant, o):
    exact = cpa.cpa_intracavity_intensity(p, o["delta_p"])
    taylor = cpa.cpa_intensity_taylor(p, o["delta_p"])
    t = Table(["delta_p_over_Gamma", "form", "intensity_intracavity", "i_in", "feasible"])
    for form, pt in (("closed", exact), ("taylor", taylor)):
        t.add(pt.delta_p, form, pt.intensity_intracavity, pt.intensity_input, pt.feasible)
    return Result({"cpa_point": t})


def _scan(o):
    if o["dp_steps"] < 2 or not o["dp_max"] > o["dp_min"]:
        raise GridError("need --dp-max > --dp-min and --dp-steps >= 2")
    return (o["dp_min"], o["dp_max"]), o["dp_steps"]


def cmd_cpa_threshold(p, variant, o):
    window, samples = _scan(o)
    edges = cpa.cpa_frequency_thresholds(p, window, samples)
    t = Table(["index", "delta_p_over_Gamma"])
    for k, x in enumerate(edges):
        t.add(k, x)
    return Result({"cpa_threshold": t}, {"count": len(edges)})


def cmd_cpa_frequencies(p, variant, o):
    window, samples = _scan(o)
    dps = cpa.cpa_frequencies_at_intensity(p, o["i_in"], window, samples)
    t = Table(["index", "i_in", "delta_p_over_Gamma"])
    for k, x in enumerate(dps):
        t.add(k, o["i_in"], x)
    return Result({"cpa_frequencies": t}, {"count": len(dps)})


def cmd_regime(p, variant, o):
    rep = cpa.regime_classify(p, o["delta_p"], variant, o["delta_ac"])
    lo, hi = rep.window if rep.window else (None, None)
    t = Table(["delta_p_over_Gamma", "regime", "delta_ac_over_Gamma", "cpa_intensity", "cpa_i_in",
               "linear_bound", "window_lo", "window_hi", "cpa_on_stable_branch", "cpa_in_window", "flags"])
    t.add(rep.delta_p, rep.label.value, rep.delta_ac, rep.cpa_intensity, rep.cpa_i_in, rep.linear_bound,
          lo, hi, rep.cpa_on_stable_branch, rep.cpa_in_window, ";".join(rep.flags))
    return Result({"regime": t})


def cmd_onset(p, variant, o):
    explicit = o["variant"] is not None
    res = cpa.bistability_onset(p, o["delta_p"], o["swept"], (o["bracket_lo"], o["bracket_hi"]),
                                variant if explicit else None, o["delta_ac"])
    t = Table(["delta_p_over_Gamma", "parameter", "onset", "bracket_lo", "bracket_hi", "below_bracket"])
    t.add(o["delta_p"], res.parameter, res.value, res.bracket[0], res.bracket[1], res.below_bracket)
    return Result({"onset": t})


def cmd_map(p, variant, o):
    dps = np.linspace(o["dp_min"], o["dp_max"], o["dp_steps"])
    iin = sweep.intensity_grid(o["iin_min"], o["iin_max"], o["iin_steps"], log=False)
    m = sweep.density_map(p, dps, iin, o["policy"], variant, o["delta_ac"], o["phi"])
    t = Table(["delta_p_over_Gamma", "i_in", "i_out", "intensity"])
    for j, dp in enumerate(m.delta_p):
        for k, x in enumerate(m.i_in):
            t.add(dp, x, m.values[k, j], m.intensity[k, j])
    return Result({"map": t}, {"policy": m.policy.value, "failures": len(m.failures)})


def cmd_cpa_locus(p, variant, o):
    a1, a2 = _axis(o["axis1"]), _axis(o["axis2"])
    m = sweep.cpa_locus_map(p, a1, a2, o["delta_p"])
    t = Table([f"{m.axis1}_over_Gamma", f"{m.axis2}_over_Gamma", "intensity_intracavity", "i_in_cpa"])
    for i, a in enumerate(m.grid1):
        for j, b in enumerate(m.grid2):
            t.add(a, b, m.intracavity[i, j], m.i_in[i, j])
    return Result({"cpa_locus": t})


def cmd_oracle(p, variant, o):
    p = cpa.tuned(p, o["delta_p"], o["delta_ac"], variant)
    spec = dynamics.LiouvillianSpec(p, o["pump_model"])
    drive = ProbeDrive.from_intensity(o["delta_p"], o["i_in"], o["phi"])
    if o["record_dt"] > 0:
        run = dynamics.integrate_to_steady_state(spec, drive, t_max=o["t_max"], record_dt=o["record_dt"])
        y = run.trajectory
        t = Table.from_columns(t=run.times, alpha_re=y[:, 9].real, alpha_im=y[:, 9].imag,
                               intensity=np.abs(y[:, 9]) ** 2, rho11=y[:, 0].real, rho22=y[:, 4].real,
                               rho33=y[:, 8].real)
        return Result({"trajectory": t}, {"converged": run.converged})
    rep = dynamics.oracle_compare(spec, drive, variant=variant, t_max=o["t_max"])
    t = Table(["intensity", "stable", "outcome", "final_plus", "final_minus", "converged", "confirmed"])
    for e in rep.entries:
        t.add(e.intensity, e.stable, e.outcome, e.final_intensities[0], e.final_intensities[1], e.converged,
              e.confirmed)
    return Result({"oracle": t}, {"summary": rep.summary()})


HANDLERS = {
    "chi": cmd_chi, "curve": cmd_curve, "hysteresis": cmd_hysteresis, "cpa-point": cmd_cpa_point,
    "cpa-threshold": cmd_cpa_threshold, "cpa-frequencies": cmd_cpa_frequencies, "regime": cmd_regime,
    "onset": cmd_onset, "map": cmd_map, "cpa-locus": cmd_cpa_locus, "oracle": cmd_oracle,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        ns = build_parser().parse_args(argv)
        opts = resolve_options(ns)
        if ns.command == "figure":
            base, _ = system_from({**opts, "omega1": 1.0, "variant": None})
            result = figures.run_preset(ns.preset, base)
            out = opts["out"] if opts["out"] is not None else ns.preset
            for path in write_result(result, opts["format"], out, stdout, ns.preset):
                print(path, file=stderr)
            return 0
        params, variant = system_from(opts)
        result = HANDLERS[ns.command](params, variant, opts)
        write_result(result, opts["format"], opts["out"], stdout, ns.command.replace("-", "_"))
        return 0
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, GridError, VariantMismatch, FormulaDomain) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except CpaError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
