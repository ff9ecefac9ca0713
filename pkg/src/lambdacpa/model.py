"""Steady-state model of the driven two-sided cavity.

The intracavity field obeys the implicit relation

    alpha = S / (kappa - i (delta_p - delta_ac) - chi(|alpha|^2))

with S the summed input drive. Every variant's susceptibility is a rational
function chi(I) = P(I) / Q(I) of the intracavity intensity I = |alpha|^2, so
the steady states are the non-negative real roots of

    I |(kappa - i (delta_p - delta_ac)) Q(I) - P(I)|^2 - |S|^2 Q(I)^2,

a real polynomial of degree 3 (reduced and two-level variants) or 7 (full).

Sign convention: chi is always the term *subtracted* in the denominator.
For the bare two-level model this makes chi = -2 g^2 N (Gamma + 2i dp) / L,
the negative of the term printed with a plus sign for that model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import kernels
from .errors import RootFindingFailure
from .params import ModelVariant, ProbeDrive, SystemParams, check_variant, default_variant

IMAG_TOL = 1e-9
NEG_TOL = 1e-12
DEDUP_TOL = 1e-9


@dataclass(frozen=True)
class CoeffSet:
    a: complex
    b: complex
    c: float
    d: float
    x: complex
    y: float
    s_g1: complex
    s_g2: complex
    s_g3: float


def build_coefficients(params: SystemParams, delta_p: float) -> CoeffSet:
    """Auxiliary coefficients of the three-level steady state at one detuning."""
    G, G31, G32 = params.gamma, params.gamma31, params.gamma32
    r, om2, dp = params.r_pump, params.omega1 ** 2, delta_p
    dp2 = dp * dp
    return CoeffSet(
        a=G * r + 2j * dp * (G + r),
        b=G32 * r - 2j * dp * (r - G31),
        c=G * G32 * r + 2 * dp2 * (2 * G + r),
        d=G * G32 * r + 4 * om2 * (G31 + 2 * r),
        x=G * dp + 2j * (dp2 - om2),
        y=G * G * G32 * dp2 + 4 * om2 * om2 * (G + G31 + r),
        s_g1=(r - G31) * (2 * dp - 1j * G),
        s_g2=G32 * r * (2 * dp - 1j * G),
        s_g3=G * G * (G * G32 * r + 2 * om2 * (r + 2 * G)) + 2 * G * (G32 * r * dp2 + 12 * om2 * om2),
    )


# ----------------------------------------------------------------- susceptibility

@dataclass(frozen=True)
class RationalChi:
    """chi(I) = P(I) / Q(I), coefficients in ascending powers of I."""

    p: np.ndarray  # complex
    q: np.ndarray  # real

    def __call__(self, intensity):
        return npoly.polyval(intensity, self.p) / npoly.polyval(intensity, self.q)

    @property
    def vanishes(self) -> bool:
        return not np.any(self.p)


def _full_rational(params: SystemParams, dp: float) -> RationalChi:
    k = build_coefficients(params, dp)
    G, G32, G31 = params.gamma, params.gamma32, params.gamma31
    g2, g2n, om2, r, g12 = params.g ** 2, params.g2n, params.omega1 ** 2, params.r_pump, params.gamma12
    pref = 4j * g2n * om2
    p0 = pref * (2 * g12 * g12 * G * k.s_g1 + g12 * G * (k.s_g2 - 4j * om2 * (r - G31)) + G * k.b * k.x)
    p1 = pref * 2 * g2 * (2 * g12 * k.s_g1 - 1j * k.a * G32)
    x2 = abs(k.x) ** 2
    q0 = G * k.d * (g12 * g12 * (G * G + 4 * dp * dp) + 4 * g12 * G * om2 + x2)
    q1 = 4 * g2 * (g12 * g12 * G * G * (G * G32 + 12 * om2) + g12 * (k.s_g3 + 2 * k.d * dp * dp)
                   + G * (k.y + 2 * k.c * om2))
    # |S_g2|^2 / (gamma32 r) == gamma32 r (4 dp^2 + Gamma^2): removable at r = 0 or gamma32 = 0
    s_g2_ratio = G32 * r * (4 * dp * dp + G * G)
    q2 = 16 * g2 * g2 * g12 * G * (G * G32 + 6 * om2) + 4 * g2 * g2 * (s_g2_ratio + 4 * G * om2 * (G + G32 - r))
    q3 = 16 * g2 ** 3 * G * G32
    return RationalChi(np.array([p0, p1], dtype=complex), np.array([q0, q1, q2, q3], dtype=float))


def _reduced_rational(params: SystemParams, dp: float) -> RationalChi:
    k = build_coefficients(params, dp)
    G, G31, G32 = params.gamma, params.gamma31, params.gamma32
    g2, g2n, om2, r = params.g ** 2, params.g2n, params.omega1 ** 2, params.r_pump
    pref = 4 * g2n * om2
    p = np.array([pref * 1j * G * k.b * k.x, pref * 2 * k.a * G32 * g2], dtype=complex)
    q = np.array([
        G * k.d * abs(k.x) ** 2,
        G * 4 * g2 * (G * G * G32 * dp * dp + 2 * k.c * om2 + 4 * om2 * om2 * (G + G31 + r)),
    ])
    return RationalChi(p, q)


def _two_level_rational(params: SystemParams, dp: float) -> RationalChi:
    G, r, g2 = params.gamma, params.r_pump, params.g ** 2
    lin = G * G + 4 * dp * dp
    p = np.array([2 * params.g2n * (r - G) * (G + 2j * dp), 0.0], dtype=complex)
    q = np.array([(G + 2 * r) * lin, 4 * g2 * (2 * G + r)])
    return RationalChi(p, q)


def _two_level_bare_rational(params: SystemParams, dp: float) -> RationalChi:
    G = params.gamma
    p = np.array([-2 * params.g2n * (G + 2j * dp), 0.0], dtype=complex)
    q = np.array([G * G + 4 * dp * dp, 8 * params.g ** 2])
    return RationalChi(p, q)


_RATIONAL = {
    ModelVariant.FULL: _full_rational,
    ModelVariant.REDUCED: _reduced_rational,
    ModelVariant.TWO_LEVEL: _two_level_rational,
    ModelVariant.TWO_LEVEL_BARE: _two_level_bare_rational,
}


def chi_rational(params: SystemParams, delta_p: float, variant=None) -> RationalChi:
    """The susceptibility as a ratio of polynomials in I, in lowest form.

    A numerator that vanishes identically (e.g. at the two-photon resonance
    without pumping, or omega1 = 0 in a three-level variant) is returned as
    0 / 1, which removes the 0/0 at I = 0.
    """
    variant = check_variant(params, variant if variant is not None else default_variant(params))
    rat = _RATIONAL[variant](params, float(delta_p))
    if rat.vanishes:
        return RationalChi(np.zeros(1, dtype=complex), np.ones(1))
    p = npoly.polytrim(rat.p)
    q = npoly.polytrim(rat.q)
    return RationalChi(np.asarray(p, dtype=complex), np.asarray(q, dtype=float))


def susceptibility(params: SystemParams, delta_p: float, intensity, variant=None):
    """chi(I); the steady-state denominator is kappa - i(delta_p - delta_ac) - chi(I)."""
    intensity = np.asarray(intensity, dtype=float)
    if np.any(intensity < 0):
        raise ValueError("intensity must be >= 0")
    value = chi_rational(params, delta_p, variant)(intensity)
    return complex(value) if value.ndim == 0 else value


def cavity_factor(params: SystemParams, delta_p: float) -> complex:
    return params.kappa - 1j * (delta_p - params.delta_ac)


def denominator(params: SystemParams, delta_p: float, intensity, variant=None):
    return cavity_factor(params, delta_p) - susceptibility(params, delta_p, intensity, variant)


# ----------------------------------------------------------------- polynomials

def _residual_poly(params: SystemParams, delta_p: float, rat: RationalChi) -> np.ndarray:
    """R(I) = (kappa - i(dp - dac)) Q(I) - P(I), complex, ascending."""
    return npoly.polysub(cavity_factor(params, delta_p) * rat.q.astype(complex), rat.p)


def _abs2_poly(c: np.ndarray) -> np.ndarray:
    """Real polynomial equal to |c(I)|^2 for real I."""
    return np.real(npoly.polymul(c, np.conj(c)))


def drive_factor(params: SystemParams, phi: float) -> float:
    """|S|^2 / I_in for beams of equal amplitude and relative phase phi."""
    s = (math.sqrt(params.kappa_l / params.tau) * complex(math.cos(phi), math.sin(phi))
         + math.sqrt(params.kappa_r / params.tau))
    return abs(s) ** 2


def steady_state_polynomial(params: SystemParams, drive: ProbeDrive, variant=None) -> np.ndarray:
    """Ascending real coefficients of I |R(I)|^2 - |S|^2 Q(I)^2."""
    params.require_symmetric()
    rat = chi_rational(params, drive.delta_p, variant)
    return _steady_poly(params, drive, rat)


def _steady_poly(params, drive, rat):
    n = npoly.polymulx(_abs2_poly(_residual_poly(params, drive.delta_p, rat)))
    s2 = abs(drive.source(params)) ** 2
    return npoly.polysub(n, s2 * npoly.polymul(rat.q, rat.q))


def response_numerator(params: SystemParams, delta_p: float, variant=None):
    """(N, Q) with N(I) = I |R(I)|^2, so that |S|^2 = N(I) / Q(I)^2 on the steady-state curve."""
    rat = chi_rational(params, delta_p, variant)
    return npoly.polymulx(_abs2_poly(_residual_poly(params, delta_p, rat))), rat.q


def fold_polynomial(params: SystemParams, delta_p: float, variant=None) -> np.ndarray:
    """Numerator of d(N/Q^2)/dI: its sign-changing positive roots are the folds."""
    n, q = response_numerator(params, delta_p, variant)
    return npoly.polysub(npoly.polymul(npoly.polyder(n), q), 2 * npoly.polymul(n, npoly.polyder(q)))


def input_intensity(params: SystemParams, delta_p: float, intensity, variant=None, phi: float = 0.0):
    """Per-beam input intensity that sustains intracavity intensity I (curve inversion)."""
    n, q = response_numerator(params, delta_p, variant)
    intensity = np.asarray(intensity, dtype=float)
    return npoly.polyval(intensity, n) / npoly.polyval(intensity, q) ** 2 / drive_factor(params, phi)


def input_intensity_slope(params: SystemParams, delta_p: float, intensity, variant=None, phi: float = 0.0):
    """d(i_in)/dI along the steady-state curve."""
    n, q = response_numerator(params, delta_p, variant)
    intensity = np.asarray(intensity, dtype=float)
    qv = npoly.polyval(intensity, q)
    num = (npoly.polyval(intensity, npoly.polyder(n)) * qv
           - 2 * npoly.polyval(intensity, n) * npoly.polyval(intensity, npoly.polyder(q)))
    return num / qv ** 3 / drive_factor(params, phi)


# ------------------------------------------------------------------ roots

def _scale_for(coeffs: np.ndarray) -> float:
    """Root-magnitude scale from the Fujiwara bound, used to balance coefficients."""
    d = len(coeffs) - 1
    lead = abs(coeffs[-1])
    best = 0.0
    for k in range(d):
        if coeffs[k] != 0:
            best = max(best, (abs(coeffs[k]) / lead) ** (1.0 / (d - k)))
    return best if best > 0 else 1.0


def real_nonnegative_roots(coeffs: np.ndarray, params=None) -> tuple[np.ndarray, np.ndarray]:
    """Non-negative real roots of a real polynomial (ascending coefficients).

    Returns ``(roots, merged)`` where ``merged`` flags roots formed by
    collapsing a near-double pair.
    """
    coeffs = np.asarray(npoly.polytrim(np.asarray(coeffs, dtype=float)), dtype=float)
    if len(coeffs) < 2:
        return np.empty(0), np.empty(0, dtype=bool)
    s = _scale_for(coeffs)
    scaled = coeffs * s ** np.arange(len(coeffs))
    scaled = scaled / np.max(np.abs(scaled))
    z = kernels.poly_roots_batch(scaled[None, :])[0]
    if not np.all(np.isfinite(z)):
        raise RootFindingFailure("companion eigenvalue solver returned non-finite roots",
                                 coefficients=coeffs, params=params)
    z = z * s
    re, im = z.real, z.imag
    keep = (np.abs(im) <= IMAG_TOL * np.maximum(1.0, np.abs(re))) & (re >= -NEG_TOL * max(1.0, s))
    vals = np.sort(np.clip(re[keep], 0.0, None))
    roots, merged = [], []
    for v in vals:
        if roots and abs(v - roots[-1]) < DEDUP_TOL * max(1.0, v):
            roots[-1] = 0.5 * (roots[-1] + v)
            merged[-1] = True
        else:
            roots.append(v)
            merged.append(False)
    return np.array(roots), np.array(merged, dtype=bool)


@dataclass(frozen=True)
class OutputFields:
    out_l: complex
    out_r: complex
    i_out_l: float
    i_out_r: float
    ratio: float

    @property
    def i_out(self) -> float:
        """Mean output intensity per side."""
        return 0.5 * (self.i_out_l + self.i_out_r)


def output_fields(params: SystemParams, drive: ProbeDrive, alpha: complex) -> OutputFields:
    """Outputs sqrt(kappa_side tau) alpha - alpha_in,side on both mirrors."""
    out_l = math.sqrt(params.kappa_l * params.tau) * alpha - drive.alpha_in_l
    out_r = math.sqrt(params.kappa_r * params.tau) * alpha - drive.alpha_in_r
    i_l, i_r = abs(out_l) ** 2, abs(out_r) ** 2
    total_in = abs(drive.alpha_in_l) ** 2 + abs(drive.alpha_in_r) ** 2
    ratio = (i_l + i_r) / total_in if total_in > 0 else float("nan")
    return OutputFields(out_l, out_r, i_l, i_r, ratio)


@dataclass(frozen=True)
class SteadyState:
    intensity: float
    alpha: complex
    out_l: complex
    out_r: complex
    stable: Optional[bool] = None
    fold_adjacent: bool = False

    @property
    def i_out_l(self) -> float:
        return abs(self.out_l) ** 2

    @property
    def i_out_r(self) -> float:
        return abs(self.out_r) ** 2

    @property
    def i_out(self) -> float:
        return 0.5 * (self.i_out_l + self.i_out_r)


@dataclass(frozen=True)
class SteadyStateSet:
    drive: ProbeDrive
    variant: ModelVariant
    roots: tuple = field(default_factory=tuple)

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __getitem__(self, i):
        return self.roots[i]

    @property
    def intensities(self) -> np.ndarray:
        return np.array([s.intensity for s in self.roots])

    def output_ratio(self, i: int) -> float:
        total_in = abs(self.drive.alpha_in_l) ** 2 + abs(self.drive.alpha_in_r) ** 2
        s = self.roots[i]
        return (s.i_out_l + s.i_out_r) / total_in if total_in > 0 else float("nan")

    def nearest(self, intensity: float) -> SteadyState:
        if not self.roots:
            raise ValueError("empty steady-state set")
        return min(self.roots, key=lambda s: abs(s.intensity - intensity))


def field_at(params: SystemParams, drive: ProbeDrive, intensity: float, rat: RationalChi) -> complex:
    """alpha = S Q(I) / R(I) with chi frozen at intensity I."""
    qv = npoly.polyval(intensity, rat.q)
    rv = npoly.polyval(intensity, _residual_poly(params, drive.delta_p, rat))
    return drive.source(params) * qv / rv


def solve_steady_states(params: SystemParams, drive: ProbeDrive, variant=None) -> SteadyStateSet:
    """All physical steady states at one drive point (stability left undetermined)."""
    params.require_symmetric()
    variant = check_variant(params, variant if variant is not None else default_variant(params))
    # antisymmetric drive: the summed source cancels up to rounding
    if abs(drive.source(params)) <= 1e-12 * drive.amp_in * math.sqrt(params.kappa / params.tau):
        out = output_fields(params, drive, 0j)
        return SteadyStateSet(drive, variant, (SteadyState(0.0, 0j, out.out_l, out.out_r),))
    rat = chi_rational(params, drive.delta_p, variant)
    coeffs = _steady_poly(params, drive, rat)
    roots, merged = real_nonnegative_roots(coeffs, params=params)
    states = []
    for intensity, fold in zip(roots, merged):
        alpha = field_at(params, drive, intensity, rat)
        out = output_fields(params, drive, alpha)
        states.append(SteadyState(float(intensity), complex(alpha), out.out_l, out.out_r,
                                  fold_adjacent=bool(fold)))
    return SteadyStateSet(drive, variant, tuple(states))


def with_stability(params: SystemParams, steady: SteadyStateSet) -> SteadyStateSet:
    """Mark each root stable where the input intensity grows with I."""
    if not steady.roots:
        return steady
    slope = input_intensity_slope(params, steady.drive.delta_p, steady.intensities,
                                  steady.variant, steady.drive.phi)
    roots = tuple(
        SteadyState(s.intensity, s.alpha, s.out_l, s.out_r,
                    stable=None if s.fold_adjacent else bool(k > 0), fold_adjacent=s.fold_adjacent)
        for s, k in zip(steady.roots, np.atleast_1d(slope))
    )
    return SteadyStateSet(steady.drive, steady.variant, roots)


def real_nonnegative_roots_batch(coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise :func:`real_nonnegative_roots` through one batched kernel call.

    Returns ``(roots, failed)``: ``roots`` is NaN-padded and sorted ascending
    per row, ``failed`` marks rows where the solver produced non-finite values.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    n, m = coeffs.shape
    nz = coeffs != 0
    deg = np.where(nz.any(axis=1), m - 1 - np.argmax(nz[:, ::-1], axis=1), 0)
    lead = np.abs(coeffs[np.arange(n), deg])
    lead = np.where(lead > 0, lead, 1.0)
    j = np.arange(m)
    power = deg[:, None] - j[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.where((power > 0) & nz, (np.abs(coeffs) / lead[:, None]) ** (1.0 / np.maximum(power, 1)), 0.0)
    scales = bound.max(axis=1)
    scales = np.where(scales > 0, scales, 1.0)
    scaled = coeffs * scales[:, None] ** j[None, :]
    scaled /= np.max(np.abs(scaled), axis=1, keepdims=True).clip(min=np.finfo(float).tiny)
    z = kernels.poly_roots_batch(scaled) * scales[:, None]
    valid = j[None, : m - 1] < deg[:, None]
    failed = np.any(valid & ~np.isfinite(z), axis=1)
    re, im = z.real, z.imag
    keep = (valid & (np.abs(im) <= IMAG_TOL * np.maximum(1.0, np.abs(re)))
            & (re >= -NEG_TOL * np.maximum(1.0, scales[:, None])))
    vals = np.sort(np.where(keep, np.clip(re, 0.0, None), np.nan), axis=1)
    if vals.shape[1] > 1:
        dup = np.diff(vals, axis=1) < DEDUP_TOL * np.maximum(1.0, vals[:, 1:])
        vals[:, 1:][dup] = np.nan
        vals = np.sort(vals, axis=1)
    vals[failed] = np.nan
    return vals, failed
