"""Susceptibility, steady-state polynomial and output fields."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambdacpa.dynamics import LiouvillianSpec, chi_from_master_equation
from lambdacpa.errors import AsymmetricCavity, VariantMismatch
from lambdacpa.model import (
    chi_rational,
    input_intensity,
    output_fields,
    solve_steady_states,
    steady_state_polynomial,
    susceptibility,
    with_stability,
)
from lambdacpa.params import ModelVariant, ProbeDrive, SystemParams

V = ModelVariant

detunings = st.floats(-10, 10, allow_nan=False)
intensities = st.floats(0, 2000, allow_nan=False)


def test_defaults():
    p = SystemParams()
    assert p.g2n == pytest.approx(100.0)
    assert p.kappa_tau == pytest.approx(0.01)
    assert p.linear_bound == 6.25


def test_gamma_unit_enforced():
    with pytest.raises(ValueError):
        SystemParams(gamma31=0.5, gamma32=0.2)


def test_variant_checks(base):
    with pytest.raises(VariantMismatch):
        susceptibility(base, 1.0, 0.0, V.TWO_LEVEL)
    with pytest.raises(AsymmetricCavity):
        solve_steady_states(base.replace(kappa_l=2.0), ProbeDrive.from_intensity(1.0, 1.0))


def test_variant_parse_aliases():
    assert V.parse("ReducedThreeLevel") is V.REDUCED
    assert V.parse("two_level") is V.TWO_LEVEL
    with pytest.raises(ValueError):
        V.parse("four-level")


# the fixed-field master equation is an independent route to chi
@pytest.mark.parametrize("gamma12,r", [(0.0, 0.0), (0.001, 0.0), (0.05, 0.1)])
@pytest.mark.parametrize("dp,intensity", [(3.0, 0.0), (3.0, 50.0), (0.5, 200.0), (-6.0, 1000.0), (7.0, 5.0)])
def test_full_chi_matches_master_equation(dp, intensity, gamma12, r):
    p = SystemParams(gamma12=gamma12, r_pump=r)
    want = chi_from_master_equation(LiouvillianSpec(p), dp, intensity)
    got = susceptibility(p, dp, intensity, V.FULL)
    assert abs(got - want) <= 1e-8 * abs(want)


@pytest.mark.parametrize("dp,intensity", [(2.0, 0.0), (6.0, 300.0), (-0.3, 40.0)])
def test_two_level_chi_matches_master_equation(dp, intensity):
    p = SystemParams(omega1=0.0).two_level()
    want = chi_from_master_equation(LiouvillianSpec(p), dp, intensity)
    got = susceptibility(p, dp, intensity, V.TWO_LEVEL)
    assert abs(got - want) <= 1e-8 * abs(want)


def test_reduced_is_linear_limit_of_full():
    # reduced drops gamma12 and the terms that vanish with the field
    p = SystemParams(gamma12=0.0)
    for dp in (0.3, 2.0, 7.0):
        assert susceptibility(p, dp, 0.0, V.REDUCED) == pytest.approx(susceptibility(p, dp, 0.0, V.FULL), rel=1e-12)
    assert abs(susceptibility(p, 2.0, 400.0, V.REDUCED) - susceptibility(p, 2.0, 400.0, V.FULL)) > 1e-3


def test_eit_zero():
    p = SystemParams(gamma12=0.0)
    assert susceptibility(p, 0.0, 37.0, V.REDUCED) == 0
    assert abs(susceptibility(p.replace(gamma12=0.001), 0.0, 0.0, V.FULL)) > 0


def test_bare_equals_pumped_at_r0():
    p = SystemParams(omega1=0.0).two_level()
    for dp in (-4.0, 0.0, 6.5):
        for i in (0.0, 10.0, 900.0):
            assert susceptibility(p, dp, i, V.TWO_LEVEL) == pytest.approx(susceptibility(p, dp, i, V.TWO_LEVEL_BARE))


@settings(max_examples=60, deadline=None)
@given(dp=detunings, i=intensities, r=st.floats(0, 0.5))
def test_rational_form_matches_direct(dp, i, r):
    p = SystemParams(r_pump=r)
    rat = chi_rational(p, dp, V.REDUCED)
    assert rat(i) == pytest.approx(susceptibility(p, dp, i, V.REDUCED), rel=1e-10, abs=1e-12)
    assert np.all(np.isreal(rat.q))


@settings(max_examples=60, deadline=None)
@given(dp=detunings, i_in=st.floats(0.01, 500), variant=st.sampled_from([V.FULL, V.REDUCED]))
def test_roots_are_self_consistent(dp, i_in, variant):
    p = SystemParams(delta_ac=dp)
    drive = ProbeDrive.from_intensity(dp, i_in)
    states = solve_steady_states(p, drive, variant)
    assert len(states) >= 1
    coeffs = steady_state_polynomial(p, drive, variant)
    assert np.all(np.isreal(coeffs))
    for s in states:
        assert s.intensity >= 0
        assert abs(s.alpha) ** 2 == pytest.approx(s.intensity, rel=1e-7, abs=1e-9)
        # inverting the curve returns the drive
        assert input_intensity(p, dp, s.intensity, variant) == pytest.approx(i_in, rel=1e-6)


def test_degree():
    p = SystemParams()
    d = ProbeDrive.from_intensity(1.0, 1.0)
    assert len(np.trim_zeros(steady_state_polynomial(p, d, V.REDUCED), "b")) - 1 == 3
    assert len(np.trim_zeros(steady_state_polynomial(p, d, V.FULL), "b")) - 1 == 7


@settings(max_examples=40, deadline=None)
@given(dp=detunings, dac=detunings, i_in=st.floats(0.01, 100))
def test_zero_chi_gives_unit_ratio(dp, dac, i_in):
    p = SystemParams(gamma12=0.0, delta_ac=dac)
    drive = ProbeDrive.from_intensity(0.0, i_in)
    (s,) = solve_steady_states(p, drive, V.REDUCED).roots
    assert output_fields(p, drive, s.alpha).ratio == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(dp=st.floats(0.1, 10), i=st.floats(0, 500))
def test_detuning_symmetry(dp, i):
    # chi(-dp) = conj-reflected chi(dp) when delta1 = 0
    p = SystemParams()
    a, b = susceptibility(p, dp, i, V.REDUCED), susceptibility(p, -dp, i, V.REDUCED)
    assert a.real == pytest.approx(b.real, rel=1e-10, abs=1e-12)
    assert a.imag == pytest.approx(-b.imag, rel=1e-10, abs=1e-12)


def test_antisymmetric_drive_gives_empty_cavity(base):
    d = ProbeDrive.from_intensity(2.0, 4.0, phi=math.pi)
    (s,) = solve_steady_states(base, d).roots
    assert s.intensity == 0.0
    assert s.i_out_l == pytest.approx(4.0) and s.i_out_r == pytest.approx(4.0)


def test_bistable_labels(two_level):
    # [DERIVED] three roots at the middle of the two-level window (delta_ac = -6)
    p = two_level.replace(delta_ac=-6.0)
    states = with_stability(p, solve_steady_states(p, ProbeDrive.from_intensity(6.0, 170.0)))
    assert len(states) == 3
    assert [s.stable for s in states] == [True, False, True]


def test_drive_validation():
    with pytest.raises(ValueError):
        ProbeDrive.from_intensity(0.0, -1.0)
    assert ProbeDrive(0.0, 1.0, phi=-math.pi / 2).phi == pytest.approx(1.5 * math.pi)


def test_reduced_without_coupling_is_transparent():
    # omega1 = 0 with gamma32 > 0 optically pumps every atom into |2>
    p = SystemParams(omega1=0.0, delta_ac=-6.0)
    assert chi_rational(p, 6.0, V.REDUCED).vanishes
    assert len(solve_steady_states(p, ProbeDrive.from_intensity(6.0, 170.0), V.REDUCED)) == 1
    # the bistable omega1 = 0 case is the two-level reduction
    t = SystemParams(omega1=0.0).two_level().replace(delta_ac=-6.0)
    assert len(solve_steady_states(t, ProbeDrive.from_intensity(6.0, 170.0))) == 3


def test_omega_2p5_bistable_three_roots():
    from lambdacpa.cpa import bistable_window, tuned

    p = tuned(SystemParams(omega1=2.5), 7.0)
    lo, hi = bistable_window(p, 7.0)
    assert len(solve_steady_states(p, ProbeDrive.from_intensity(7.0, 0.5 * (lo + hi)))) == 3
