import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tests.conftest import CANONICAL, valid_params
from tumorhopf.equilibria import Equilibrium, LinearCoeffs, find_positive_stationary, linearize_positive
from tumorhopf.errors import BracketInvalid, HorizonTooShort, HypothesisViolated, InvalidParameter
from tumorhopf.hopf import (
    CHAR_RESIDUAL_TOL,
    OscillationKind,
    SimulationSettings,
    bound_fraction_tau1,
    characteristic,
    classify_trajectory,
    compatibility,
    critical_delay,
    critical_delay_by_simulation,
    crossing_frequencies,
    crossing_frequency,
    hopf_for_params,
    loses_positivity,
    positivity_loss_delay,
    single_delay_threshold,
)
from tumorhopf.integrator import ConstantHistory, DelayPair, Status, Trajectory
from tumorhopf.model import ModelParams

mp.mp.dps = 40


def coeffs_for(params):
    return linearize_positive(params, find_positive_stationary(params))


def mp_critical(b1, b2, tau1, w_guess):
    """Refine the crossing frequency and delay at 40 digits."""
    b1, b2, tau1 = mp.mpf(b1), mp.mpf(b2), mp.mpf(tau1)
    F = lambda w: (b1 * mp.cos(w * tau1)) ** 2 + (w - b1 * mp.sin(w * tau1)) ** 2 - b2**2  # noqa: E731
    w = mp.findroot(F, mp.mpf(w_guess))
    theta = mp.atan2((w - b1 * mp.sin(w * tau1)) / b2, -(b1 / b2) * mp.cos(w * tau1))
    if theta <= 0:
        theta += 2 * mp.pi
    return w, theta / w


@pytest.mark.parametrize("alpha", [0.2, 3.0, 100.0, None])
@pytest.mark.parametrize("frac", [0.025, 0.3, 0.7, 1.0])
def test_critical_delay_against_high_precision(alpha, frac):
    params = ModelParams(alpha=math.inf if alpha is None else alpha, **CANONICAL)
    c = coeffs_for(params)
    tau1 = bound_fraction_tau1(params, frac)
    res = critical_delay(c, tau1)
    w_ref, tau2_ref = mp_critical(c.b1, c.b2, tau1, res.omega_c)
    assert res.omega_c == pytest.approx(float(w_ref), rel=1e-11)
    assert res.tau2_star == pytest.approx(float(tau2_ref), rel=1e-11)
    assert res.residual <= CHAR_RESIDUAL_TOL


def test_canonical_hopf_point(canonical_params):
    tau1 = bound_fraction_tau1(canonical_params, 0.025)
    assert tau1 == pytest.approx(0.0393654, abs=1e-7)
    res = hopf_for_params(canonical_params, tau1)
    assert res.tau2_star == pytest.approx(0.559298, abs=1e-6)


@settings(max_examples=50, deadline=None)
@given(valid_params(), st.floats(0.01, 1.0))
def test_characteristic_root_on_imaginary_axis(params, frac):
    c = coeffs_for(params)
    tau1 = bound_fraction_tau1(params, frac)
    res = critical_delay(c, tau1)
    assert res.tau2_star > 0
    assert abs(characteristic(1j * res.omega_c, c.b1, c.b2, tau1, res.tau2_star)) <= CHAR_RESIDUAL_TOL
    assert abs(compatibility(res.omega_c, c.b1, c.b2, tau1)) <= 1e-10 * c.b2**2


@settings(max_examples=50, deadline=None)
@given(valid_params())
def test_vanishing_tau1_matches_closed_form(params):
    c = coeffs_for(params)
    res = critical_delay(c, 1e-9)
    assert res.tau2_star == pytest.approx(single_delay_threshold(c.b1, c.b2), rel=1e-6)


def test_single_delay_threshold_formula():
    # b1 = 0 gives the classical pi / (2 b2)
    assert single_delay_threshold(0.0, 2.0) == pytest.approx(math.pi / 4)


def test_critical_delay_is_minimal_over_all_crossings(canonical_params):
    c = coeffs_for(canonical_params)
    tau1 = 1.5  # close to the bound, where F has the richest structure
    res = critical_delay(c, tau1)
    for w in crossing_frequencies(c, tau1):
        cs = -(c.b1 / c.b2) * math.cos(w * tau1)
        sn = (w - c.b1 * math.sin(w * tau1)) / c.b2
        theta = math.atan2(sn, cs) % (2 * math.pi) or 2 * math.pi
        assert theta / w >= res.tau2_star - 1e-14


def test_branches_shift_by_period(canonical_params):
    c = coeffs_for(canonical_params)
    r0 = critical_delay(c, 0.3)
    r1 = critical_delay(c, 0.3, branch=1)
    assert r1.tau2_star == pytest.approx(r0.tau2_star + 2 * math.pi / r0.omega_c)


def test_stable_below_and_unstable_above_threshold(canonical_params):
    """Rightmost root of the quasi-polynomial by Newton continuation in tau2."""
    c = coeffs_for(canonical_params)
    tau1 = 0.4
    res = critical_delay(c, tau1)

    def root_near(tau2, lam):
        f = lambda z: z + c.b1 * mp.exp(-z * tau1) + c.b2 * mp.exp(-z * tau2)  # noqa: E731
        return complex(mp.findroot(f, mp.mpc(lam)))

    lam = 1j * res.omega_c
    below = root_near(res.tau2_star - 1e-3, lam)
    above = root_near(res.tau2_star + 1e-3, lam)
    assert below.real < 0 < above.real


def test_hypotheses_are_checked(canonical_params):
    c = coeffs_for(canonical_params)
    with pytest.raises(HypothesisViolated):
        critical_delay(c, 2.0)
    with pytest.raises(HypothesisViolated):
        critical_delay(c, 0.0)
    with pytest.raises(HypothesisViolated):
        critical_delay(LinearCoeffs(0.5, 2.0, Equilibrium.POSITIVE), 0.1)
    with pytest.raises(HypothesisViolated):
        hopf_for_params(ModelParams(gamma=1.0, mu=1.0, sigma_tilde=2.0, sigma_inf=1.5, alpha=1.0), 0.1)
    with pytest.raises(InvalidParameter):
        bound_fraction_tau1(canonical_params, 0.0)


def test_crossing_frequency_is_smallest(canonical_params):
    c = coeffs_for(canonical_params)
    ws = crossing_frequencies(c, 1.5)
    assert crossing_frequency(c, 1.5) == ws[0]
    assert all(0 < w <= abs(c.b1) + c.b2 for w in ws)


# ---------------------------------------------------------------- classifier


def synthetic(omega, t, tau=0.5, status=Status.COMPLETED):
    step = t[1] - t[0]
    return Trajectory(
        t=t, omega=omega, domega=np.gradient(omega, step), step=step, status=status,
        delays=DelayPair(tau / 2, tau), gamma=1.0, t_end=float(t[-1]),
        t_fail=None if status is Status.COMPLETED else float(t[-1] + step),
    )


T = np.linspace(0.0, 400.0, 40001)


@pytest.mark.parametrize(
    "rate,kind",
    [
        (-0.02, OscillationKind.CONVERGENT_OSCILLATORY),
        (-0.002, OscillationKind.CONVERGENT_OSCILLATORY),
        (0.0005, OscillationKind.SUSTAINED),
        (0.004, OscillationKind.GROWING),
    ],
)
def test_classifier_recovers_envelope_rate(rate, kind):
    w_s = 0.05
    omega = w_s * (1 + 0.1 * np.exp(rate * (T - 200)) * np.cos(3 * T))
    cls = classify_trajectory(synthetic(omega, T), w_s)
    assert cls.envelope_rate == pytest.approx(rate, abs=2e-4)
    assert cls.kind is kind


def test_classifier_sustained_and_monotone():
    w_s = 0.05
    cls = classify_trajectory(synthetic(w_s * (1 + 0.01 * np.sin(2 * T)), T), w_s)
    assert cls.kind is OscillationKind.SUSTAINED
    assert abs(cls.envelope_rate) < 1e-6
    mono = classify_trajectory(synthetic(w_s * (1 - 0.5 * np.exp(-T)), T), w_s)
    assert mono.kind is OscillationKind.CONVERGENT_MONOTONE
    assert mono.kind.convergent


def test_classifier_positivity_loss_and_short_horizon():
    t = np.linspace(0, 4, 401)
    lost = synthetic(0.05 + 0 * t, t, status=Status.POSITIVITY_LOSS)
    assert classify_trajectory(lost, 0.05).kind is OscillationKind.POSITIVITY_LOSS
    with pytest.raises(HorizonTooShort):
        classify_trajectory(synthetic(0.05 + 0 * t, t), 0.05)


# ---------------------------------------------------------------- simulation side


def test_simulation_bisection_matches_characteristic_equation(canonical_params):
    w_s = find_positive_stationary(canonical_params).omega_s
    tau1 = 0.2
    ref = hopf_for_params(canonical_params, tau1).tau2_star
    settings_ = SimulationSettings(t_end=400.0, steps_per_delay=32)
    est = critical_delay_by_simulation(
        canonical_params, tau1, (0.9 * ref, 1.1 * ref), settings_, width=2e-3, history=ConstantHistory(0.95 * w_s)
    )
    assert est == pytest.approx(ref, abs=5e-3)


def test_simulation_bisection_bracket_validation(canonical_params):
    with pytest.raises(BracketInvalid):
        critical_delay_by_simulation(canonical_params, 0.2, (1.0, 0.5))
    w_s = find_positive_stationary(canonical_params).omega_s
    settings_ = SimulationSettings(t_end=200.0, steps_per_delay=16)
    with pytest.raises(BracketInvalid):
        critical_delay_by_simulation(
            canonical_params, 0.2, (0.3, 0.4), settings_, history=ConstantHistory(0.95 * w_s)
        )


def test_positivity_loss_delay_brackets_the_transition(canonical_params):
    tau1 = bound_fraction_tau1(canonical_params, 0.025)
    s = SimulationSettings(steps_per_delay=32)
    t_loss = positivity_loss_delay(canonical_params, tau1, s, width=1e-3)
    assert not loses_positivity(canonical_params, tau1, t_loss - 1e-3, s)
    assert loses_positivity(canonical_params, tau1, t_loss + 1e-3, s)
