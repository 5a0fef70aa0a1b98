import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from tests.conftest import CANONICAL, valid_params
from tumorhopf.equilibria import find_positive_stationary
from tumorhopf.hopf import bound_fraction_tau1, hopf_for_params
from tumorhopf.errors import HistoryDomainViolation, InvalidStepCount, TimeOutOfRange
from tumorhopf.integrator import (
    ConstantHistory,
    DelayPair,
    FormulaHistory,
    SampledHistory,
    Status,
    convergence_order,
    history_from_radius,
    integrate,
    sample,
    step_size,
)
from tumorhopf.model import ModelParams, derive_params, eval_l


def reference_solution(params, tau1, tau2, history, t_end):
    """Independent method of steps: adaptive DOP853 per interval of length
    min(tau1, tau2), delayed values taken from the dense output of earlier
    intervals."""
    d = derive_params(params)
    step = min(tau1, tau2)
    pieces = []

    def past(s):
        if s <= 0:
            return float(history.value(s))
        for a, b, sol in pieces:
            if a <= s <= b:
                return float(sol(s)[0])
        raise AssertionError(s)

    def rhs(t, y):
        w1, w2 = past(t - tau1), past(t - tau2)
        return [d.a * (eval_l(w1 ** (1 / 3), params) * w1 - d.lam * w2)]

    t0, y0 = 0.0, float(history.value(0.0))
    while t0 < t_end - 1e-12:
        t1 = min(t0 + step, t_end)
        sol = solve_ivp(rhs, (t0, t1), [y0], method="DOP853", rtol=1e-12, atol=1e-15, dense_output=True)
        pieces.append((t0, t1, sol.sol))
        t0, y0 = t1, float(sol.y[0, -1])
    return past


@pytest.fixture
def params():
    return ModelParams(alpha=0.2, **CANONICAL)


@pytest.mark.parametrize("tau1,tau2", [(0.5, 1.0), (1.0, 0.5), (0.3, 0.7)])
def test_matches_independent_method_of_steps(params, tau1, tau2):
    hist = ConstantHistory(0.03)
    traj = integrate(params, DelayPair(tau1, tau2), hist, 4.0, steps_per_delay=64)
    ref = reference_solution(params, tau1, tau2, hist, 4.0)
    for t in np.linspace(0.0, 4.0, 17):
        assert traj.omega_at(t) == pytest.approx(ref(t), rel=1e-7)


def test_first_interval_is_exactly_linear_for_constant_history(params):
    # with constant history the right-hand side is constant until t = min delay
    w0 = 0.02
    traj = integrate(params, DelayPair(0.4, 0.8), ConstantHistory(w0), 0.4, 16)
    d = derive_params(params)
    slope = d.a * (eval_l(w0 ** (1 / 3), params) * w0 - d.lam * w0)
    np.testing.assert_allclose(traj.omega, w0 + slope * traj.t, rtol=1e-14)


@settings(max_examples=15, deadline=None)
@given(valid_params(), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_equilibrium_is_preserved(p, f1, f2):
    # below the Hopf delay rounding errors are damped rather than amplified
    tau1 = bound_fraction_tau1(p, f1)
    tau2 = f2 * hopf_for_params(p, tau1).tau2_star
    w = find_positive_stationary(p).omega_s
    traj = integrate(p, DelayPair(tau1, tau2), ConstantHistory(w), 20.0 * max(tau1, tau2), 8)
    assert traj.completed
    assert np.max(np.abs(traj.omega - w)) <= 1e-12 * w


@pytest.mark.parametrize(
    "delays,history",
    [
        (DelayPair(1.0, 0.5), ConstantHistory(0.03)),
        (DelayPair(0.25, 0.5), ConstantHistory(0.1)),
        (DelayPair(0.5, 1.0), FormulaHistory(lambda t: 0.05 + 0.01 * np.cos(t), lambda t: -0.01 * np.sin(t))),
    ],
)
def test_observed_order_is_four(params, delays, history):
    order = convergence_order(params, delays, history, t_probe=5.0, steps=(16, 32, 64))
    assert order >= 3.5


def test_convergence_order_undefined_at_equilibrium(params):
    w = find_positive_stationary(params).omega_s
    assert convergence_order(params, DelayPair(1.0, 0.5), ConstantHistory(w), 3.0) is None


def test_convergence_order_requires_doublings(params):
    with pytest.raises(InvalidStepCount):
        convergence_order(params, DelayPair(1.0, 0.5), ConstantHistory(0.03), 3.0, steps=(10, 20, 30))


@pytest.mark.parametrize("bad", [3, 0, True, 4.5])
def test_step_count_validation(params, bad):
    with pytest.raises(InvalidStepCount):
        integrate(params, DelayPair(0.1, 0.2), ConstantHistory(0.05), 1.0, bad)


def test_positivity_loss_is_reported(params):
    traj = integrate(params, DelayPair(0.0393654, 0.5614), ConstantHistory(0.01), 400.0)
    assert traj.status is Status.POSITIVITY_LOSS
    assert not traj.completed
    assert np.all(traj.omega > 0)
    assert traj.t_last < traj.t_fail <= traj.t_last + traj.step + 1e-12
    assert traj.t_fail < 400.0


def test_zero_delays_reduce_to_ode(params):
    d = derive_params(params)

    def rhs(t, y):
        return [d.a * (eval_l(y[0] ** (1 / 3), params) - d.lam) * y[0]]

    traj = integrate(params, DelayPair(0.0, 0.0), ConstantHistory(0.01), 5.0)
    ref = solve_ivp(rhs, (0, 5.0), [0.01], rtol=1e-12, atol=1e-15, t_eval=[5.0])
    assert traj.omega[-1] == pytest.approx(ref.y[0, -1], rel=1e-8)
    traj1 = integrate(params, DelayPair(0.0, 0.5), ConstantHistory(0.01), 5.0)
    assert traj1.step == pytest.approx(0.5 / 64)
    assert traj1.completed


def test_step_size_rules():
    assert step_size(DelayPair(0.2, 0.4), 10.0, 64) == pytest.approx(0.2 / 64)
    assert step_size(DelayPair(0.0, 0.4), 10.0, 64) == pytest.approx(0.4 / 64)
    assert step_size(DelayPair(0.0, 0.0), 10.0, 64) == pytest.approx(0.01)


def test_last_node_reaches_horizon(params):
    traj = integrate(params, DelayPair(0.3, 0.7), ConstantHistory(0.05), 1.0, 8)
    assert traj.t_last >= 1.0
    assert traj.t_last - traj.step < 1.0


def test_dense_output_reproduces_nodes_and_bounds(params):
    traj = integrate(params, DelayPair(0.3, 0.7), ConstantHistory(0.05), 3.0, 8)
    np.testing.assert_array_equal(traj.omega_at(traj.t), traj.omega)
    with pytest.raises(TimeOutOfRange):
        traj.omega_at(-0.1)
    with pytest.raises(TimeOutOfRange):
        traj.omega_at(traj.t_last + 1.0)
    w, r = sample(traj, 1.234)
    assert r == pytest.approx(w ** (1 / 3) / math.sqrt(params.gamma))


def test_trajectory_arrays_are_read_only(params):
    traj = integrate(params, DelayPair(0.3, 0.7), ConstantHistory(0.05), 1.0, 8)
    with pytest.raises(ValueError):
        traj.omega[0] = 1.0


def test_csv_output(tmp_path, params):
    traj = integrate(params, DelayPair(0.3, 0.7), ConstantHistory(0.05), 1.0, 8)
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "t,omega,radius"
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    np.testing.assert_array_equal(data[:, 0], traj.t)
    np.testing.assert_array_equal(data[:, 1], traj.omega)
    np.testing.assert_array_equal(data[:, 2], traj.radius)


def test_sampled_history(params):
    hist = SampledHistory([[-1.0, 0.04], [-0.5, 0.06], [0.0, 0.05]])
    assert hist.covers(1.0)
    assert not hist.covers(1.5)
    assert float(hist.value(-0.5)) == pytest.approx(0.06)
    traj = integrate(params, DelayPair(0.4, 1.0), hist, 2.0, 16)
    assert traj.omega[0] == pytest.approx(0.05)
    with pytest.raises(HistoryDomainViolation):
        integrate(params, DelayPair(0.4, 2.0), hist, 2.0, 16)


@pytest.mark.parametrize(
    "samples",
    [[[0.0, 0.1]], [[-1.0, 0.1], [-1.0, 0.2]], [[-1.0, -0.1], [0.0, 0.1]], [[-1.0, math.nan], [0.0, 0.1]]],
)
def test_sampled_history_validation(samples):
    with pytest.raises(HistoryDomainViolation):
        SampledHistory(samples)


def test_nonpositive_history_rejected(params):
    with pytest.raises(HistoryDomainViolation):
        ConstantHistory(0.0)
    hist = FormulaHistory(lambda t: 0.05 + 0.1 * t)
    with pytest.raises(HistoryDomainViolation):
        integrate(params, DelayPair(0.4, 1.0), hist, 1.0, 8)


def test_history_from_radius(params):
    hist = history_from_radius(lambda t: 0.3 + 0.0 * t, params.gamma, lambda t: 0.0 * t)
    assert float(hist.value(-0.2)) == pytest.approx(0.027)
    assert float(hist.slope(-0.2)) == 0.0
