"""Critical delays of the linearized equation and simulated oscillation regimes.

For v'(t) = -b1 v(t - tau1) - b2 v(t - tau2) the characteristic function is

    Delta(lambda) = lambda + b1 exp(-lambda tau1) + b2 exp(-lambda tau2).

A root lambda = i w exists for some tau2 exactly when

    F(w) = (b1 cos(w tau1))^2 + (w - b1 sin(w tau1))^2 - b2^2 = 0,

and then tau2 follows from cos(w tau2) = -(b1/b2) cos(w tau1) and
sin(w tau2) = (w - b1 sin(w tau1)) / b2. The smallest such tau2 is the delay at
which the equilibrium first loses stability.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect
from scipy.signal import find_peaks

from tumorhopf.equilibria import (
    LinearCoeffs,
    find_positive_stationary,
    linearize_positive,
    tau1_admissible_bound,
)
from tumorhopf.errors import (
    BracketInvalid,
    CoefficientOrderViolated,
    HorizonTooShort,
    HypothesisViolated,
    InvalidParameter,
    NoCrossing,
    ResidualTooLarge,
)
from tumorhopf.integrator import (
    DEFAULT_STEPS_PER_DELAY,
    ConstantHistory,
    DelayPair,
    History,
    Trajectory,
    integrate,
)
from tumorhopf.model import ModelParams

CHAR_RESIDUAL_TOL = 1e-10
_SCAN_RESOLUTION = 1e-3
_OMEGA_TOL = 1e-13
# floating point slack on the closed right end of the admissible tau1 interval
_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class HopfResult:
    tau2_star: float
    omega_c: float
    residual: float
    branch: int = 0


def characteristic(lam: complex, b1: float, b2: float, tau1: float, tau2: float) -> complex:
    return lam + b1 * cmath.exp(-lam * tau1) + b2 * cmath.exp(-lam * tau2)


def compatibility(w: float, b1: float, b2: float, tau1: float) -> float:
    """F(w); its positive zeros are the admissible crossing frequencies."""
    return (b1 * math.cos(w * tau1)) ** 2 + (w - b1 * math.sin(w * tau1)) ** 2 - b2 * b2


def _check_hypotheses(coeffs: LinearCoeffs, tau1: float) -> None:
    b1, b2 = coeffs.b1, coeffs.b2
    if not (b1 < 0 and b2 > abs(b1)):
        raise HypothesisViolated(f"need b1 < 0 < |b1| < b2, got b1={b1!r}, b2={b2!r}")
    bound = tau1_admissible_bound(coeffs)
    if not (0 < tau1 <= bound * (1 + _BOUND_SLACK)):
        raise HypothesisViolated(f"tau1 must lie in (0, {bound:.6g}], got {tau1!r}")


def crossing_frequencies(coeffs: LinearCoeffs, tau1: float) -> List[float]:
    """All sign changes of F on (0, |b1| + b2], refined by bisection.

    F(0) = b1^2 - b2^2 < 0 and F(|b1| + b2) >= 0, so at least one exists.
    """
    _check_hypotheses(coeffs, tau1)
    b1, b2 = coeffs.b1, coeffs.b2
    w_max = abs(b1) + b2
    grid = np.linspace(0.0, w_max, int(round(1.0 / _SCAN_RESOLUTION)) + 1)
    vals = [compatibility(w, b1, b2, tau1) for w in grid]
    roots = [float(w) for w, v in zip(grid[1:], vals[1:]) if v == 0.0]
    for k in range(len(grid) - 1):
        if vals[k] * vals[k + 1] < 0.0:
            roots.append(
                bisect(compatibility, grid[k], grid[k + 1], args=(b1, b2, tau1), xtol=_OMEGA_TOL)
            )
    roots = sorted(set(roots))
    if not roots:
        raise NoCrossing(f"F(w) has no sign change on (0, {w_max:.6g}]")
    return roots


def crossing_frequency(coeffs: LinearCoeffs, tau1: float) -> float:
    """Smallest positive crossing frequency."""
    return crossing_frequencies(coeffs, tau1)[0]


def _tau2_for(w: float, b1: float, b2: float, tau1: float) -> float:
    c = -(b1 / b2) * math.cos(w * tau1)
    s = (w - b1 * math.sin(w * tau1)) / b2
    theta = math.atan2(s, c)
    if theta <= 0.0:
        theta += 2.0 * math.pi
    return theta / w


def critical_delay(coeffs: LinearCoeffs, tau1: float, branch: int = 0) -> HopfResult:
    """Smallest tau2 > 0 putting a characteristic root on the imaginary axis.

    ``branch`` k > 0 returns the same crossing shifted by k full periods,
    tau2* + 2 pi k / omega_c; it is only exposed for diagnostics.
    """
    b1, b2 = coeffs.b1, coeffs.b2
    best = None
    for w in crossing_frequencies(coeffs, tau1):
        tau2 = _tau2_for(w, b1, b2, tau1)
        if best is None or tau2 < best[0]:
            best = (tau2, w)
    tau2, w = best
    tau2 += 2.0 * math.pi * branch / w
    residual = abs(characteristic(1j * w, b1, b2, tau1, tau2))
    if not residual <= CHAR_RESIDUAL_TOL:
        raise ResidualTooLarge(f"characteristic residual {residual:.3g} at tau2={tau2!r}")
    return HopfResult(tau2_star=tau2, omega_c=w, residual=residual, branch=branch)


def single_delay_threshold(b1: float, b2: float) -> float:
    """Closed-form tau2* for tau1 = 0: arccos(-b1/b2) / sqrt(b2^2 - b1^2)."""
    return math.acos(-b1 / b2) / math.sqrt(b2 * b2 - b1 * b1)


# ---------------------------------------------------------------- simulation side


class OscillationKind(enum.Enum):
    CONVERGENT_MONOTONE = "convergent-monotone"
    CONVERGENT_OSCILLATORY = "convergent-oscillatory"
    SUSTAINED = "sustained"
    GROWING = "growing"
    POSITIVITY_LOSS = "positivity-loss"

    @property
    def convergent(self) -> bool:
        return self in (OscillationKind.CONVERGENT_MONOTONE, OscillationKind.CONVERGENT_OSCILLATORY)


@dataclass(frozen=True)
class OscillationClass:
    kind: OscillationKind
    envelope_rate: Optional[float] = None
    n_peaks: int = 0


@dataclass(frozen=True)
class ClassifierSettings:
    """Thresholds for :func:`classify_trajectory`.

    amplitude_floor is relative to omega_s; rate_tol is per unit time.
    """

    amplitude_floor: float = 1e-6
    rate_tol: float = 1e-3
    transient_fraction: float = 0.25
    min_peaks: int = 3
    min_delay_spans: float = 20.0


@dataclass(frozen=True)
class SimulationSettings:
    omega0: float = 0.01
    t_end: float = 400.0
    steps_per_delay: int = DEFAULT_STEPS_PER_DELAY
    classifier: ClassifierSettings = field(default_factory=ClassifierSettings)


def classify_trajectory(
    traj: Trajectory, omega_s: float, settings: ClassifierSettings = ClassifierSettings()
) -> OscillationClass:
    """Classify the approach to (or departure from) ``omega_s``.

    Peaks of |omega - omega_s| are collected over the resolvable part of the
    record: from the first ``transient_fraction`` of it up to the last time the
    deviation exceeds the amplitude floor. A least-squares line through
    log(peak) against peak time gives the envelope rate.
    """
    if not traj.completed:
        return OscillationClass(OscillationKind.POSITIVITY_LOSS)
    span = traj.delays.tau if traj.delays.tau > 0 else traj.step
    if traj.t_last < settings.min_delay_spans * span:
        raise HorizonTooShort(
            f"trajectory covers {traj.t_last:.4g}, need {settings.min_delay_spans} delay spans"
        )
    dev = np.abs(traj.omega - omega_s)
    floor = settings.amplitude_floor * omega_s
    above = np.nonzero(dev > floor)[0]
    if above.size == 0:
        return OscillationClass(OscillationKind.CONVERGENT_MONOTONE)
    t_active = traj.t[above[-1]]
    t_start = settings.transient_fraction * t_active
    peaks, _ = find_peaks(dev)
    peaks = peaks[(traj.t[peaks] >= t_start) & (dev[peaks] > floor)]
    if peaks.size < settings.min_peaks:
        return OscillationClass(OscillationKind.CONVERGENT_MONOTONE, n_peaks=int(peaks.size))
    rate, _ = np.polyfit(traj.t[peaks], np.log(dev[peaks]), 1)
    rate = float(rate)
    if rate < -settings.rate_tol:
        kind = OscillationKind.CONVERGENT_OSCILLATORY
    elif rate > settings.rate_tol:
        kind = OscillationKind.GROWING
    else:
        kind = OscillationKind.SUSTAINED
    return OscillationClass(kind, rate, int(peaks.size))


def simulate_and_classify(
    params: ModelParams,
    tau1: float,
    tau2: float,
    settings: SimulationSettings = SimulationSettings(),
    history: Optional[History] = None,
) -> Tuple[OscillationClass, Trajectory]:
    state = find_positive_stationary(params)
    if state is None:
        raise HypothesisViolated("no positive stationary solution (sigma_inf <= sigma_tilde)")
    if history is None:
        history = ConstantHistory(settings.omega0)
    traj = integrate(params, DelayPair(tau1, tau2), history, settings.t_end, settings.steps_per_delay)
    return classify_trajectory(traj, state.omega_s, settings.classifier), traj


def critical_delay_by_simulation(
    params: ModelParams,
    tau1: float,
    bracket: Tuple[float, float],
    settings: SimulationSettings = SimulationSettings(),
    width: float = 1e-3,
    history: Optional[History] = None,
) -> float:
    """Bisect tau2 on the boundary between convergent and non-convergent runs.

    An independent check of :func:`critical_delay` that never touches the
    characteristic equation.
    """
    lo, hi = bracket
    if not 0 < lo < hi:
        raise BracketInvalid(f"need 0 < lo < hi, got {bracket!r}")

    def convergent(tau2):
        return simulate_and_classify(params, tau1, tau2, settings, history)[0].kind.convergent

    if not convergent(lo):
        raise BracketInvalid(f"run at tau2={lo} is not convergent")
    if convergent(hi):
        raise BracketInvalid(f"run at tau2={hi} is convergent; bracket does not straddle")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if convergent(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def loses_positivity(params: ModelParams, tau1: float, tau2: float, settings: SimulationSettings, history=None) -> bool:
    if history is None:
        history = ConstantHistory(settings.omega0)
    traj = integrate(params, DelayPair(tau1, tau2), history, settings.t_end, settings.steps_per_delay)
    return not traj.completed


def positivity_loss_delay(
    params: ModelParams,
    tau1: float,
    settings: SimulationSettings = SimulationSettings(),
    guess: Optional[float] = None,
    width: float = 2e-5,
    history: Optional[History] = None,
) -> float:
    """Smallest tau2 at which the run from the given history leaves omega > 0.

    This is a property of the nonlinear transient, not of the linearization: it
    depends on the initial datum and may lie on either side of the Hopf point.
    The bracket is grown geometrically from ``guess`` (default: the Hopf point).
    """
    if guess is None:
        state = find_positive_stationary(params)
        if state is None:
            raise HypothesisViolated("no positive stationary solution")
        guess = critical_delay(linearize_positive(params, state), tau1).tau2_star

    def lost(tau2):
        return loses_positivity(params, tau1, tau2, settings, history)

    step = 0.05 * guess
    lo, hi = guess, guess
    if lost(guess):
        while lost(lo):
            lo -= step
            step *= 2
            if lo <= 0:
                raise BracketInvalid("positivity is lost for every tau2 tried")
    else:
        while not lost(hi):
            hi += step
            step *= 2
            if hi > 20 * guess:
                raise BracketInvalid("positivity is never lost below 20x the guess")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if lost(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def hopf_for_params(params: ModelParams, tau1: float) -> HopfResult:
    """Convenience: stationary state, linearization and critical delay in one go."""
    state = find_positive_stationary(params)
    if state is None:
        raise HypothesisViolated("no positive stationary solution (sigma_inf <= sigma_tilde)")
    return critical_delay(linearize_positive(params, state), tau1)


def bound_fraction_tau1(params: ModelParams, fraction: float) -> float:
    """tau1 as a fraction of the admissible bound pi / (2 sqrt(A2^2 - A1^2))."""
    if not fraction > 0:
        raise InvalidParameter("fraction must be > 0")
    state = find_positive_stationary(params)
    if state is None:
        raise HypothesisViolated("no positive stationary solution (sigma_inf <= sigma_tilde)")
    try:
        return fraction * tau1_admissible_bound(linearize_positive(params, state))
    except CoefficientOrderViolated as exc:
        raise HypothesisViolated(str(exc)) from None
