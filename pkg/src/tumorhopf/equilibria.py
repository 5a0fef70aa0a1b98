"""Stationary solutions of the reduced equation and their linearizations.

Around an equilibrium the perturbation v = omega - omega_eq obeys

    v'(t) = -b1 v(t - tau1) - b2 v(t - tau2)

and the stability results only depend on (b1, b2) and the delays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from scipy.optimize import bisect

from tumorhopf import special
from tumorhopf.errors import (
    BracketNotFound,
    CoefficientOrderViolated,
    InconsistentState,
    InvariantViolation,
)
from tumorhopf.model import ModelParams, derive_params

STATIONARY_RESIDUAL_TOL = 1e-12
_BRACKET_START = (1e-8, 1.0)
_BRACKET_CAP = 1e6
_Y_TOL = 1e-14


class Equilibrium(enum.Enum):
    TRIVIAL = "trivial"
    POSITIVE = "positive"


class TrivialKind(enum.Enum):
    UNSTABLE_NO_HOPF = "unstable-no-hopf"
    STABLE_WITH_HOPF_THRESHOLD = "stable-with-hopf-threshold"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class LinearCoeffs:
    b1: float
    b2: float
    about: Equilibrium


@dataclass(frozen=True)
class StationaryState:
    omega_s: float
    radius_s: float
    residual: float

    @property
    def y(self) -> float:
        """Scaled stationary radius sqrt(Gamma) R_s = omega_s^(1/3)."""
        return self.omega_s ** (1.0 / 3.0)


@dataclass(frozen=True)
class TrivialRegime:
    kind: TrivialKind
    tau1_bound: Optional[float] = None


def find_positive_stationary(params: ModelParams) -> Optional[StationaryState]:
    """Unique positive root of l(omega^(1/3)) = Lambda, or None if there is none.

    l decreases strictly from 1/3 to 0, so a positive equilibrium exists exactly
    when Lambda < 1/3, i.e. sigma_inf > sigma_tilde. The root is bracketed by
    doubling the upper end of [1e-8, 1] and refined by bisection in
    y = omega^(1/3).
    """
    if not params.sigma_inf > params.sigma_tilde:
        return None
    lam = derive_params(params).lam
    kargs = params.kernel_args()

    def h(y):
        return special.l_value(y, *kargs) - lam

    lo, hi = _BRACKET_START
    if h(lo) <= 0:
        raise BracketNotFound(f"l({lo}) <= Lambda; stationary radius below {lo}")
    while h(hi) > 0:
        hi *= 2.0
        if hi > _BRACKET_CAP:
            raise BracketNotFound(f"no sign change of l(y) - Lambda below y = {_BRACKET_CAP:g}")
    y = bisect(h, lo, hi, xtol=_Y_TOL, maxiter=400)
    omega_s = y**3
    return StationaryState(
        omega_s=omega_s,
        radius_s=y / params.sqrt_gamma,
        residual=abs(h(omega_s ** (1.0 / 3.0))),
    )


def linearize_positive(params: ModelParams, state: StationaryState) -> LinearCoeffs:
    """Coefficients about the positive equilibrium.

    b1 = -(a/3) [y l'(y) + 3 l(y)] with y = omega_s^(1/3), and b2 = a Lambda.
    Since y^3 l(y) is increasing, b1 < 0 and |b1| < b2 always hold.
    """
    d = derive_params(params)
    kargs = params.kernel_args()
    y = state.y
    lv = special.l_value(y, *kargs)
    if abs(lv - d.lam) > STATIONARY_RESIDUAL_TOL:
        raise InconsistentState(
            f"state does not satisfy l(y) = Lambda for these params (residual {abs(lv - d.lam):.3g})"
        )
    b1 = -(d.a / 3.0) * (y * special.l_prime_value(y, *kargs) + 3.0 * lv)
    b2 = d.a * d.lam
    if not (b1 < 0 and abs(b1) < b2):
        raise InvariantViolation(f"expected b1 < 0 and |b1| < b2, got b1={b1!r}, b2={b2!r}")
    return LinearCoeffs(b1=b1, b2=b2, about=Equilibrium.POSITIVE)


def linearize_trivial(params: ModelParams) -> LinearCoeffs:
    # l(0+) = 1/3, so b1 = -a/3 = -mu sigma_inf and b2 = a Lambda = mu sigma_tilde
    d = derive_params(params)
    return LinearCoeffs(b1=-d.a / 3.0, b2=d.a * d.lam, about=Equilibrium.TRIVIAL)


def classify_trivial(params: ModelParams) -> TrivialRegime:
    s_inf, s_til = params.sigma_inf, params.sigma_tilde
    if s_inf > s_til:
        return TrivialRegime(TrivialKind.UNSTABLE_NO_HOPF)
    if s_inf < s_til:
        bound = math.pi / (2.0 * params.mu * math.sqrt(s_til**2 - s_inf**2))
        return TrivialRegime(TrivialKind.STABLE_WITH_HOPF_THRESHOLD, bound)
    return TrivialRegime(TrivialKind.DEGENERATE)


def tau1_admissible_bound(coeffs: LinearCoeffs) -> float:
    """Largest tau1 for which the Hopf threshold in tau2 is guaranteed."""
    b1, b2 = coeffs.b1, coeffs.b2
    if not abs(b1) < b2:
        raise CoefficientOrderViolated(f"need |b1| < b2, got b1={b1!r}, b2={b2!r}")
    return math.pi / (2.0 * math.sqrt(b2 * b2 - b1 * b1))
