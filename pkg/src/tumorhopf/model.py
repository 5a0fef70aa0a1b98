"""Model parameters, nutrient profile and the reduced delay equation.

The nutrient concentration inside a spherical tumor of radius R solves a
linear elliptic problem with a Robin condition of strength ``alpha`` at the
boundary, and has the closed form

    sigma(r) = alpha sigma_inf / (alpha + sqrt(Gamma) g(sqrt(Gamma) R))
               * f(sqrt(Gamma) r) / f(sqrt(Gamma) R)

with f(x) = sinh(x)/x and g = f'/f. Substituting it into the volume balance
and writing omega = (sqrt(Gamma) R)^3 gives the scalar two-delay equation

    omega'(t) = a [ l(omega(t - tau1)^(1/3)) omega(t - tau1) - Lambda omega(t - tau2) ]

implemented by :func:`dde_rhs`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

from tumorhopf import special
from tumorhopf.errors import (
    ArgumentOverflow,
    InvalidParameter,
    NonPositiveArgument,
    NonPositiveState,
    RadiusOutOfRange,
)


class _Infinity(enum.Enum):
    INFINITE = "inf"

    def __repr__(self):
        return "INFINITE"


#: Angiogenesis rate of a tumor fully surrounded by vessels (Dirichlet limit).
INFINITE = _Infinity.INFINITE

Alpha = Union[float, _Infinity]


def parse_alpha(value) -> Alpha:
    """Accept a number, ``"inf"`` or ``math.inf``; return a float or INFINITE."""
    if value is INFINITE:
        return INFINITE
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "infinite"):
            return INFINITE
        value = float(value)
    if isinstance(value, bool):
        raise InvalidParameter("alpha must be a number or 'inf'")
    value = float(value)
    if math.isinf(value) and value > 0:
        return INFINITE
    return value


def format_alpha(alpha: Alpha) -> str:
    return "inf" if alpha is INFINITE else repr(float(alpha))


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the tumor model.

    Parameters
    ----------
    gamma : float
        Nutrient consumption rate Gamma.
    mu : float
        Proliferation coefficient.
    sigma_tilde : float
        Apoptosis threshold concentration.
    sigma_inf : float
        Nutrient concentration in the host tissue.
    alpha : float or INFINITE
        Angiogenesis rate (Robin coefficient). ``INFINITE`` selects the
        Dirichlet condition sigma(R) = sigma_inf.
    """

    gamma: float
    mu: float
    sigma_tilde: float
    sigma_inf: float
    alpha: Alpha = INFINITE

    def __post_init__(self):
        for name in ("gamma", "mu", "sigma_tilde", "sigma_inf"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidParameter(f"{name} must be a real number, got {v!r}")
            if not (math.isfinite(v) and v > 0):
                raise InvalidParameter(f"{name} must be finite and > 0, got {v!r}")
            object.__setattr__(self, name, float(v))
        try:
            alpha = parse_alpha(self.alpha)
        except (TypeError, ValueError) as exc:
            raise InvalidParameter(f"alpha: {exc}") from None
        if alpha is not INFINITE and not (math.isfinite(alpha) and alpha >= 0):
            raise InvalidParameter(f"alpha must be >= 0 or INFINITE, got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)

    @property
    def dirichlet(self) -> bool:
        return self.alpha is INFINITE

    @property
    def sqrt_gamma(self) -> float:
        return math.sqrt(self.gamma)

    def with_alpha(self, alpha) -> "ModelParams":
        return ModelParams(self.gamma, self.mu, self.sigma_tilde, self.sigma_inf, alpha)

    def kernel_args(self):
        """(alpha, sqrt_gamma, dirichlet) in the form the compiled kernels take."""
        alpha = 0.0 if self.dirichlet else float(self.alpha)
        return alpha, self.sqrt_gamma, self.dirichlet


@dataclass(frozen=True)
class DerivedParams:
    a1: float
    lam: float

    @property
    def a(self) -> float:
        return 3.0 * self.a1


def derive_params(params: ModelParams) -> DerivedParams:
    """a1 = mu sigma_inf and Lambda = sigma_tilde / (3 sigma_inf)."""
    return DerivedParams(
        a1=params.mu * params.sigma_inf,
        lam=params.sigma_tilde / (3.0 * params.sigma_inf),
    )


@dataclass(frozen=True)
class BasisValues:
    f: float
    g: float
    p: float


def _check_positive(x):
    if not x > 0:
        raise NonPositiveArgument(f"argument must be > 0, got {x!r}")
    if math.isinf(x):
        raise ArgumentOverflow("argument is infinite")


def eval_basis(x: float) -> BasisValues:
    """Evaluate f, g and p at ``x > 0``.

    g and p are finite for every positive double; f itself overflows a double
    somewhat above x = 700, in which case :class:`ArgumentOverflow` is raised.
    """
    _check_positive(x)
    g, p = special.g_p(x)
    try:
        f = special.f_value(x)
    except OverflowError as exc:
        raise ArgumentOverflow(str(exc)) from None
    return BasisValues(f=f, g=g, p=p)


def eval_p_prime(x: float) -> float:
    _check_positive(x)
    return special.p_prime(x)


def eval_l(x: float, params: ModelParams) -> float:
    _check_positive(x)
    return special.l_value(x, *params.kernel_args())


def eval_l_prime(x: float, params: ModelParams) -> float:
    _check_positive(x)
    return special.l_prime_value(x, *params.kernel_args())


def nutrient_profile(r: float, R: float, params: ModelParams) -> float:
    """Nutrient concentration at radius ``r`` inside a tumor of radius ``R``."""
    if not R > 0 or math.isinf(R):
        raise RadiusOutOfRange(f"tumor radius must be finite and > 0, got {R!r}")
    if not 0 <= r <= R:
        raise RadiusOutOfRange(f"need 0 <= r <= R, got r={r!r}, R={R!r}")
    s = params.sqrt_gamma
    ratio = math.exp(special.log_f(s * r) - special.log_f(s * R))
    if params.dirichlet:
        return params.sigma_inf * ratio
    g, _ = special.g_p(s * R)
    return params.alpha * params.sigma_inf / (params.alpha + s * g) * ratio


def dde_rhs(omega_tau1: float, omega_tau2: float, derived: DerivedParams, params: ModelParams) -> float:
    """Right-hand side of the reduced equation given the two delayed states."""
    if not (omega_tau1 > 0 and omega_tau2 > 0):
        raise NonPositiveState(
            f"delayed states must be > 0, got {omega_tau1!r}, {omega_tau2!r}"
        )
    y = omega_tau1 ** (1.0 / 3.0)
    lv = special.l_value(y, *params.kernel_args())
    return derived.a * (lv * omega_tau1 - derived.lam * omega_tau2)


def radius_from_omega(omega, gamma: float):
    """R = omega^(1/3) / sqrt(Gamma)."""
    return omega ** (1.0 / 3.0) / math.sqrt(gamma)


def omega_from_radius(radius, gamma: float):
    return (math.sqrt(gamma) * radius) ** 3
