"""Low-level kernels for f(x) = sinh(x)/x, g = f'/f and p = g/x.

These are plain-float functions compiled with numba so the DDE integrator can
call them from its inner loop. Argument checking lives in :mod:`tumorhopf.model`.

For small x, ``coth(x) - 1/x`` cancels catastrophically (relative error grows
like eps/x^2), so below ``SERIES_CUTOFF`` we sum the Laurent series of coth:

    g(x) = sum_{n>=1} c_n x^(2n-1),   c_n = 2^(2n) B_(2n) / (2n)!

which converges for |x| < pi. Above the cutoff the closed forms lose at most a
few ulps.
"""

import math
from fractions import Fraction

import numba
import numpy as np

SERIES_CUTOFF = 1.0
_N_TERMS = 24  # (1/pi)^(2*24) ~ 1e-24, far below double precision


def _bernoulli(m):
    # exact B_0..B_m (B_1 = -1/2 convention; only even indices are used)
    b = [Fraction(0)] * (m + 1)
    for n in range(m + 1):
        b[n] = Fraction(1) if n == 0 else -sum(
            math.comb(n + 1, k) * b[k] for k in range(n)
        ) / (n + 1)
    return b


_B = _bernoulli(2 * _N_TERMS)
# p(x) = sum_n C[n] z^n with z = x^2; C[0] = 1/3
_P_COEF = np.array(
    [float(2 ** (2 * n) * _B[2 * n] / math.factorial(2 * n)) for n in range(1, _N_TERMS + 1)]
)
# p'(x) = x * sum_n D[n] z^n
_DP_COEF = np.array([_P_COEF[n] * 2 * n for n in range(1, _N_TERMS)])

# math.exp overflows just above this
_LOG_MAX = 709.78


@numba.njit(cache=True)
def _horner(coef, z):
    acc = 0.0
    for k in range(coef.shape[0] - 1, -1, -1):
        acc = acc * z + coef[k]
    return acc


@numba.njit(cache=True)
def g_p(x):
    """Return ``(g(x), p(x))`` for x > 0."""
    if x < SERIES_CUTOFF:
        p = _horner(_P_COEF, x * x)
        return x * p, p
    g = 1.0 / math.tanh(x) - 1.0 / x
    return g, g / x


@numba.njit(cache=True)
def p_prime(x):
    if x < SERIES_CUTOFF:
        return x * _horner(_DP_COEF, x * x)
    e = math.exp(-2.0 * x)
    inv_sinh2 = 4.0 * e / (math.expm1(-2.0 * x) ** 2)
    g = 1.0 / math.tanh(x) - 1.0 / x
    g_prime = 1.0 / (x * x) - inv_sinh2
    return (g_prime * x - g) / (x * x)


@numba.njit(cache=True)
def log_f(x):
    """log(sinh(x)/x), finite for every x >= 0."""
    if x == 0.0:
        return 0.0
    if x < 1.0:
        return math.log(math.sinh(x) / x)
    return x + math.log1p(-math.exp(-2.0 * x)) - math.log(2.0 * x)


def f_value(x):
    """sinh(x)/x; raises OverflowError once the value exceeds double range."""
    if x < 700.0:
        return math.sinh(x) / x
    if log_f(x) > _LOG_MAX:
        raise OverflowError("sinh(x)/x overflows for x = %r" % x)
    # split exp(x) so that no intermediate overflows and x/2 stays exact
    half = math.exp(0.5 * x)
    return (half / (2.0 * x)) * half * -math.expm1(-2.0 * x)


@numba.njit(cache=True)
def l_value(x, alpha, sqrt_gamma, dirichlet):
    """l(x) = alpha p / (alpha + sqrt(Gamma) g); p itself when dirichlet."""
    g, p = g_p(x)
    if dirichlet:
        return p
    return alpha * p / (alpha + sqrt_gamma * g)


@numba.njit(cache=True)
def l_prime_value(x, alpha, sqrt_gamma, dirichlet):
    dp = p_prime(x)
    if dirichlet:
        return dp
    g, p = g_p(x)
    den = alpha + sqrt_gamma * g
    return (alpha * alpha * dp - alpha * sqrt_gamma * p * p) / (den * den)
