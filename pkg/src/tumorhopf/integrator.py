"""Method-of-steps integration of the reduced two-delay equation.

Classical RK4 on a uniform mesh with h = min(tau1, tau2) / steps_per_delay.
Because h never exceeds the smaller positive delay, every delayed argument a
stage needs lies in already accepted history, which is read through a cubic
Hermite interpolant built from stored (omega, omega') node pairs. No implicit
iteration is needed.

Derivative jumps propagating from t = 0 are not added to the mesh; they cost
at most one order locally and the convergence harness checks the net effect.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numba
import numpy as np
from scipy.interpolate import PchipInterpolator

from tumorhopf import special
from tumorhopf.errors import (
    HistoryDomainViolation,
    InvalidStepCount,
    TimeOutOfRange,
)
from tumorhopf.model import ModelParams, derive_params

DEFAULT_STEPS_PER_DELAY = 64
_ODE_STEPS = 1000


@dataclass(frozen=True)
class DelayPair:
    tau1: float
    tau2: float

    def __post_init__(self):
        for name in ("tau1", "tau2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    @property
    def tau(self) -> float:
        return max(self.tau1, self.tau2)

    @property
    def tau3(self) -> float:
        return min(self.tau1, self.tau2)


# ---------------------------------------------------------------- histories


class History:
    """Initial datum omega(t) on [-tau, 0].

    Subclasses provide ``value`` and ``slope``; the integrator tabulates both on
    its mesh. ``domain`` is the closed interval on which the history is defined.
    """

    domain = (-math.inf, 0.0)

    def value(self, t):
        raise NotImplementedError

    def slope(self, t):
        raise NotImplementedError

    def covers(self, tau: float) -> bool:
        lo, hi = self.domain
        return lo <= -tau + 1e-12 * max(1.0, tau) and hi >= 0.0


@dataclass(frozen=True)
class ConstantHistory(History):
    omega0: float

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise HistoryDomainViolation(f"history must be positive, got {self.omega0!r}")

    def value(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.omega0)

    def slope(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))


class SampledHistory(History):
    """History given as (t, omega) samples, interpolated monotonically (PCHIP).

    PCHIP never overshoots the data, so positive samples give a positive history.
    """

    def __init__(self, samples: Sequence[Sequence[float]]):
        arr = np.asarray(samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
            raise HistoryDomainViolation("samples must be a list of at least two (t, value) pairs")
        order = np.argsort(arr[:, 0], kind="stable")
        arr = arr[order]
        if np.any(np.diff(arr[:, 0]) <= 0):
            raise HistoryDomainViolation("sample times must be distinct")
        if np.any(arr[:, 1] <= 0) or not np.all(np.isfinite(arr)):
            raise HistoryDomainViolation("history samples must be finite and positive")
        self.samples = arr
        self.domain = (float(arr[0, 0]), float(arr[-1, 0]))
        self._interp = PchipInterpolator(arr[:, 0], arr[:, 1], extrapolate=False)
        self._deriv = self._interp.derivative()

    def value(self, t):
        return self._interp(t)

    def slope(self, t):
        return self._deriv(t)

    def __eq__(self, other):
        return isinstance(other, SampledHistory) and np.array_equal(self.samples, other.samples)

    def __repr__(self):
        return f"SampledHistory({self.samples.tolist()!r})"


class FormulaHistory(History):
    """History given by a callable ``t -> omega`` (vectorized over numpy arrays).

    Without an explicit ``derivative`` the slope is taken by central differences
    (one-sided at t = 0, where the formula need not be defined to the right).
    """

    def __init__(self, func: Callable, derivative: Optional[Callable] = None, domain=(-math.inf, 0.0)):
        self.func = func
        self.derivative = derivative
        self.domain = (float(domain[0]), float(domain[1]))

    def value(self, t):
        return np.asarray(self.func(np.asarray(t, dtype=float)), dtype=float)

    def slope(self, t):
        t = np.asarray(t, dtype=float)
        if self.derivative is not None:
            return np.asarray(self.derivative(t), dtype=float)
        eps = 1e-5 * np.maximum(1.0, np.abs(t))
        lo, hi = self.domain
        fwd = np.minimum(t + eps, hi)
        back = np.maximum(t - eps, lo)
        return (self.value(fwd) - self.value(back)) / (fwd - back)


def history_from_radius(phi: Callable, gamma: float, derivative: Optional[Callable] = None) -> FormulaHistory:
    """Turn an initial radius phi(t) into omega0(t) = (sqrt(Gamma) phi(t))^3."""
    s = math.sqrt(gamma)

    def omega0(t):
        return (s * np.asarray(phi(t), dtype=float)) ** 3

    def domega0(t):
        r = np.asarray(phi(t), dtype=float)
        return 3.0 * s**3 * r**2 * np.asarray(derivative(t), dtype=float)

    return FormulaHistory(omega0, None if derivative is None else domega0)


def _tabulate_history(history: History, tau: float, h: float):
    """Nodes 0, -h, -2h, ... plus -tau, ascending, with values and slopes."""
    if not history.covers(tau):
        raise HistoryDomainViolation(
            f"history domain {history.domain} does not cover [{-tau}, 0]"
        )
    m = int(math.ceil(tau / h - 1e-9)) if tau > 0 else 0
    back = -h * np.arange(m)[::-1]  # -(m-1)h .. 0
    times = np.concatenate(([-tau], back)) if m > 0 else np.array([0.0])
    if m > 0 and times[1] <= times[0]:
        times = times[1:]
    lo = history.domain[0]
    times = np.maximum(times, lo)
    values = np.asarray(history.value(times), dtype=float)
    slopes = np.asarray(history.slope(times), dtype=float)
    if values.shape != times.shape:
        values = np.broadcast_to(values, times.shape).copy()
        slopes = np.broadcast_to(slopes, times.shape).copy()
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(slopes))):
        raise HistoryDomainViolation("history is not finite on [-tau, 0]")
    if np.any(values <= 0):
        raise HistoryDomainViolation("history must be strictly positive on [-tau, 0]")
    return times, values, slopes


# ---------------------------------------------------------------- kernel


@numba.njit(cache=True)
def _hermite(s, t0, t1, y0, y1, d0, d1):
    dt = t1 - t0
    u = (s - t0) / dt
    u2 = u * u
    u3 = u2 * u
    return (
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
        + (u3 - 2.0 * u2 + u) * dt * d0
        + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * dt * d1
    )


@numba.njit(cache=True)
def _lookup(s, i, h, w, d, ht, hw, hd):
    """omega(s) for s <= t_i, from history (s <= 0) or accepted nodes."""
    if s <= 0.0:
        m = ht.shape[0]
        if m == 1 or s >= 0.0:
            return hw[m - 1]
        j = int(-s / h)
        hi = m - 1 - j
        lo = hi - 1
        if lo < 0:
            lo = 0
            hi = 1
        return _hermite(s, ht[lo], ht[hi], hw[lo], hw[hi], hd[lo], hd[hi])
    k = int(s / h)
    if k > i - 1:
        k = i - 1
    t0 = k * h
    return _hermite(s, t0, t0 + h, w[k], w[k + 1], d[k], d[k + 1])


@numba.njit(cache=True)
def _rhs(w1, w2, a, lam, alpha, sqrt_gamma, dirichlet):
    y = w1 ** (1.0 / 3.0)
    return a * (special.l_value(y, alpha, sqrt_gamma, dirichlet) * w1 - lam * w2)


@numba.njit(cache=True)
def _integrate_kernel(a, lam, alpha, sqrt_gamma, dirichlet, tau1, tau2, h, n_steps, ht, hw, hd):
    """Returns (omega, slope, n_nodes, failed, t_fail)."""
    w = np.empty(n_steps + 1)
    d = np.empty(n_steps + 1)
    w[0] = hw[hw.shape[0] - 1]
    w1 = w[0] if tau1 == 0.0 else _lookup(-tau1, 0, h, w, d, ht, hw, hd)
    w2 = w[0] if tau2 == 0.0 else _lookup(-tau2, 0, h, w, d, ht, hw, hd)
    d[0] = _rhs(w1, w2, a, lam, alpha, sqrt_gamma, dirichlet)
    cs = (0.0, 0.5, 0.5, 1.0)
    for i in range(n_steps):
        t = i * h
        y = w[i]
        acc = 0.0
        k = 0.0
        for j in range(4):
            if j > 0:
                y = w[i] + cs[j] * h * k
            tt = t + cs[j] * h
            w1 = y if tau1 == 0.0 else _lookup(tt - tau1, i, h, w, d, ht, hw, hd)
            w2 = y if tau2 == 0.0 else _lookup(tt - tau2, i, h, w, d, ht, hw, hd)
            if w1 <= 0.0 or w2 <= 0.0:
                return w, d, i + 1, True, (i + 1) * h
            k = _rhs(w1, w2, a, lam, alpha, sqrt_gamma, dirichlet)
            acc += (1.0 if (j == 0 or j == 3) else 2.0) * k
        wn = w[i] + h / 6.0 * acc
        if not wn > 0.0:
            return w, d, i + 1, True, (i + 1) * h
        w[i + 1] = wn
        tn = (i + 1) * h
        w1 = wn if tau1 == 0.0 else _lookup(tn - tau1, i, h, w, d, ht, hw, hd)
        w2 = wn if tau2 == 0.0 else _lookup(tn - tau2, i, h, w, d, ht, hw, hd)
        if w1 <= 0.0 or w2 <= 0.0:
            return w, d, i + 1, True, tn
        d[i + 1] = _rhs(w1, w2, a, lam, alpha, sqrt_gamma, dirichlet)
    return w, d, n_steps + 1, False, 0.0


# ---------------------------------------------------------------- trajectory


class Status(enum.Enum):
    COMPLETED = "completed"
    POSITIVITY_LOSS = "positivity-loss"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Nodes of an integrated solution with cubic Hermite dense output.

    When ``status`` is POSITIVITY_LOSS the node arrays stop at the last positive
    node and ``t_fail`` is the step boundary at which the loss was detected.
    """

    t: np.ndarray
    omega: np.ndarray
    domega: np.ndarray
    step: float
    status: Status
    delays: DelayPair
    gamma: float
    t_end: float
    t_fail: Optional[float] = None
    history: Optional[History] = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.t, self.omega, self.domega):
            arr.flags.writeable = False

    def __len__(self):
        return self.t.shape[0]

    @property
    def t_last(self) -> float:
        return float(self.t[-1])

    @property
    def completed(self) -> bool:
        return self.status is Status.COMPLETED

    @property
    def radius(self) -> np.ndarray:
        return np.cbrt(self.omega) / math.sqrt(self.gamma)

    def omega_at(self, t):
        """Dense cubic Hermite evaluation, vectorized over ``t``."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.t_last):
            raise TimeOutOfRange(f"t must lie in [0, {self.t_last}]")
        n = len(self)
        if n == 1:
            return np.full_like(t, self.omega[0])
        k = np.minimum((t / self.step).astype(np.int64), n - 2)
        t0 = self.t[k]
        h = self.t[k + 1] - t0
        u = (t - t0) / h
        u2, u3 = u * u, u * u * u
        out = (
            (2 * u3 - 3 * u2 + 1) * self.omega[k]
            + (u3 - 2 * u2 + u) * h * self.domega[k]
            + (-2 * u3 + 3 * u2) * self.omega[k + 1]
            + (u3 - u2) * h * self.domega[k + 1]
        )
        # exact node reproduction regardless of rounding in u
        on_node = t == self.t[k + 1]
        return np.where(on_node, self.omega[k + 1], np.where(t == t0, self.omega[k], out))

    def to_csv(self, path) -> None:
        """Write ``t,omega,radius`` rows at 17 significant digits."""
        data = np.column_stack((self.t, self.omega, self.radius))
        with open(path, "w", newline="") as fh:
            np.savetxt(fh, data, fmt="%.17g", delimiter=",", newline="\n", header="t,omega,radius", comments="")


def sample(traj: Trajectory, t: float):
    """Return ``(omega(t), R(t))`` by dense interpolation."""
    omega = float(traj.omega_at(t))
    return omega, omega ** (1.0 / 3.0) / math.sqrt(traj.gamma)


def step_size(delays: DelayPair, t_end: float, steps_per_delay: int) -> float:
    if delays.tau3 > 0:
        return delays.tau3 / steps_per_delay
    if delays.tau > 0:
        # one delay is zero: it acts instantaneously, mesh follows the other
        return delays.tau / steps_per_delay
    return t_end / _ODE_STEPS


def integrate(
    params: ModelParams,
    delays: DelayPair,
    history: History,
    t_end: float,
    steps_per_delay: int = DEFAULT_STEPS_PER_DELAY,
) -> Trajectory:
    """Integrate the reduced equation on [0, t_end].

    The mesh has uniform step ``h = min(tau1, tau2) / steps_per_delay`` and the
    last node is the first one at or beyond ``t_end``. Integration stops early
    with ``Status.POSITIVITY_LOSS`` when the state or a delayed state reaches 0.
    """
    if isinstance(steps_per_delay, bool) or int(steps_per_delay) != steps_per_delay or steps_per_delay < 4:
        raise InvalidStepCount(f"steps_per_delay must be an integer >= 4, got {steps_per_delay!r}")
    if not (math.isfinite(t_end) and t_end > 0):
        raise ValueError(f"t_end must be finite and > 0, got {t_end!r}")
    steps_per_delay = int(steps_per_delay)
    h = step_size(delays, t_end, steps_per_delay)
    n_steps = int(math.ceil(t_end / h - 1e-9))
    ht, hw, hd = _tabulate_history(history, delays.tau, h)
    der = derive_params(params)
    alpha, sqrt_gamma, dirichlet = params.kernel_args()
    w, d, n, failed, t_fail = _integrate_kernel(
        der.a, der.lam, alpha, sqrt_gamma, dirichlet,
        float(delays.tau1), float(delays.tau2), h, n_steps, ht, hw, hd,
    )
    return Trajectory(
        t=np.arange(n) * h,
        omega=w[:n].copy(),
        domega=d[:n].copy(),
        step=h,
        status=Status.POSITIVITY_LOSS if failed else Status.COMPLETED,
        delays=delays,
        gamma=params.gamma,
        t_end=float(t_end),
        t_fail=float(t_fail) if failed else None,
        history=history,
    )


def convergence_order(
    params: ModelParams,
    delays: DelayPair,
    history: History,
    t_probe: float,
    steps: Sequence[int] = (32, 64, 128),
) -> Optional[float]:
    """Observed order from three step counts, each doubling the previous.

    Returns None when the solution does not change under refinement (e.g. an
    equilibrium history), where an order is meaningless.
    """
    if len(steps) != 3 or steps[1] != 2 * steps[0] or steps[2] != 2 * steps[1]:
        raise InvalidStepCount("steps must be three successive doublings")
    vals = []
    for n in steps:
        tr = integrate(params, delays, history, t_probe, n)
        if not tr.completed or tr.t_last < t_probe:
            raise TimeOutOfRange("trajectory did not reach t_probe")
        vals.append(float(tr.omega_at(t_probe)))
    e1 = abs(vals[0] - vals[1])
    e2 = abs(vals[1] - vals[2])
    scale = max(abs(v) for v in vals)
    if e2 <= 1e-14 * scale or e1 <= 1e-14 * scale:
        return None
    return math.log2(e1 / e2)
