"""JSON experiment and sweep configurations.

Experiment config keys::

    {"gamma": 1, "mu": 1, "sigma_tilde": 2, "sigma_inf": 3.3, "alpha": 0.2 | "inf",
     "tau1": 0.04 | {"bound_fraction": 0.025}, "tau2": 0.5,
     "omega0": 0.01 | {"samples": [[t, v], ...]},
     "t_end": 400, "steps_per_delay": 64,
     "outputs": ["trajectory", "plot", "classification"]}

Sweep config keys: the four physical constants, ``alpha_list``, ``tau1_list``,
``method`` and optionally ``omega0``, ``t_end``, ``steps_per_delay``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Tuple, Union

from tumorhopf.errors import ConfigParseError, TumorModelError
from tumorhopf.hopf import bound_fraction_tau1
from tumorhopf.integrator import (
    DEFAULT_STEPS_PER_DELAY,
    ConstantHistory,
    DelayPair,
    SampledHistory,
)
from tumorhopf.model import INFINITE, ModelParams, parse_alpha

OUTPUT_KINDS = ("trajectory", "plot", "classification")
METHODS = ("char", "sim", "both", "positivity")

_PARAM_KEYS = ("gamma", "mu", "sigma_tilde", "sigma_inf")


@dataclass(frozen=True)
class BoundFraction:
    """tau1 given as a fraction of its admissible upper bound."""

    fraction: float


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    tau1: Union[float, BoundFraction]
    tau2: float
    history: Union[ConstantHistory, SampledHistory]
    t_end: float = 400.0
    steps_per_delay: int = DEFAULT_STEPS_PER_DELAY
    outputs: Tuple[str, ...] = OUTPUT_KINDS

    def resolved_tau1(self) -> float:
        if isinstance(self.tau1, BoundFraction):
            return bound_fraction_tau1(self.params, self.tau1.fraction)
        return self.tau1

    def delays(self) -> DelayPair:
        return DelayPair(self.resolved_tau1(), self.tau2)

    def to_dict(self) -> dict:
        d = _params_to_dict(self.params)
        d["alpha"] = _alpha_to_json(self.params.alpha)
        d["tau1"] = {"bound_fraction": self.tau1.fraction} if isinstance(self.tau1, BoundFraction) else self.tau1
        d["tau2"] = self.tau2
        if isinstance(self.history, SampledHistory):
            d["omega0"] = {"samples": self.history.samples.tolist()}
        else:
            d["omega0"] = self.history.omega0
        d["t_end"] = self.t_end
        d["steps_per_delay"] = self.steps_per_delay
        d["outputs"] = list(self.outputs)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        _reject_unknown(d, _PARAM_KEYS + ("alpha", "tau1", "tau2", "omega0", "t_end", "steps_per_delay", "outputs"))
        params = _params_from_dict(d)
        tau1 = _field(d, "tau1")
        if isinstance(tau1, dict):
            _reject_unknown(tau1, ("bound_fraction",), where="tau1")
            tau1 = BoundFraction(_positive(tau1, "bound_fraction", where="tau1."))
        else:
            tau1 = float(_nonneg(d, "tau1"))
        tau2 = float(_nonneg(d, "tau2"))
        history = _history_from(d)
        t_end = float(_positive(d, "t_end")) if "t_end" in d else 400.0
        steps = d.get("steps_per_delay", DEFAULT_STEPS_PER_DELAY)
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 4:
            raise ConfigParseError(f"field 'steps_per_delay': expected an integer >= 4, got {steps!r}")
        outputs = d.get("outputs", list(OUTPUT_KINDS))
        if not isinstance(outputs, list) or any(o not in OUTPUT_KINDS for o in outputs):
            raise ConfigParseError(f"field 'outputs': expected a list drawn from {OUTPUT_KINDS}, got {outputs!r}")
        return cls(params, tau1, tau2, history, t_end, steps, tuple(outputs))

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(_load_json(text))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.loads(fh.read())


@dataclass(frozen=True)
class SweepSpec:
    params: ModelParams
    alpha_list: Tuple = ()
    tau1_list: Tuple[float, ...] = ()
    method: str = "char"
    omega0: float = 0.01
    t_end: float = 400.0
    steps_per_delay: int = DEFAULT_STEPS_PER_DELAY
    sim_width: float = 1e-3
    positivity_width: float = 2e-5

    def __post_init__(self):
        if not self.alpha_list or not self.tau1_list:
            raise ConfigParseError("alpha_list and tau1_list must be non-empty")
        if self.method not in METHODS:
            raise ConfigParseError(f"field 'method': expected one of {METHODS}, got {self.method!r}")
        object.__setattr__(self, "alpha_list", tuple(parse_alpha(a) for a in self.alpha_list))
        object.__setattr__(self, "tau1_list", tuple(float(t) for t in self.tau1_list))

    def to_dict(self) -> dict:
        d = _params_to_dict(self.params)
        d.update(
            alpha_list=[_alpha_to_json(a) for a in self.alpha_list],
            tau1_list=list(self.tau1_list),
            method=self.method,
            omega0=self.omega0,
            t_end=self.t_end,
            steps_per_delay=self.steps_per_delay,
        )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        _reject_unknown(d, _PARAM_KEYS + ("alpha_list", "tau1_list", "method", "omega0", "t_end", "steps_per_delay"))
        base = {k: _positive(d, k) for k in _PARAM_KEYS}
        params = _build_params(base, INFINITE)
        alphas = _field(d, "alpha_list")
        taus = _field(d, "tau1_list")
        if not isinstance(alphas, list) or not alphas:
            raise ConfigParseError("field 'alpha_list': expected a non-empty list")
        if not isinstance(taus, list) or not taus:
            raise ConfigParseError("field 'tau1_list': expected a non-empty list")
        try:
            alphas = [parse_alpha(a) for a in alphas]
        except (TypeError, ValueError) as exc:
            raise ConfigParseError(f"field 'alpha_list': {exc}") from None
        if any(not (isinstance(t, (int, float)) and not isinstance(t, bool) and t > 0) for t in taus):
            raise ConfigParseError("field 'tau1_list': entries must be positive numbers")
        kw = {}
        if "omega0" in d:
            kw["omega0"] = _positive(d, "omega0")
        if "t_end" in d:
            kw["t_end"] = _positive(d, "t_end")
        if "steps_per_delay" in d:
            kw["steps_per_delay"] = int(_positive(d, "steps_per_delay"))
        return cls(params, tuple(alphas), tuple(taus), d.get("method", "char"), **kw)

    @classmethod
    def loads(cls, text: str) -> "SweepSpec":
        return cls.from_dict(_load_json(text))

    @classmethod
    def load(cls, path) -> "SweepSpec":
        with open(path) as fh:
            return cls.loads(fh.read())


# ---------------------------------------------------------------- helpers


def _load_json(text):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(d, dict):
        raise ConfigParseError("top level must be a JSON object")
    return d


def _reject_unknown(d, allowed, where=""):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigParseError(f"unknown field(s) {where + ': ' if where else ''}{', '.join(extra)}")


def _field(d, key, where=""):
    if key not in d:
        raise ConfigParseError(f"missing field '{where}{key}'")
    return d[key]


def _number(d, key, where=""):
    v = _field(d, key, where)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigParseError(f"field '{where}{key}': expected a finite number, got {v!r}")
    return v


def _positive(d, key, where=""):
    v = _number(d, key, where)
    if not v > 0:
        raise ConfigParseError(f"field '{where}{key}': must be > 0, got {v!r}")
    return v


def _nonneg(d, key, where=""):
    v = _number(d, key, where)
    if v < 0:
        raise ConfigParseError(f"field '{where}{key}': must be >= 0, got {v!r}")
    return v


def _alpha_to_json(alpha):
    return "inf" if alpha is INFINITE else alpha


def _build_params(values, alpha):
    try:
        return ModelParams(alpha=alpha, **values)
    except TumorModelError as exc:
        raise ConfigParseError(str(exc)) from None


def _params_from_dict(d):
    values = {k: _positive(d, k) for k in _PARAM_KEYS}
    raw = _field(d, "alpha")
    if isinstance(raw, str):
        if raw.strip().lower() != "inf":
            raise ConfigParseError(f"field 'alpha': expected a number or \"inf\", got {raw!r}")
        alpha = INFINITE
    else:
        alpha = _number(d, "alpha")
    return _build_params(values, alpha)


def _params_to_dict(params: ModelParams) -> dict:
    return {k: getattr(params, k) for k in _PARAM_KEYS}


def _history_from(d):
    raw = _field(d, "omega0")
    try:
        if isinstance(raw, dict):
            _reject_unknown(raw, ("samples",), where="omega0")
            return SampledHistory(_field(raw, "samples", where="omega0."))
        v = _positive(d, "omega0")
        return ConstantHistory(float(v))
    except TumorModelError as exc:
        if isinstance(exc, ConfigParseError):
            raise
        raise ConfigParseError(f"field 'omega0': {exc}") from None

