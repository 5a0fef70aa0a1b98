"""Experiment harness: single simulation runs and the (alpha, tau1) sweep.

Sweep cells are computed independently and addressed by their (row, column)
index, so a parallel run assembles exactly the same files as a serial one.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Dict, Optional, Tuple

from tumorhopf.config import BoundFraction, ExperimentConfig, SweepSpec
from tumorhopf.equilibria import (
    find_positive_stationary,
    linearize_positive,
    tau1_admissible_bound,
)
from tumorhopf.errors import BracketInvalid, TumorModelError
from tumorhopf.hopf import (
    CHAR_RESIDUAL_TOL,
    ClassifierSettings,
    SimulationSettings,
    classify_trajectory,
    critical_delay,
    critical_delay_by_simulation,
    positivity_loss_delay,
)
from tumorhopf.integrator import ConstantHistory, integrate
from tumorhopf.model import INFINITE, ModelParams, format_alpha
from tumorhopf.svg import emit_plot

REFERENCE_ALPHAS = (0.2, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 1000, INFINITE)
REFERENCE_TAU1 = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2)
CANONICAL_PARAMS = ModelParams(gamma=1.0, mu=1.0, sigma_tilde=2.0, sigma_inf=3.3, alpha=0.2)
CANONICAL_BOUND_FRACTION = 0.025
CANONICAL_OMEGA0 = 0.01
# tau2 values of the five illustrated regimes for the canonical parameters
REGIME_TAU2 = {
    "monotone": 0.0394,
    "damped": 0.5014,
    "damped-late": 0.5374,
    "near-hopf": 0.5554,
    "positivity-loss": 0.5614,
}

_BOUND_SLACK = 1e-12
_SIM_BRACKETS = ((0.8, 1.2), (0.5, 2.0))


def canonical_config(tau2: float, **overrides) -> ExperimentConfig:
    """Canonical parameter set with tau1 at 2.5% of its admissible bound."""
    kw = dict(
        params=CANONICAL_PARAMS,
        tau1=BoundFraction(CANONICAL_BOUND_FRACTION),
        tau2=tau2,
        history=ConstantHistory(CANONICAL_OMEGA0),
    )
    kw.update(overrides)
    return ExperimentConfig(**kw)


def reference_sweep_spec(method: str = "char", **overrides) -> SweepSpec:
    kw = dict(omega0=CANONICAL_OMEGA0)
    kw.update(overrides)
    return SweepSpec(CANONICAL_PARAMS, REFERENCE_ALPHAS, REFERENCE_TAU1, method, **kw)


def format_cell(value: float) -> str:
    """Four decimals, ties to even on the shortest decimal representation."""
    return str(Decimal(repr(value)).quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))


# ---------------------------------------------------------------- sweep cells


@dataclass(frozen=True)
class CellResult:
    """Outcome of one (tau1, alpha) cell.

    ``value`` is the primary estimate (characteristic equation for methods
    ``char`` and ``both``); ``sim_value`` is filled for ``sim`` and ``both``.
    A failed estimate carries its reason instead, rendered as ``NA(reason)``.
    """

    value: Optional[float] = None
    reason: Optional[str] = None
    residual: Optional[float] = None
    sim_value: Optional[float] = None
    sim_reason: Optional[str] = None

    def text(self, full: bool = False, sim: bool = False) -> str:
        v, r = (self.sim_value, self.sim_reason) if sim else (self.value, self.reason)
        if v is None:
            return f"NA({r})"
        return f"{v:.17g}" if full else format_cell(v)


def _settings(spec: SweepSpec) -> SimulationSettings:
    return SimulationSettings(
        omega0=spec.omega0, t_end=spec.t_end, steps_per_delay=spec.steps_per_delay, classifier=ClassifierSettings()
    )


def _simulated(params, tau1, guess, spec):
    settings = _settings(spec)
    last = None
    for lo_f, hi_f in _SIM_BRACKETS:
        try:
            return critical_delay_by_simulation(
                params, tau1, (lo_f * guess, hi_f * guess), settings, width=spec.sim_width
            )
        except BracketInvalid as exc:
            last = exc
    raise last


def compute_cell(spec: SweepSpec, i: int, j: int) -> CellResult:
    """Evaluate row ``i`` (tau1) and column ``j`` (alpha) of the sweep."""
    tau1 = spec.tau1_list[i]
    params = spec.params.with_alpha(spec.alpha_list[j])
    state = find_positive_stationary(params)
    if state is None:
        return CellResult(reason="NoPositiveEquilibrium", sim_reason="NoPositiveEquilibrium")
    try:
        coeffs = linearize_positive(params, state)
        if tau1 > tau1_admissible_bound(coeffs) * (1 + _BOUND_SLACK):
            return CellResult(reason="Tau1OutOfRange", sim_reason="Tau1OutOfRange")
        hopf = critical_delay(coeffs, tau1)
    except TumorModelError as exc:
        name = type(exc).__name__
        return CellResult(reason=name, sim_reason=name)
    if spec.method == "char":
        return CellResult(value=hopf.tau2_star, residual=hopf.residual)
    try:
        if spec.method == "positivity":
            est = positivity_loss_delay(
                params, tau1, _settings(spec), guess=hopf.tau2_star, width=spec.positivity_width
            )
        else:
            est = _simulated(params, tau1, hopf.tau2_star, spec)
        est_reason = None
    except TumorModelError as exc:
        est, est_reason = None, type(exc).__name__
    if spec.method == "both":
        return CellResult(hopf.tau2_star, None, hopf.residual, est, est_reason)
    return CellResult(value=est, reason=est_reason, residual=hopf.residual)


def _cell_job(args):
    spec, i, j = args
    return (i, j), compute_cell(spec, i, j)


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: Dict[Tuple[int, int], CellResult]
    paths: Dict[str, Path] = field(default_factory=dict)

    def value(self, tau1_index: int, alpha_index: int) -> Optional[float]:
        return self.cells[(tau1_index, alpha_index)].value

    def column(self, alpha_index: int):
        return [self.cells[(i, alpha_index)].value for i in range(len(self.spec.tau1_list))]


def compute_sweep(spec: SweepSpec, jobs: int = 1) -> Dict[Tuple[int, int], CellResult]:
    keys = [(i, j) for i in range(len(spec.tau1_list)) for j in range(len(spec.alpha_list))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return dict(pool.map(_cell_job, [(spec, i, j) for i, j in keys]))
    return {k: compute_cell(spec, *k) for k in keys}


def _write_matrix(path, spec, cells, full, sim=False):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau1\\alpha"] + [format_alpha(a) for a in spec.alpha_list])
        for i, tau1 in enumerate(spec.tau1_list):
            w.writerow([repr(tau1)] + [cells[(i, j)].text(full, sim) for j in range(len(spec.alpha_list))])


def run_sweep(spec: SweepSpec, out_dir, name: str = "sweep", jobs: int = 1) -> SweepResult:
    """Compute every cell and write ``<name>.csv``, ``<name>.full.csv`` and
    ``<name>.meta.json`` (plus ``<name>.sim.csv`` for method ``both``).

    Files are always produced; failed cells appear as ``NA(reason)``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = compute_sweep(spec, jobs)
    paths = {"table": out / f"{name}.csv", "full": out / f"{name}.full.csv", "meta": out / f"{name}.meta.json"}
    _write_matrix(paths["table"], spec, cells, full=False)
    _write_matrix(paths["full"], spec, cells, full=True)
    if spec.method == "both":
        paths["sim"] = out / f"{name}.sim.csv"
        _write_matrix(paths["sim"], spec, cells, full=False, sim=True)
    residuals = [c.residual for c in cells.values() if c.residual is not None]
    meta = {
        "spec": spec.to_dict(),
        "tolerances": {
            "characteristic_residual": CHAR_RESIDUAL_TOL,
            "simulation_width": spec.sim_width,
            "positivity_width": spec.positivity_width,
        },
        "max_characteristic_residual": max(residuals) if residuals else None,
        "cells": [
            {
                "tau1": spec.tau1_list[i],
                "alpha": format_alpha(spec.alpha_list[j]),
                "value": c.value,
                "reason": c.reason,
                "residual": c.residual,
                "sim_value": c.sim_value,
                "sim_reason": c.sim_reason,
            }
            for (i, j), c in sorted(cells.items())
        ],
    }
    paths["meta"].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return SweepResult(spec, cells, paths)


def failed_cells(result: SweepResult):
    return sorted(k for k, c in result.cells.items() if c.value is None)


# ---------------------------------------------------------------- single runs


def run_simulation(config: ExperimentConfig, out_dir, stem: str = "run") -> dict:
    """Integrate one configuration and write the requested outputs.

    Returns the classification record. Numerical failures do not raise: they
    are stored under ``"error"`` in the record (and its JSON file).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = config.params
    record = {
        "class": None,
        "envelope_rate": None,
        "n_peaks": None,
        "omega_s": None,
        "tau2_star_reference": None,
        "tau1": None,
        "tau2": config.tau2,
        "status": None,
        "t_fail": None,
        "error": None,
    }
    try:
        state = find_positive_stationary(params)
        record["omega_s"] = None if state is None else state.omega_s
        tau1 = config.resolved_tau1()
        record["tau1"] = tau1
        if state is not None:
            try:
                record["tau2_star_reference"] = critical_delay(linearize_positive(params, state), tau1).tau2_star
            except TumorModelError:
                pass
        traj = integrate(params, config.delays(), config.history, config.t_end, config.steps_per_delay)
        record["status"] = traj.status.value
        record["t_fail"] = traj.t_fail
        if "trajectory" in config.outputs:
            traj.to_csv(out / f"{stem}.csv")
        if "plot" in config.outputs:
            svg = emit_plot(traj, None if state is None else state.omega_s, show_radius=True)
            (out / f"{stem}.svg").write_text(svg)
        if state is not None:
            cls = classify_trajectory(traj, state.omega_s)
            record.update(
                {"class": cls.kind.value, "envelope_rate": cls.envelope_rate, "n_peaks": cls.n_peaks}
            )
    except TumorModelError as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
    if "classification" in config.outputs:
        (out / f"{stem}.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return record


def default_jobs() -> int:
    return max(1, min(os.cpu_count() or 1, 8))
