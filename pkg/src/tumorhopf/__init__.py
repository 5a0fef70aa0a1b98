"""Two-delay tumor growth model with angiogenesis.

The free boundary problem reduces to a scalar delay equation for
omega = (sqrt(Gamma) R)^3. The package evaluates the reduced model, finds its
equilibria, integrates it, locates Hopf thresholds in the apoptosis delay and
runs parameter sweeps.
"""

from tumorhopf.config import BoundFraction, ExperimentConfig, SweepSpec
from tumorhopf.equilibria import (
    Equilibrium,
    LinearCoeffs,
    StationaryState,
    TrivialKind,
    TrivialRegime,
    classify_trivial,
    find_positive_stationary,
    linearize_positive,
    linearize_trivial,
    tau1_admissible_bound,
)
from tumorhopf.errors import TumorModelError
from tumorhopf.hopf import (
    ClassifierSettings,
    HopfResult,
    OscillationClass,
    OscillationKind,
    SimulationSettings,
    characteristic,
    classify_trajectory,
    critical_delay,
    critical_delay_by_simulation,
    crossing_frequency,
    hopf_for_params,
    positivity_loss_delay,
    simulate_and_classify,
    single_delay_threshold,
)
from tumorhopf.integrator import (
    ConstantHistory,
    DelayPair,
    FormulaHistory,
    SampledHistory,
    Status,
    Trajectory,
    convergence_order,
    history_from_radius,
    integrate,
    sample,
)
from tumorhopf.model import (
    INFINITE,
    DerivedParams,
    ModelParams,
    derive_params,
    dde_rhs,
    eval_basis,
    eval_l,
    eval_l_prime,
    eval_p_prime,
    nutrient_profile,
)
from tumorhopf.svg import emit_plot
from tumorhopf.sweep import run_simulation, run_sweep

__all__ = [
    "BoundFraction",
    "ClassifierSettings",
    "ConstantHistory",
    "DelayPair",
    "DerivedParams",
    "Equilibrium",
    "ExperimentConfig",
    "FormulaHistory",
    "HopfResult",
    "INFINITE",
    "LinearCoeffs",
    "ModelParams",
    "OscillationClass",
    "OscillationKind",
    "SampledHistory",
    "SimulationSettings",
    "StationaryState",
    "Status",
    "SweepSpec",
    "Trajectory",
    "TrivialKind",
    "TrivialRegime",
    "TumorModelError",
    "characteristic",
    "classify_trajectory",
    "classify_trivial",
    "convergence_order",
    "critical_delay",
    "critical_delay_by_simulation",
    "crossing_frequency",
    "dde_rhs",
    "derive_params",
    "emit_plot",
    "eval_basis",
    "eval_l",
    "eval_l_prime",
    "eval_p_prime",
    "find_positive_stationary",
    "history_from_radius",
    "hopf_for_params",
    "integrate",
    "linearize_positive",
    "linearize_trivial",
    "nutrient_profile",
    "positivity_loss_delay",
    "run_simulation",
    "run_sweep",
    "sample",
    "simulate_and_classify",
    "single_delay_threshold",
    "tau1_admissible_bound",
]

__version__ = "0.1.0"
