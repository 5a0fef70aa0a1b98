"""Command line front end.

Subcommands::

    tumorhopf simulate --config run.json --out results/
    tumorhopf classify --config run.json
    tumorhopf hopf     --config run.json
    tumorhopf sweep    [--config sweep.json] --out results/ --method char

Exit codes: 0 success, 1 configuration error, 2 numerical failure (recorded
in the outputs).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from tumorhopf.config import METHODS, ConfigParseError, ExperimentConfig, SweepSpec
from tumorhopf.equilibria import find_positive_stationary, linearize_positive, tau1_admissible_bound
from tumorhopf.errors import TumorModelError
from tumorhopf.hopf import critical_delay
from tumorhopf.sweep import canonical_config, reference_sweep_spec, run_simulation, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def _experiment(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else canonical_config(0.5014)
    changes = {}
    if getattr(args, "t_end", None) is not None:
        changes["t_end"] = args.t_end
    if getattr(args, "steps_per_delay", None) is not None:
        changes["steps_per_delay"] = args.steps_per_delay
    if getattr(args, "tau2", None) is not None:
        changes["tau2"] = args.tau2
    return replace(cfg, **changes) if changes else cfg


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_simulate(args) -> int:
    cfg = _experiment(args)
    record = run_simulation(cfg, args.out, args.stem)
    _emit(record)
    return EXIT_NUMERICAL if record["error"] else EXIT_OK


def cmd_classify(args) -> int:
    cfg = replace(_experiment(args), outputs=("classification",))
    record = run_simulation(cfg, args.out, args.stem) if args.out else _classify_only(cfg)
    _emit(record)
    return EXIT_NUMERICAL if record["error"] else EXIT_OK


def _classify_only(cfg):
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        return run_simulation(cfg, tmp, "classify")


def cmd_hopf(args) -> int:
    cfg = _experiment(args)
    params = cfg.params
    state = find_positive_stationary(params)
    if state is None:
        _emit({"error": "NoPositiveEquilibrium: sigma_inf <= sigma_tilde"})
        return EXIT_NUMERICAL
    try:
        coeffs = linearize_positive(params, state)
        bound = tau1_admissible_bound(coeffs)
        tau1 = cfg.resolved_tau1()
        hopf = critical_delay(coeffs, tau1)
    except TumorModelError as exc:
        _emit({"omega_s": state.omega_s, "error": f"{type(exc).__name__}: {exc}"})
        return EXIT_NUMERICAL
    _emit(
        {
            "omega_s": state.omega_s,
            "radius_s": state.radius_s,
            "A1": coeffs.b1,
            "A2": coeffs.b2,
            "tau1_bound": bound,
            "tau1": tau1,
            "tau2_star": hopf.tau2_star,
            "omega_c": hopf.omega_c,
            "residual": hopf.residual,
        }
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.config:
        spec = SweepSpec.load(args.config)
        if args.method:
            spec = replace(spec, method=args.method)
    else:
        spec = reference_sweep_spec(args.method or "char")
    changes = {}
    if args.t_end is not None:
        changes["t_end"] = args.t_end
    if args.steps_per_delay is not None:
        changes["steps_per_delay"] = args.steps_per_delay
    if changes:
        spec = replace(spec, **changes)
    result = run_sweep(spec, args.out, args.name, args.jobs)
    n_fail = sum(c.value is None for c in result.cells.values())
    print(f"wrote {result.paths['table']} ({len(result.cells)} cells, {n_fail} NA)")
    return EXIT_NUMERICAL if n_fail else EXIT_OK


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tumorhopf", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required):
        p.add_argument("--config", type=Path, help="JSON configuration file (default: canonical parameters)")
        p.add_argument("--out", type=Path, required=out_required, help="output directory")
        p.add_argument("--steps-per-delay", type=_positive_int, dest="steps_per_delay")
        p.add_argument("--t-end", type=float, dest="t_end")

    p = sub.add_parser("simulate", help="integrate one configuration and write CSV, SVG and JSON")
    common(p, True)
    p.add_argument("--tau2", type=float, help="override tau2 from the config")
    p.add_argument("--stem", default="run", help="output file stem")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="integrate and print the oscillation class")
    common(p, False)
    p.add_argument("--tau2", type=float)
    p.add_argument("--stem", default="classify")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("hopf", help="stationary state, linearization and critical delay")
    common(p, False)
    p.set_defaults(func=cmd_hopf)

    p = sub.add_parser("sweep", help="critical delay table over (alpha, tau1)")
    common(p, True)
    p.add_argument("--method", choices=METHODS, default=None)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--name", default="sweep", help="output file stem")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TumorModelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
