"""Command-line entry point.

Exit codes: 0 success, 2 invalid configuration, 3 infeasible scenario or
placement, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .estimation import InfeasibleScheduleError
from .phase_opt import build_quadratic, riemannian_ascent
from .placement import (PlacementExhaustedError, build_angle_grid,
                        validate_placement)
from .simulation import (ConfigError, InfeasibleScenarioError, emit_results,
                         make_config, run_experiment)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="key = value configuration file")
    shared.add_argument("--seed", type=int, help="master seed override")
    shared.add_argument("--trials", type=int, help="Monte Carlo trials override")
    shared.add_argument("--out", help="output file path")
    shared.add_argument("--set", dest="assignments", action="append", default=[],
                        metavar="KEY=VALUE", help="override any config field")

    parser = argparse.ArgumentParser(
        prog="rismimo",
        description="Surface-aided intra-cell pilot reuse simulator")
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", parents=[shared],
                                  help="run an experiment preset")
    run_cmd.add_argument("preset", help="fig3 fig4 fig6 fig7 fig8 fig9 fig10")
    run_cmd.add_argument("--format", choices=("csv", "json-lines"),
                         default="csv")

    commands.add_parser("grid", parents=[shared],
                        help="emit the deployment angle grid as CSV")

    opt_cmd = commands.add_parser("optimize-phases", parents=[shared],
                                  help="maximize the phase-profile objective "
                                       "for a saved channel")
    opt_cmd.add_argument("--channel", required=True,
                         help=".npz file with arrays 'bs_ris' (MxN complex) "
                              "and 'kernel' (NxN)")
    opt_cmd.add_argument("--trace", help="write the objective trace as CSV")

    val_cmd = commands.add_parser("validate-placement", parents=[shared],
                                  help="check proposed azimuths for conflicts")
    val_cmd.add_argument("file", help="text file, one azimuth in radians per line")
    return parser


def _resolve_config(args):
    overrides = {}
    for item in args.assignments:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        from .simulation import _coerce_value  # shares the file parser rules
        overrides[key.strip()] = _coerce_value(key.strip(), value)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    return make_config(args.config, overrides)


def _cmd_run(args, config):
    result = run_experiment(config, args.preset)
    out = args.out or f"{args.preset}.{'csv' if args.format == 'csv' else 'jsonl'}"
    emit_results(result, args.format, out)
    print(f"wrote {len(result.rows)} rows to {out} "
          f"({result.runtime_s:.1f} s, config {result.config_hash})")
    return EXIT_OK


def _cmd_grid(args, config):
    grid = build_angle_grid(config.bs_antennas, config.bs_spacing_m,
                            config.wavelength)
    lines = ["angle_rad,sin_value"]
    lines += [f"{float(angle)!r},{float(np.sin(angle))!r}"
              for angle in grid.angles]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        print(f"wrote {len(grid.angles)} grid angles to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_optimize_phases(args, config):
    data = np.load(args.channel)
    if "bs_ris" not in data or "kernel" not in data:
        raise ConfigError(f"{args.channel} must contain 'bs_ris' and 'kernel'")
    form = build_quadratic(data["bs_ris"], data["kernel"])
    report = riemannian_ascent(form, max_iter=config.opt_max_iter,
                               grad_tol=config.opt_grad_tol)
    out = args.out or "phases.csv"
    with open(out, "w", encoding="utf-8") as handle:
        handle.write("element,phase_rad\n")
        for idx, value in enumerate(np.angle(report.phases)):
            handle.write(f"{idx},{float(value)!r}\n")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as handle:
            handle.write("iteration,objective\n")
            for idx, value in enumerate(report.objective_trace):
                handle.write(f"{idx},{float(value)!r}\n")
    print(f"objective {report.objective:.6e} after {report.iterations} "
          f"iterations (converged: {report.converged}); phases in {out}")
    return EXIT_OK


def _cmd_validate_placement(args, config):
    angles = []
    with open(args.file, "r", encoding="utf-8") as handle:
        for line in handle:
            stripped = line.split("#", 1)[0].strip()
            if stripped:
                angles.append(float(stripped))
    report = validate_placement(angles, config.bs_antennas,
                                config.bs_spacing_m, config.wavelength)
    if not report:
        print(f"{len(angles)} azimuths, no conflicts")
        return EXIT_OK
    for violation in report:
        print(f"angles {violation.first} and {violation.second}: "
              f"{violation.rule} ({violation.detail})")
    return EXIT_INFEASIBLE


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handlers = {"run": _cmd_run, "grid": _cmd_grid,
                "optimize-phases": _cmd_optimize_phases,
                "validate-placement": _cmd_validate_placement}
    try:
        return handlers[args.command](args, config)
    except (InfeasibleScenarioError, InfeasibleScheduleError,
            PlacementExhaustedError) as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
