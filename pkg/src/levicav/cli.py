"""
Command-line front end.

One verb per artifact family: `derive` (parameter audit), `evolve` (single
trajectories), `steady` (stationary-state report), `sweep` (occupation,
coupling, or particle-number grids), `wigner` (squeezing snapshot), and
`design-map` (radius/power landscape). Exit code 0 means the run finished
and every post-run check passed, 2 means the run finished but a check
failed, 1 means the inputs were unusable.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .audit import write_reports
from .config import ConfigError, SystemConfig, load_bundled, load_config
from .experiments import (
    DEFAULT_DT,
    DEFAULT_T_FINAL,
    ScenarioResult,
    ScenarioSpec,
    run_coupling_sweep,
    run_design_map,
    run_open_dynamics,
    run_particle_number_sweep,
    run_squeezing_snapshot,
    run_steady_report,
    run_temperature_sweep,
    run_unitary_demo,
)

_BUNDLED = ("design", "experiment")


def _load(name_or_path: str) -> SystemConfig:
    path = Path(name_or_path)
    if path.exists():
        return load_config(path)
    if name_or_path in _BUNDLED:
        return load_bundled(name_or_path)
    raise ConfigError(
        f"config {name_or_path!r} is neither a file nor a bundled name "
        f"(bundled: {', '.join(_BUNDLED)})"
    )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        default="design",
        help="path to a configuration JSON, or a bundled name "
        f"({', '.join(_BUNDLED)}); default: design",
    )
    parser.add_argument(
        "--out", type=Path, default=Path("out"), help="output directory (default: ./out)"
    )
    parser.add_argument(
        "--dt", type=float, default=DEFAULT_DT, help="step size in seconds (default: 1e-9)"
    )
    parser.add_argument(
        "--t-final",
        type=float,
        default=DEFAULT_T_FINAL,
        help="propagation horizon in seconds (default: 2e-5)",
    )
    parser.add_argument(
        "--workers", type=int, default=1, help="parallel sweep workers (default: 1)"
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="reserved for future stochastic features; all current runs are deterministic",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levicav",
        description="Gaussian dynamics of tweezer-levitated particles coupled to a cavity.",
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    derive = verbs.add_parser("derive", help="derived quantities and parameter audit")
    _add_common(derive)

    evolve = verbs.add_parser("evolve", help="propagate one scenario and its measures")
    _add_common(evolve)
    evolve.add_argument(
        "--unitary",
        action="store_true",
        help="force zero cavity linewidth and gas pressure, ground-state start",
    )

    steady = verbs.add_parser("steady", help="stationary covariance and its report")
    _add_common(steady)

    sweep = verbs.add_parser("sweep", help="grid runs reduced to summary tables")
    _add_common(sweep)
    sweep.add_argument(
        "--kind",
        required=True,
        choices=("occupation", "coupling", "particles"),
        help="sweep axis family",
    )

    wigner = verbs.add_parser("wigner", help="squeezing history and phase-space snapshot")
    _add_common(wigner)

    design = verbs.add_parser("design-map", help="coupling/coherence landscape over R and P")
    _add_common(design)
    design.add_argument(
        "--target-khz",
        type=float,
        default=None,
        help="pin the trap frequency to this value (cyclic kHz); "
        "default: the configured system's own frequency",
    )

    return parser


def _announce(result: ScenarioResult) -> None:
    for check in result.checks:
        status = "ok  " if check.passed else "FAIL"
        print(f"[{status}] {check.name}: {check.detail}")
    for path in result.artifacts:
        print(f"wrote {path}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load(args.config)
        if args.verb == "derive":
            for path in write_reports(config, args.out):
                print(f"wrote {path}")
            return 0

        spec = ScenarioSpec(
            config=config,
            out_dir=args.out,
            t_final=args.t_final,
            dt=args.dt,
            workers=args.workers,
        )
        if args.verb == "evolve":
            runner = run_unitary_demo if args.unitary else run_open_dynamics
            result = runner(spec)
        elif args.verb == "steady":
            result = run_steady_report(spec)
        elif args.verb == "sweep":
            if args.kind == "occupation":
                result = run_temperature_sweep(spec)
            elif args.kind == "coupling":
                result = run_coupling_sweep(spec)
            else:
                result = run_particle_number_sweep(spec)
        elif args.verb == "wigner":
            result = run_squeezing_snapshot(spec)
        else:
            target = (
                None
                if args.target_khz is None
                else 2.0 * math.pi * 1e3 * args.target_khz
            )
            result = run_design_map(spec, target_omega=target)
    except (ConfigError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    _announce(result)
    return 0 if result.passed else 2


if __name__ == "__main__":
    sys.exit(main())
