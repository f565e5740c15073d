"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 integration failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .experiments import (
    SOLVERS,
    ConfigError,
    RunConfig,
    convergence_report,
    load_config,
    run_scenario,
    sweep_temperature,
)
from .integrate import METHODS, IntegrationError
from .model import FRAMES

EXIT_CONFIG, EXIT_INTEGRATION, EXIT_IO = 2, 3, 4

_SUBCOMMANDS = {
    "run": None,
    "fig1": "fig1",
    "fig2a": "fig2a",
    "fig2c": "fig2c",
    "fig3": "fig3",
    "sweep-temperature": "sweep_temperature",
    "convergence": "convergence",
}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--solver", choices=SOLVERS)
    common.add_argument("--truncation", type=int, help="Fock cutoff M per mode")
    common.add_argument("--t-final", type=float)
    common.add_argument("--samples", type=int, help="number of output samples")
    common.add_argument("--temperature", type=float, help="k_B T in units of omega0")
    common.add_argument("--frame", choices=FRAMES)
    common.add_argument("--method", choices=METHODS)
    common.add_argument("--temperatures", type=_floats, help="comma-separated sweep grid")
    common.add_argument("--truncations", type=_ints, help="comma-separated truncations")
    common.add_argument("--workers", type=int, default=1, help="parallel sweep runs")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pairloss", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    scenario = _SUBCOMMANDS[args.command]
    if scenario is not None:
        if cfg.scenario not in (None, "custom", scenario):
            raise ConfigError(f"config scenario {cfg.scenario!r} conflicts with '{args.command}'")
        cfg = replace(cfg, scenario=scenario)
    flags = {
        "output_path": args.out,
        "solver": args.solver,
        "truncation": args.truncation,
        "t_final": args.t_final,
        "sample_count": args.samples,
        "temperature": args.temperature,
        "frame": args.frame,
        "method": args.method,
        "temperatures": args.temperatures,
        "truncations": args.truncations,
    }
    cfg = replace(cfg, **{k: v for k, v in flags.items() if v is not None})
    if cfg.output_path is None:
        cfg = replace(cfg, output_path=f"runs/{cfg.scenario or 'custom'}")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = config_from_args(args)
        if cfg.scenario in ("fig3", "sweep_temperature"):
            rows = sweep_temperature(cfg, workers=args.workers)
            for r in rows:
                esd = "none" if r.esd_time is None else f"{r.esd_time:.6g}"
                print(f"T={r.temperature:g} esd_time={esd} negativity_at_t_final={r.negativity_at_t_final:.6g}")
        elif cfg.scenario == "convergence":
            for r in convergence_report(cfg):
                print(f"M {r.m_from}->{r.m_to}: negativity {r.sup_diff_negativity:.3g}, p00 {r.sup_diff_p00:.3g}")
        else:
            traj, extra = run_scenario(cfg)
            rec = traj.records[-1]
            print(
                f"t={rec.time:.6g} negativity={rec.negativity:.6g} p00={rec.p00:.6g} "
                f"trace_drift={extra['diag.max_trace_drift']:.3g}"
            )
        print(f"wrote {cfg.output_path}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
