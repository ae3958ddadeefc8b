"""Command-line interface.

Subcommands: simulate, sweep, minimize, verify, scenarios. All state
flows through flags and config files; nothing is read from the
environment. Exit codes: 0 success, 2 config error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphereflock",
        description="Simulate second-order flocking dynamics on the unit sphere.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario or config file")
    _add_config_source(sim)
    _add_overrides(sim)
    sim.add_argument("--out", type=Path, default=None, help="output directory")

    swp = sub.add_parser("sweep", help="run a scenario across parameter values")
    _add_config_source(swp)
    _add_overrides(swp)
    swp.add_argument("--param", required=True, help="dotted config path, e.g. sigma.sigma_r")
    swp.add_argument("--values", required=True, help="comma-separated values")
    swp.add_argument("--out", type=Path, default=None)
    swp.add_argument("--jobs", type=int, default=1, help="parallel workers")

    mini = sub.add_parser("minimize", help="estimate the configuration-energy minimum")
    mini.add_argument("--n", type=int, required=True)
    mini.add_argument("--sigma-a", type=float, required=True)
    mini.add_argument("--sigma-r", type=float, required=True)
    mini.add_argument("--beta", type=float, default=1.0)
    mini.add_argument("--restarts", type=int, default=16)
    mini.add_argument("--seed", type=int, default=0)

    ver = sub.add_parser("verify", help="run the invariant suite")
    ver.add_argument("--battery", choices=["regimes"], default=None,
                     help="also run the regime battery")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out", type=Path, default=None, help="write the JSON report here")

    sub.add_parser("scenarios", help="list scenario names")
    return parser


def _add_config_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="scenario name from the registry")
    src.add_argument("--config", type=Path, help="run-config JSON file")


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--seed", type=int, default=None, help="initial-data seed")
    p.add_argument("--projection", choices=["none", "renormalize"], default=None)


def _load_config(args):
    from .config import RunConfig
    from .scenarios import scenario

    if args.scenario:
        cfg = scenario(args.scenario)
        if isinstance(cfg, dict):
            from .errors import ConfigError

            raise ConfigError(
                f"{args.scenario!r} is a family; pick a member or use sweep"
            )
    else:
        cfg = RunConfig.from_dict(json.loads(args.config.read_text()))
    return _apply_overrides(cfg, args)


def _apply_overrides(cfg, args):
    integ = cfg.integrator
    if args.dt is not None:
        integ = replace(integ, dt=args.dt)
    if getattr(args, "t_final", None) is not None:
        integ = replace(integ, t_final=args.t_final)
    if args.projection is not None:
        integ = replace(integ, projection=args.projection)
    cfg = replace(cfg, integrator=integ)
    if args.seed is not None:
        cfg = replace(cfg, initial=replace(cfg.initial, seed=args.seed))
    return cfg


def _cmd_simulate(args) -> int:
    from .diagnostics import classify
    from .errors import InsufficientDataError
    from .runner import run

    cfg = _load_config(args)
    log = run(cfg, args.out)
    final = log.records[-1]
    print(f"run {cfg.label or cfg.model}: {log.n_snapshots} snapshots, "
          f"t in [0, {log.times[-1]:g}]")
    print(f"  final: max_diameter={final.max_diameter:.6g} "
          f"centroid_norm={final.centroid_norm:.6g} "
          f"rho={'undefined' if final.rho is None else f'{final.rho:.6g}'} "
          f"e_total={final.e_total:.6g}")
    try:
        label = classify(log)
        extra = f" (r0={label.r0:.4g})" if label.r0 is not None else ""
        print(f"  regime: {label.kind}{extra}")
    except InsufficientDataError:
        print("  regime: log too short to classify")
    if args.out:
        print(f"  wrote {args.out}/trajectory.csv, diagnostics.csv, metadata.json")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .runner import sweep

    cfg = _load_config(args)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    rows = sweep(cfg, args.param, values, out_dir=args.out, jobs=args.jobs)
    print(f"sweep over {args.param}: {len(rows)} runs")
    for r in rows:
        if r["status"] == "ok":
            rho = r["rho_tail_mean"]
            rho_s = "nan" if math.isnan(rho) else f"{rho:.4g}"
            print(f"  {args.param}={r['value']:g}: diameter={r['max_diameter']:.4g} "
                  f"rho_tail={rho_s} regime={r['regime']}")
        else:
            print(f"  {args.param}={r['value']:g}: FAILED ({r['error']})")
    if args.out:
        print(f"  wrote {args.out}/sweep.csv")
    return EXIT_OK


def _cmd_minimize(args) -> int:
    import numpy as np

    from .kernels import SigmaKernel
    from .landscape import MinimizeConfig, config_energy_gradient, minimize_config_energy

    sk = SigmaKernel(args.sigma_a, args.sigma_r, args.beta)
    cfg = MinimizeConfig(restarts=args.restarts, seed=args.seed)
    x_min, e_min = minimize_config_energy(args.n, sk, cfg)
    grad = config_energy_gradient(x_min, sk)
    print(json.dumps({
        "x_min": x_min.tolist(),
        "e_c_min": e_min,
        "grad_norm": float(np.sqrt(np.sum(grad * grad))),
    }, indent=2))
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .runner import verify

    report = verify(include_battery=args.battery == "regimes", seed=args.seed)
    width = max(len(i["name"]) for i in report["items"])
    for item in report["items"]:
        status = "pass" if item["passed"] else "FAIL"
        print(f"  {item['name']:<{width}}  observed={item['observed']:.3e}  "
              f"tol={item['tolerance']:.1e}  {status}")
    print("all passed" if report["all_passed"] else "FAILURES present")
    if args.out:
        args.out.write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK if report["all_passed"] else EXIT_VERIFY


def _cmd_scenarios(_args) -> int:
    from .scenarios import scenario_names

    for name in scenario_names():
        print(name)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    from .errors import (
        BlowupError,
        ConfigError,
        NonConvergenceError,
        SingularityError,
    )

    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_CONFIG if err.code not in (0, None) else EXIT_OK

    handlers = {
        "simulate": _cmd_simulate,
        "sweep": _cmd_sweep,
        "minimize": _cmd_minimize,
        "verify": _cmd_verify,
        "scenarios": _cmd_scenarios,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularityError, BlowupError, NonConvergenceError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
