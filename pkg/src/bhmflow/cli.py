"""Command-line entry point for the solver and experiment harness."""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import __version__
from .config import Config, manifest_json, parse_config
from .diagnostics import check_energy_stability
from .errors import BhmflowError, ConfigError
from .experiments import (run_convergence, run_m2_sweep, run_simulate,
                          run_stability_map, stability_map_to_csv)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _say(quiet, *args):
    if not quiet:
        print(*args)


def _workers(cfg: Config, override):
    n = override if override is not None else cfg.data["threads"]
    return n if n and n > 0 else (os.cpu_count() or 1)


def _setup(cfg: Config, out_dir):
    grid = cfg.build_grid()
    model = cfg.build_model()
    scheme = cfg.build_scheme()
    split = cfg.build_split()
    u0 = cfg.build_initial_condition(grid)
    os.makedirs(out_dir, exist_ok=True)
    return grid, model, scheme, split, u0


def _write_manifest(cfg, out_dir, started, **extra):
    doc = manifest_json(cfg, version=__version__, seed=cfg.data["seed"],
                        elapsed_seconds=round(time.time() - started, 3), **extra)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        fh.write(doc + "\n")


def _reference_arg(cfg):
    ref = cfg.data["reference"]
    if ref["kind"] == "manufactured":
        return "manufactured"
    return ("richardson", ref["h_fine"])


def _plan(cfg: Config):
    """Dry-run summary: cell count and total step budget."""
    d = cfg.data
    if d["experiment"] == "simulate":
        cells, steps = 1, int(round(d["t_end"] / d["h"]))
    elif d["experiment"] == "converge":
        cells = len(d["h_list"])
        steps = sum(int(round((d["t_end"]) / h)) for h in d["h_list"])
        if d["reference"]["kind"] == "richardson":
            steps += 3 * int(round(d["t_end"] / d["reference"]["h_fine"]))
    elif d["experiment"] == "m2sweep":
        cells = len(d["m2_values"])
        steps = cells * int(round(d["t_end"] / d["h"]))
    else:
        cells = len(d["h_list"]) * len(d["param_values"])
        steps = cells * d["n_steps"]
    return cells, steps


def cmd_validate(cfg, out_dir, quiet, workers):
    cells, steps = _plan(cfg)
    _say(quiet, f"experiment: {cfg.experiment}")
    _say(quiet, f"plan: {cells} cell(s), ~{steps} total steps, {workers} worker(s)")
    return EXIT_OK


def cmd_simulate(cfg, out_dir, quiet, workers):
    started = time.time()
    grid, model, scheme, split, u0 = _setup(cfg, out_dir)
    d = cfg.data
    rec = run_simulate(model, scheme, split, u0, 0.0, d["t_end"], d["h"],
                       snapshot_times=d["snapshot_times"], out_dir=out_dir,
                       sample_every=d["sample_every"])
    rec.to_csv(os.path.join(out_dir, "record.csv"))
    failure = None
    if rec.failure is not None:
        failure = {"reason": rec.failure.reason, "step": rec.failure.step,
                   "time": rec.failure.time}
    _write_manifest(cfg, out_dir, started, failure=failure,
                    energy_stable=check_energy_stability(rec))
    if rec.failure is not None:
        _say(quiet, f"numerical failure at step {rec.failure.step}: {rec.failure.reason}")
        return EXIT_NUMERICAL
    _say(quiet, f"simulate: {len(rec.times)} samples written to {out_dir}")
    return EXIT_OK


def cmd_converge(cfg, out_dir, quiet, workers):
    started = time.time()
    grid, model, scheme, split, u0 = _setup(cfg, out_dir)
    d = cfg.data
    table, slope = run_convergence(model, scheme, split, u0, d["t0"], d["t_end"],
                                   d["h_list"], _reference_arg(cfg), workers=workers)
    with open(os.path.join(out_dir, "convergence.csv"), "w") as fh:
        fh.write("h,error\n")
        for h, err in table:
            fh.write(f"{h:.17g},{err:.17g}\n")
    _write_manifest(cfg, out_dir, started, slope=slope)
    print(f"slope {slope:.4f}")
    return EXIT_OK


def cmd_m2sweep(cfg, out_dir, quiet, workers):
    started = time.time()
    grid, model, scheme, split, u0 = _setup(cfg, out_dir)
    d = cfg.data
    from .experiments import _resolve_reference

    reference = _resolve_reference(model, scheme, split, u0, 0.0, d["t_end"],
                                   _reference_arg(cfg))
    rows, m2_star = run_m2_sweep(model, scheme, u0, 0.0, d["t_end"], d["h"],
                                 d["m2_values"], reference, workers=workers)
    with open(os.path.join(out_dir, "m2sweep.csv"), "w") as fh:
        fh.write("m2,error,stable\n")
        for m2, err, stable in rows:
            fh.write(f"{m2:.17g},{err:.17g},{int(stable)}\n")
    _write_manifest(cfg, out_dir, started, m2_star=m2_star)
    print(f"m2_star {m2_star:.6g}")
    return EXIT_OK


def cmd_stabmap(cfg, out_dir, quiet, workers):
    started = time.time()
    grid, model, scheme, split, u0 = _setup(cfg, out_dir)
    d = cfg.data
    matrix, boundary = run_stability_map(model, scheme, u0, d["h_list"],
                                         d["param"], d["param_values"],
                                         d["n_steps"], base_split=split,
                                         workers=workers)
    stability_map_to_csv(os.path.join(out_dir, "stability_map.csv"),
                         d["h_list"], d["param"], d["param_values"], matrix)
    with open(os.path.join(out_dir, "boundary.csv"), "w") as fh:
        fh.write(f"h,min_stable_{d['param']}\n")
        for h, b in zip(d["h_list"], boundary):
            fh.write(f"{h:.17g},{b:.17g}\n")
    _write_manifest(cfg, out_dir, started)
    _say(quiet, f"stability map written to {out_dir}")
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "m2sweep": cmd_m2sweep,
    "stabmap": cmd_stabmap,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bhmflow",
        description="Pseudo-spectral solvers for thin-film and variable-mobility "
                    "Cahn-Hilliard equations with IMEX splitting schemes.",
    )
    sub = parser.add_subparsers(dest="command")
    for name, help_text in [
        ("simulate", "run a simulation with snapshots"),
        ("converge", "error-vs-timestep convergence study"),
        ("m2sweep", "error vs the biharmonic splitting parameter at fixed h"),
        ("stabmap", "energy-stability map over (h, parameter)"),
        ("validate", "parse a config and print the run plan without running"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to a JSON config file")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--threads", type=int, default=None, help="worker count")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--quiet", action="store_true")
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg.data["seed"] = args.seed
            if cfg.data["ic"].get("kind") == "random":
                cfg.data["ic"]["seed"] = args.seed
        out_dir = args.out if args.out is not None else cfg.data["out_dir"]
        workers = _workers(cfg, args.threads)
        return _COMMANDS[args.command](cfg, out_dir, args.quiet, workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BhmflowError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main():
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
