"""Command-line entry points.

ftlab run <config.toml> [--out DIR] [--seed N] [--scenario NAME]
ftlab summarize <DIR>
ftlab validate <config.toml>

Exit codes: 0 success, 2 configuration problem, 3 numerical failure,
4 output-integrity failure.  FTLAB_THREADS caps worker threads and is also
applied to the BLAS pools before numpy loads, so a cap of 1 pins the whole
process to one core.
"""

from __future__ import annotations

import argparse
import os
import sys


def _apply_thread_env():
    raw = os.environ.get("FTLAB_THREADS", "").strip() or "1"
    try:
        cap = int(raw)
    except ValueError:
        return  # parse_config raises the proper ConfigError later
    if cap < 1:
        return
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, str(cap))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftlab",
        description="Model-mismatch experiments for harvested-population management.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the scenario(s) named by a config file")
    run.add_argument("config", help="path to a TOML scenario config")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.add_argument("--seed", type=int, help="master seed (overrides the config)")
    run.add_argument("--scenario", help="scenario name (overrides the config)")

    summ = sub.add_parser("summarize", help="verify and re-derive stats for a run directory")
    summ.add_argument("dir", help="output directory of a previous run")

    val = sub.add_parser("validate", help="parse and validate a config file")
    val.add_argument("config", help="path to a TOML scenario config")
    return parser


def _cmd_run(args) -> int:
    import dataclasses

    from .harness import parse_config, run_scenario, thread_cap

    thread_cap()  # reject malformed FTLAB_THREADS before any work
    cfg = parse_config(args.config)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, out=args.out)
    if args.seed is not None:
        if args.seed < 0:
            from .errors import ConfigError

            raise ConfigError("--seed must be >= 0")
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.scenario is not None:
        from .harness import SCENARIOS

        if args.scenario != "all" and args.scenario not in SCENARIOS:
            from .errors import ConfigError

            raise ConfigError(
                f"unknown scenario {args.scenario!r}; expected one of {('all',) + SCENARIOS}"
            )
        cfg = dataclasses.replace(cfg, scenario=args.scenario)
    written = run_scenario(cfg)
    print(f"run complete: {len(written)} scenario director{'y' if len(written) == 1 else 'ies'} under {cfg.out}")
    return 0


def _cmd_summarize(args) -> int:
    import json

    from .harness import summarize

    combined = summarize(args.dir)
    print(json.dumps(combined, indent=2, sort_keys=True))
    return 0


def _cmd_validate(args) -> int:
    from .harness import parse_config

    cfg = parse_config(args.config)
    print(f"ok: scenario={cfg.scenario} seed={cfg.seed} out={cfg.out}")
    return 0


def main(argv=None) -> int:
    _apply_thread_env()
    args = _build_parser().parse_args(argv)
    from .errors import FtlabError

    handlers = {"run": _cmd_run, "summarize": _cmd_summarize, "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except FtlabError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
