"""Command line: ``run``, ``validate`` and ``oracle``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError
from .grid import PhaseGrid

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 2, 3, 4
DEFAULT_OUTPUT = "nsbgk_out"


def resolve_threads(flag) -> int:
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get("NSBGK_THREADS")
    return max(1, int(env)) if env else 1


def cmd_run(manifest, output_dir=None, threads=1) -> int:
    from .coupling import run
    from .initial import build_initial
    from .io import NDJSONWriter, write_fields

    out = Path(output_dir or manifest.output_dir or DEFAULT_OUTPUT)
    out.mkdir(parents=True, exist_ok=True)
    grid = manifest.grid.build()
    cfg = manifest.config
    f0, u0 = build_initial(grid, manifest.initial, cfg.epsilon, cfg.seed)
    every = manifest.emit_fields_every

    def dump(n, f, u):
        if every and n % every == 0:
            write_fields(out / f"fields_{n:06d}.bin", f, u)

    with NDJSONWriter(out / "diagnostics.ndjson") as writer:
        traj = run(cfg, f0, u0, threads=threads, on_record=writer.write, on_fields=dump)
    if traj.failure is not None:
        print(f"run stopped: {traj.failure}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"wrote {len(traj.records)} records to {out / 'diagnostics.ndjson'}")
    return EXIT_OK


def cmd_validate(suite: str, threads=1) -> int:
    from .validation import run_suite

    checks = run_suite(suite, threads)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    print(f"{suite}: {'all passed' if ok else 'FAILED'} ({sum(c.passed for c in checks)}/{len(checks)})")
    return EXIT_OK if ok else EXIT_VALIDATION


def _param(text):
    key, sep, raw = text.partition("=")
    if not sep:
        raise ConfigError(f"expected k=v, got {text!r}")
    try:
        return key.strip(), float(raw)
    except ValueError:
        raise ConfigError(f"parameter {key!r} needs a number, got {raw!r}", key=key.strip()) from None


def cmd_oracle(name: str, params) -> int:
    from .oracles import ORACLES

    kwargs = dict(_param(p) for p in params)
    try:
        result = ORACLES[name](**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for oracle {name}: {exc}") from None
    print(json.dumps(result, indent=None, default=repr))
    return EXIT_OK


def build_parser():
    from .oracles import ORACLES
    from .validation import SUITES

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (env NSBGK_THREADS)")
    common.add_argument("--output-dir", default=argparse.SUPPRESS, help="directory for run output")
    ap = argparse.ArgumentParser(prog="nsbgk", parents=[common], description="Coupled fluid-kinetic simulator")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run a configuration")
    p.add_argument("config")
    p = sub.add_parser("validate", parents=[common], help="run a validation suite")
    p.add_argument("suite", choices=SUITES)
    p = sub.add_parser("oracle", parents=[common], help="print reference values")
    p.add_argument("name", choices=sorted(ORACLES))
    p.add_argument("params", nargs="*", help="k=v pairs")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads = resolve_threads(getattr(args, "threads", None))
    try:
        if args.command == "run":
            return cmd_run(load_config(args.config), getattr(args, "output_dir", None), threads)
        if args.command == "validate":
            return cmd_validate(args.suite, threads)
        return cmd_oracle(args.name, args.params)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
