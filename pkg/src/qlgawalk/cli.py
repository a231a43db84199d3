"""Command line entry point: ``qlgawalk run|verify|oracle``.

Exit codes: 0 success, 1 config error, 2 verification failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from . import _backend
from .config import OUTPUT_DIR_ENV, ConfigError, load_config, output_dir
from .harness import run_experiment, run_oracle
from .verify import SUITES, format_table, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3


def _err(msg: str) -> None:
    print(f"qlgawalk: {msg}", file=sys.stderr)


def _load(path: str):
    try:
        return load_config(path), EXIT_OK
    except ConfigError as exc:
        _err(f"config error in {exc}")
        return None, EXIT_CONFIG
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return None, EXIT_IO


def _execute(runner, path: str) -> int:
    cfg, code = _load(path)
    if cfg is None:
        return code
    try:
        result = runner(cfg)
    except ConfigError as exc:
        _err(f"config error in {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _err(f"I/O error: {exc}")
        return EXIT_IO
    out = output_dir(cfg)
    print(f"wrote {len(result.files)} files to {out}")
    if not result.passed:
        for msg in result.failures:
            _err(f"verification failed: {msg}")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_run(args) -> int:
    return _execute(run_experiment, args.config)


def cmd_oracle(args) -> int:
    return _execute(run_oracle, args.config)


def cmd_verify(args) -> int:
    checks, elapsed = run_suite(args.suite)
    print(format_table(checks))
    print(f"backend: {_backend.name}; {elapsed:.1f} s")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which would read as a verification failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="qlgawalk",
        description="History-dependent quantum walks and their lattice-gas automata.",
        epilog=f"{OUTPUT_DIR_ENV} overrides the config's output_dir.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("verify", help="run a fixed property suite")
    v.add_argument("suite", choices=sorted(SUITES) + ["all"])
    v.set_defaults(func=cmd_verify)
    o = sub.add_parser("oracle", help="compare sparse stepping with the dense operator")
    o.add_argument("config")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
