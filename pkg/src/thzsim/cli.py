"""``thzsim`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 runtime or numerical error.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import SUBCOMMANDS, ConfigError, build_config, convert
from .experiments import render_csv, run

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default; keep control of the message
        raise _ArgError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="thzsim", description="Wideband THz massive-MIMO experiments as CSV tables.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="flat 'key = value' config file")
    p.add_argument("--seed", help="master seed (unsigned 64-bit)")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--trials", help="Monte-Carlo trials")
    p.add_argument("--desk", action="store_true", help="reduced desk-scale preset")
    return p


def _overrides(extra: list[str]) -> dict:
    """``--key=value`` or ``--key value`` for any config key (dashes or underscores)."""
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"{tok}: unexpected argument")
        body = tok[2:]
        if "=" in body:
            key, value = body.split("=", 1)
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"{body}: missing value")
            key, value = body, extra[i + 1]
            i += 1
        attr, v = convert(key.replace("-", "_"), value)
        out[attr] = v
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        overrides = _overrides(extra)
        for key in ("seed", "trials"):
            value = getattr(args, key)
            if value is not None:
                attr, v = convert(key, value)
                overrides[attr] = v
        text = None
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"config: cannot read {args.config!r}: {exc.strerror}") from None
        cfg = build_config(args.subcommand, text, overrides, desk=args.desk)
    except (_ArgError, ConfigError) as exc:
        print(f"thzsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with np.errstate(all="ignore"):
            csv = render_csv(run(cfg))
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"thzsim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(csv)
        except OSError as exc:
            print(f"thzsim: cannot write {args.out!r}: {exc.strerror}", file=sys.stderr)
            return EXIT_RUNTIME
    else:
        sys.stdout.write(csv)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
