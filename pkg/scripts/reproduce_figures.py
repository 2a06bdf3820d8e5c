"""Run every thzsim experiment and write one CSV per subcommand.

    python3 scripts/reproduce_figures.py --desk --trials 10 --out results/

Without ``--desk`` the full-scale scenario defaults are used (hours for the
NMSE sweeps). Each CSV carries the full config and seed in ``#`` lines.
"""
import argparse
import pathlib
import sys
import time

from thzsim.cli import main as thzsim_main
from thzsim.config import SUBCOMMANDS


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--desk", action="store_true", help="reduced desk-scale presets")
    p.add_argument("--trials", type=int, help="override the trial count of every run")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--only", nargs="*", choices=SUBCOMMANDS, help="subset of subcommands")
    args = p.parse_args(argv)

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = 0
    for sub in args.only or SUBCOMMANDS:
        cmd = [sub, "--seed", str(args.seed), "--out", str(out / f"{sub}.csv")]
        if args.desk:
            cmd.append("--desk")
        if args.trials:
            cmd += ["--trials", str(args.trials)]
        t0 = time.perf_counter()
        code = thzsim_main(cmd)
        print(f"{sub:<10} exit {code}  {time.perf_counter() - t0:7.1f} s  -> {out / f'{sub}.csv'}")
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
