"""Command line entry point.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import experiments
from .config import load_config
from .errors import NumericalError, RicstreamError
from .snapshot import load_snapshot

log = logging.getLogger("ricstream")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ricstream",
                                description="Continual ridge regression via Riccati state evolution.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, snapshot=False):
        sp.add_argument("--config", required=True, help="experiment configuration file")
        sp.add_argument("--out-dir", help="output directory (overrides out_dir)")
        if snapshot:
            sp.add_argument("--snapshot", required=True, help="state.snap to resume from")
            sp.add_argument("--force", action="store_true",
                            help="accept a snapshot written under a different configuration")
        return sp

    sp = common(sub.add_parser("run", help="evolve from t = 0 through the checkpoints"))
    sp.add_argument("--to", type=float, help="stop time (default T_final)")
    sp = common(sub.add_parser("extend", help="add data after the snapshot time"), snapshot=True)
    sp.add_argument("--to", type=float, required=True)
    sp = common(sub.add_parser("forget", help="remove data back to an earlier time"), snapshot=True)
    sp.add_argument("--to", type=float, required=True)
    sp = common(sub.add_parser("retune", help="shift the prior's linear term"), snapshot=True)
    sp.add_argument("--bias-file", required=True, help="one c_x entry per line")
    sp = common(sub.add_parser("oracle", help="direct least-squares baseline"))
    sp.add_argument("--to", type=float, help="stop time (default T_final)")
    sp = sub.add_parser("report", help="summarize a run directory")
    sp.add_argument("run_dir")
    return p


def _report(run_dir: Path) -> None:
    with open(run_dir / "errors.csv") as fh:
        rows = list(csv.DictReader(fh))
    with open(run_dir / "theta.csv") as fh:
        n = sum(1 for _ in csv.DictReader(fh))
    print(f"{run_dir}: n = {n}")
    print(f"{'checkpoint':>12} {'err_u %':>12} {'err_f %':>12}")
    for r in rows:
        print(f"{float(r['checkpoint']):>12.6g} {float(r['err_u_pct']):>12.4f} "
              f"{float(r['err_f_pct']):>12.4f}")


def _execute(args) -> None:
    if args.command == "report":
        _report(Path(args.run_dir))
        return
    config = load_config(args.config)
    problem = experiments.build_problem(config)
    digest = config.digest()
    if args.command == "run":
        outcome = experiments.run(problem, args.to)
    elif args.command == "oracle":
        outcome = experiments.oracle(problem, args.to)
    else:
        state, reg, _ = load_snapshot(args.snapshot, digest, force=args.force)
        if args.command == "extend":
            outcome = experiments.extend(problem, state, reg, args.to)
        elif args.command == "forget":
            outcome = experiments.forget(problem, state, reg, args.to)
        else:
            outcome = experiments.retune(problem, state, reg,
                                         experiments.read_bias_file(args.bias_file))
    out = experiments.write_outputs(args.out_dir or config.out_dir, problem, outcome, digest)
    for r in outcome.reports:
        log.info("t = %.6g  err_u = %.4f%%  err_f = %.4f%%", r.checkpoint_time, r.err_u, r.err_f)
    log.info("wrote %s", out)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        _execute(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (RicstreamError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
