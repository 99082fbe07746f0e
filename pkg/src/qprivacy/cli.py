"""Command line front end.

Exit status: 0 when every check passes, 1 when at least one inequality
fails, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import DEFAULT
from .errors import QPrivacyError
from .harness import CHECK_FAMILIES, FORMATS, RunConfig, run, write_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be comma-separated integers, got {text!r}")
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"dims need >= 2 positive entries, got {text!r}")
    return dims


def _checks(text: str) -> tuple[str, ...]:
    items = tuple(x.strip() for x in text.split(",") if x.strip())
    bad = [x for x in items if x not in CHECK_FAMILIES]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"unknown checks {bad}; choose from {','.join(CHECK_FAMILIES)}")
    return items


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", metavar="PATH")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tolerance", type=float, default=None,
                        help=f"inequality slack tolerance (default {DEFAULT.inequality})")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", dest="fmt", choices=FORMATS, default="text")
    common.add_argument("--checks", type=_checks, metavar="LIST",
                        help="comma-separated subset of: " + ",".join(CHECK_FAMILIES))
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="qprivacy", description="Quantum privacy computations and checks.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("compute", parents=[common], help="evaluate one scenario file")
    v = sub.add_parser("verify", parents=[common], help="Monte Carlo verification over random scenarios")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--dims", type=_dims, default=(2, 2, 2), help="sender,receiver1,... (default 2,2,2)")
    v.add_argument("--env-dim", type=int, default=2, help="max environment dimension per channel")
    s = sub.add_parser("sweep", parents=[common], help="scan one channel parameter")
    s.add_argument("--channel", required=True)
    s.add_argument("--range", required=True, metavar="START:STOP:STEP")
    s.add_argument("--leg", type=int, default=0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        tol = DEFAULT if args.tolerance is None else DEFAULT.replace(inequality=args.tolerance)
        config = RunConfig(
            command=args.command,
            scenario=args.scenario,
            trials=getattr(args, "trials", 1),
            seed=args.seed,
            dims=getattr(args, "dims", (2, 2, 2)),
            env_dim=getattr(args, "env_dim", 2),
            tolerances=tol,
            out=args.out,
            fmt=args.fmt,
            checks=args.checks,
            channel=getattr(args, "channel", None),
            range=getattr(args, "range", None),
            leg=getattr(args, "leg", 0),
        )
        report = run(config)
        text = write_report(report, config)
    except (QPrivacyError, OSError) as exc:
        print(f"qprivacy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not config.out:
        sys.stdout.write(text)
    return EXIT_FAIL if report.failures else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
