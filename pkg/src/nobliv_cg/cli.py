"""Command-line entry point: ``nobliv-cg {run,sweep,check,brute-force}``.

Exit codes: 0 ok, 2 config or usage error, 3 invariant violation, 4 size limit.
"""
import argparse
import json
import sys

from . import checks, harness
from .exceptions import (ConfigError, DimensionMismatchError, InfeasibleShrinkError, InvalidParameterError,
                         InvariantViolation, SizeLimitError)

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_SIZE = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _parse_values(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(int(tok))
        except ValueError:
            try:
                out.append(float(tok))
            except ValueError:
                out.append(tok)
    return out


def build_parser():
    p = _Parser(prog="nobliv-cg", description="Variance-reduced conditional gradient experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run the configured solver for every replication")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None, help="override seeds.master")
    run.add_argument("--out", default=None, help="output directory (overrides config output)")

    sw = sub.add_parser("sweep", help="repeat a run over values of one solver parameter")
    sw.add_argument("--config", required=True)
    sw.add_argument("--param", required=True, help="solver field, e.g. T or epsilon")
    sw.add_argument("--values", required=True, help="comma-separated values")
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--out", default=None)

    ck = sub.add_parser("check", help="run an invariant suite")
    ck.add_argument("suite", choices=sorted(checks.SUITES) + ["all"])

    bf = sub.add_parser("brute-force", help="enumerate OPT of a set-function config")
    bf.add_argument("--config", required=True)
    bf.add_argument("--out", default=None)
    return p


def _dispatch(args):
    if args.command == "check":
        return EXIT_OK if checks.run_suite(args.suite) else EXIT_INVARIANT
    cfg = harness.load_config(args.config)
    if args.command == "run":
        for s in harness.run_experiment(cfg, args.seed, args.out):
            line = {k: s.get(k) for k in ("seed", "T", "output_value", "oracle_calls", "ratio")}
            print(json.dumps(line, sort_keys=True))
    elif args.command == "sweep":
        path, rows = harness.sweep(cfg, args.param, _parse_values(args.values), args.seed, args.out)
        print(f"wrote {path} ({len(rows)} rows)")
    else:
        report = harness.brute_force_report(cfg, args.out)
        print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (InvariantViolation, InfeasibleShrinkError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, InvalidParameterError, DimensionMismatchError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
