"""Command line entry point: ``infospec <experiment> --config FILE [--out FILE]``.

Exit status is 0 on success, 1 when any verification row failed or a work
item raised, and 2 on a configuration error.
"""

import argparse
import sys

from .config import KINDS, ConfigError, load_config, preset_names
from .csvio import emit_csv
from .run import run

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _u64(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2**64), got {value}")
    return value


def _positive(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("workers must be >= 1")
    return value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="infospec", description="Information-spectrum experiments and checks.")
    sub = parser.add_subparsers(dest="kind", required=True, metavar="{" + ",".join(KINDS) + "}")
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True,
                       help="YAML config file or shipped preset name (" + ", ".join(preset_names()) + ")")
        p.add_argument("--out", default=None, help="CSV output path ('-' for stdout); default from config or stdout")
        p.add_argument("--workers", type=_positive, default=None, help="worker processes (default: CPU count)")
        p.add_argument("--seed", type=_u64, default=None, help="override the config seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, kind=args.kind)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = run(cfg, workers=args.workers)
    out = args.out or cfg.output or "-"
    emit_csv(rows, out)
    failed = [r for r in rows if r.status == "fail"]
    errors = [r for r in rows if r.status.startswith("error")]
    checked = [r for r in rows if r.status in ("pass", "fail")]
    print(
        f"{cfg.name}: {len(rows)} rows, {len(checked) - len(failed)}/{len(checked)} checks passed, "
        f"{len(errors)} errors",
        file=sys.stderr,
    )
    for r in failed + errors:
        print(f"  {r.status.upper()[:5]} {r.metric} n={r.n} gamma={r.gamma} seed={r.seed} {r.params} "
              f"{r.status if r.status.startswith('error') else ''}", file=sys.stderr)
    return EXIT_FAILED if failed or errors else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
