"""Train on a clean dataset, score corrupted variants, emit accuracy.csv.

The output is one `corruption,severity,accuracy` row per dataset, clean
first (spelled `none,0,...`), which is exactly what a downstream relative
accuracy drop report consumes.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .data import load_manifest
from .errors import DatasetError
from .training import evaluate_on, train_model

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _corrupt_arg(text: str) -> tuple[str, int, str]:
    # KIND:SEVERITY=DIR
    try:
        spec, directory = text.split("=", 1)
        kind, severity = spec.split(":")
        if not kind or not directory:
            raise ValueError
        return kind, int(severity), directory
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected KIND:SEVERITY=DIR, got {text!r}"
        ) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ert-harness", description=__doc__.splitlines()[0])
    parser.add_argument("--clean", required=True,
                        help="directory with manifest.csv + .ert tensors")
    parser.add_argument("--corrupt", action="append", default=[], type=_corrupt_arg,
                        metavar="KIND:SEV=DIR",
                        help="corrupted variant of the same samples, repeatable")
    parser.add_argument("--out", required=True, help="accuracy CSV to write")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--lr", type=float, default=0.001)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--resize", type=int, default=None, metavar="PIXELS",
                        help="resize tensors to a square resolution before training")
    parser.add_argument("--val-fraction", type=float, default=0.25)
    parser.add_argument("--batch-size", type=int, default=32)
    return parser


def run(args) -> int:
    clean = load_manifest(args.clean)
    trained = train_model(
        clean,
        epochs=args.epochs,
        lr=args.lr,
        seed=args.seed,
        resize=args.resize,
        val_fraction=args.val_fraction,
        batch_size=args.batch_size,
    )

    rows = [{"corruption": "none", "severity": 0, "accuracy": f"{trained.accuracy:.6f}"}]
    for kind, severity, directory in args.corrupt:
        accuracy = evaluate_on(trained, load_manifest(directory))
        print(f"{kind}:{severity}: top-1 accuracy {accuracy:.2f}%")
        rows.append(
            {"corruption": kind, "severity": severity, "accuracy": f"{accuracy:.6f}"}
        )

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["corruption", "severity", "accuracy"])
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {out_path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except (DatasetError, OSError) as exc:
        print(f"ert-harness: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
