"""Command-line batch pipeline: convert, corrupt, stats, rad, render.

Runs are reproducible: every subcommand that touches sample files writes a
manifest CSV plus a run.json recording the full configuration, sample
randomness is derived by hashing the run seed with the sample id, and the
worker pool (capped by the BINAREP_THREADS environment variable) never
shares mutable state between samples.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .corruptions import CorruptionKind, CorruptionSpec
from .errors import DataError
from .events import EventStream, SensorGeometry
from .metrics import compare_representations, relative_accuracy_drop
from .render import render_png
from .representations import (
    BIT_ORDERS,
    assemble_tensor,
    bina_rep,
    binary_event_images,
    event_histogram,
    voxel_grid,
)
from .stream_io import parse_csv, parse_nmnist, write_csv
from .tensorfile import (
    DTYPE_F32,
    DTYPE_NAMES,
    DTYPE_U8,
    DTYPE_U16,
    DTYPE_U32,
    read_tensor_file,
    write_tensor_file,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

FORMAT_EXTENSIONS = {"nmnist": ".bin", "csv": ".csv"}

CONVERT_MANIFEST_FIELDS = [
    "sample", "path", "channels", "H", "W", "repr", "T", "N", "label", "corruption",
]
CORRUPT_MANIFEST_FIELDS = ["sample", "path", "kind", "severity", "seed", "label"]
RAD_FIELDS = ["corruption", "severity", "acc_clean", "acc_corrupt", "score"]
STATS_FIELDS = [
    "sample", "repr", "T", "N", "channels", "density", "saturation", "mean_bits",
]


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract reserves 2
    # for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def derive_seed(seed: int, sample: str) -> int:
    digest = hashlib.sha256(f"{seed}:{sample}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


# argparse type= converters: flag-value failures become usage errors (exit 1)

def _geometry_arg(text: str) -> SensorGeometry:
    return SensorGeometry.parse(text)


def _corruption_arg(text: str) -> str:
    CorruptionSpec.parse(text)  # reject malformed specs at parse time
    return text


def _kind_arg(text: str) -> str:
    return CorruptionKind.parse(text).value


def _worker_count(num_tasks: int, requested: int | None) -> int:
    workers = requested or os.cpu_count() or 1
    cap = os.environ.get("BINAREP_THREADS")
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise DataError(f"BINAREP_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(workers, num_tasks or 1))


def collect_inputs(paths: list[str], extension: str) -> list[tuple[Path, str, str]]:
    """Resolve input files to (path, sample id, label) triples.

    Directories are walked recursively; a first-level subdirectory name
    becomes the sample's label (the root/<label>/<sample> dataset layout).
    """
    found: list[tuple[Path, str, str]] = []
    seen: set[str] = set()
    for raw in paths:
        path = Path(raw)
        if not path.exists():
            raise DataError(f"input path does not exist: {path}")
        if path.is_file():
            entries = [(path, path.stem, "")]
        else:
            entries = []
            for file in sorted(path.rglob(f"*{extension}")):
                rel = file.relative_to(path)
                label = rel.parts[0] if len(rel.parts) > 1 else ""
                entries.append((file, rel.with_suffix("").as_posix(), label))
        for file, sample, label in entries:
            if sample in seen:
                raise DataError(f"duplicate sample id {sample!r} from {file}")
            seen.add(sample)
            found.append((file, sample, label))
    if not found:
        raise DataError(f"no *{extension} samples found under {', '.join(paths)}")
    return found


def load_stream(path: Path, fmt: str, geometry: SensorGeometry) -> EventStream:
    if fmt == "nmnist":
        return parse_nmnist(path.read_bytes(), geometry)
    return parse_csv(path.read_text(encoding="utf-8"), geometry)


def _run_pool(tasks, worker, threads, keep_going):
    """Run worker over tasks; returns rows, reporting or raising failures."""
    rows = []
    failures = []
    with ThreadPoolExecutor(max_workers=_worker_count(len(tasks), threads)) as pool:
        for task, outcome in zip(tasks, pool.map(_guard(worker), tasks)):
            if isinstance(outcome, Exception):
                if not keep_going:
                    raise outcome
                failures.append((task[1], outcome))
                print(f"skipped {task[0]}: {outcome}", file=sys.stderr)
            else:
                rows.append(outcome)
    if not rows:
        raise DataError("every input sample failed")
    return rows


def _guard(worker):
    def run(task):
        try:
            return worker(task)
        except (DataError, OSError, ValueError) as exc:
            return exc

    return run


def _write_manifest(out_dir: Path, fields, rows):
    rows = sorted(rows, key=lambda row: row["path"])
    with open(out_dir / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def _write_run_config(out_dir: Path, args):
    config = {k: v for k, v in vars(args).items() if k != "func"}
    config["input"] = [str(p) for p in config.get("input", [])]
    with open(out_dir / "run.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _build_tensor(stream, args):
    if args.repr == "binary":
        rep = binary_event_images(stream, args.frames, mode=args.windows)
    elif args.repr == "binarep":
        rep = bina_rep(
            stream, args.frames, args.bits, bit_order=args.bit_order, mode=args.windows
        )
    elif args.repr == "histogram":
        rep = event_histogram(stream)
    elif args.repr == "voxel":
        rep = voxel_grid(stream, args.frames)
    else:
        raise DataError(f"unknown representation {args.repr!r}")
    return assemble_tensor(rep, normalize=args.normalize)


def _pick_dtype(args, tensor) -> int:
    if args.dtype:
        return DTYPE_NAMES[args.dtype]
    kind = tensor.layout.kind
    if args.normalize or kind == "voxel":
        return DTYPE_F32
    if kind == "binary":
        return DTYPE_U8
    if kind == "binarep":
        bits = tensor.layout.bit_depth
        return DTYPE_U8 if bits <= 8 else DTYPE_U16 if bits <= 16 else DTYPE_U32
    return DTYPE_U32  # histogram counts


def cmd_convert(args) -> int:
    geometry = args.geometry
    inputs = collect_inputs(args.input, FORMAT_EXTENSIONS[args.format])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corrupt_spec = CorruptionSpec.parse(args.corrupt) if args.corrupt else None

    def convert_one(task):
        path, sample, label = task
        stream = load_stream(path, args.format, geometry)
        spec = None
        if corrupt_spec is not None:
            seed = corrupt_spec.seed if args.corrupt.count(":") == 2 else derive_seed(
                args.seed, sample
            )
            spec = CorruptionSpec(corrupt_spec.kind, corrupt_spec.severity, seed)
            stream = spec.apply(stream)
        tensor = _build_tensor(stream, args)
        rel = f"{sample}.ert"
        target = out_dir / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        write_tensor_file(target, tensor, _pick_dtype(args, tensor))
        return {
            "sample": sample,
            "path": rel,
            "channels": tensor.num_channels,
            "H": tensor.data.shape[1],
            "W": tensor.data.shape[2],
            "repr": args.repr,
            "T": args.frames,
            "N": args.bits if args.repr == "binarep" else "",
            "label": label,
            "corruption": str(spec) if spec else "",
        }

    rows = _run_pool(inputs, convert_one, args.threads, args.keep_going)
    _write_manifest(out_dir, CONVERT_MANIFEST_FIELDS, rows)
    _write_run_config(out_dir, args)
    print(f"converted {len(rows)} samples -> {out_dir / 'manifest.csv'}")
    return EXIT_OK


def cmd_corrupt(args) -> int:
    geometry = args.geometry
    inputs = collect_inputs(args.input, FORMAT_EXTENSIONS[args.format])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    kind = CorruptionKind.parse(args.type)  # canonical token from the parser

    def corrupt_one(task):
        path, sample, label = task
        stream = load_stream(path, args.format, geometry)
        seed = derive_seed(args.seed, sample)
        spec = CorruptionSpec(kind, args.severity, seed)
        corrupted = spec.apply(stream)
        rel = f"{sample}.csv"
        target = out_dir / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(write_csv(corrupted), encoding="utf-8")
        return {
            "sample": sample,
            "path": rel,
            "kind": kind.value,
            "severity": args.severity,
            "seed": seed,
            "label": label,
        }

    rows = _run_pool(inputs, corrupt_one, args.threads, args.keep_going)
    _write_manifest(out_dir, CORRUPT_MANIFEST_FIELDS, rows)
    _write_run_config(out_dir, args)
    print(f"corrupted {len(rows)} samples -> {out_dir / 'manifest.csv'}")
    return EXIT_OK


def cmd_stats(args) -> int:
    geometry = args.geometry
    inputs = collect_inputs(args.input, FORMAT_EXTENSIONS[args.format])
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    def stats_one(task):
        path, sample, _ = task
        stream = load_stream(path, args.format, geometry)
        return [
            {
                "sample": sample,
                "repr": row.name,
                "T": row.num_frames,
                "N": row.bit_depth if row.bit_depth is not None else "",
                "channels": row.channels,
                "density": f"{row.stats.density:.8f}",
                "saturation": f"{row.stats.saturation:.8f}",
                "mean_bits": f"{row.stats.mean_bits:.8f}",
            }
            for row in compare_representations(stream)
        ]

    nested = _run_pool(inputs, stats_one, args.threads, args.keep_going)
    rows = [row for group in sorted(nested, key=lambda g: g[0]["sample"]) for row in group]
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=STATS_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    if not args.no_figure:
        from .figures import save_stats_figure

        figure_path = out_path.with_suffix(".png")
        save_stats_figure(
            [
                {
                    "name": row["repr"],
                    "density": float(row["density"]),
                    "saturation": float(row["saturation"]),
                }
                for row in rows
            ],
            figure_path,
        )
        print(f"wrote {out_path} and {figure_path}")
    else:
        print(f"wrote {out_path}")
    return EXIT_OK


def _parse_accuracy_pair(text: str) -> tuple[str, int, float]:
    # kind:severity=accuracy
    try:
        spec, acc = text.split("=")
        kind, severity = spec.split(":")
        return CorruptionKind.parse(kind).value, int(severity), float(acc)
    except ValueError:
        raise DataError(f"expected kind:severity=accuracy, got {text!r}") from None


def _read_accuracy_csv(path: str) -> tuple[float | None, list[tuple[str, int, float]]]:
    clean = None
    pairs = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            try:
                severity = int(row["severity"])
                accuracy = float(row["accuracy"])
                corruption = row["corruption"].strip().lower()
            except (KeyError, TypeError, ValueError):
                raise DataError(
                    f"{path}: rows need corruption,severity,accuracy columns"
                ) from None
            if severity == 0 or corruption in ("none", "clean", ""):
                clean = accuracy
            else:
                try:
                    kind = CorruptionKind.parse(corruption).value
                except ValueError as exc:
                    raise DataError(f"{path}: {exc}") from None
                pairs.append((kind, severity, accuracy))
    return clean, pairs


def cmd_rad(args) -> int:
    pairs: list[tuple[str, int, float]] = []
    clean = args.clean
    if args.accuracies:
        csv_clean, csv_pairs = _read_accuracy_csv(args.accuracies)
        pairs.extend(csv_pairs)
        if clean is None:
            clean = csv_clean
    for pair in args.pair:
        pairs.append(_parse_accuracy_pair(pair))
    if clean is None:
        raise DataError("no clean accuracy: pass --clean or an accuracies CSV with a clean row")
    if not pairs:
        raise DataError("no corrupted accuracies given")

    rows = []
    for kind, severity, accuracy in sorted(pairs):
        score = relative_accuracy_drop(clean, accuracy)
        rows.append(
            {
                "corruption": kind,
                "severity": severity,
                "acc_clean": f"{score.acc_clean:.6f}",
                "acc_corrupt": f"{score.acc_corrupt:.6f}",
                "score": f"{score.score:.6f}",
            }
        )

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=RAD_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
    if not args.no_figure:
        from .figures import save_rad_figure

        figure_path = out_path.with_suffix(".png")
        save_rad_figure(
            [
                {
                    "corruption": row["corruption"],
                    "severity": int(row["severity"]),
                    "score": float(row["score"]),
                }
                for row in rows
            ],
            figure_path,
        )
        print(f"wrote {out_path} and {figure_path}")
    else:
        print(f"wrote {out_path}")
    return EXIT_OK


def cmd_render(args) -> int:
    inputs = collect_inputs(args.input, ".ert")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    channel = None
    if args.channel is not None:
        channel = args.channel
    elif args.frame is not None:
        channel = (2 * args.frame, 2 * args.frame + 1)

    def render_one(task):
        path, sample, _ = task
        values = read_tensor_file(path).astype("float32")
        png = render_png(values, representable_max=args.max, channel=channel)
        target = out_dir / f"{sample}.png"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(png)
        return {"sample": sample, "path": f"{sample}.png"}

    rows = _run_pool(inputs, render_one, args.threads, args.keep_going)
    print(f"rendered {len(rows)} images -> {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="binarep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io_flags(p, fmt=True):
        if fmt:
            p.add_argument("--format", choices=["nmnist", "csv"], default="csv",
                           help="input event file format")
            p.add_argument("--geometry", required=True, metavar="WxH", type=_geometry_arg,
                           help="sensor resolution, e.g. 34x34")
        p.add_argument("--threads", type=int, default=None,
                       help="worker pool size (BINAREP_THREADS caps it)")
        p.add_argument("--keep-going", action="store_true",
                       help="skip samples that fail to parse instead of aborting")

    convert = sub.add_parser("convert", help="convert event files to .ert tensors")
    convert.add_argument("input", nargs="+", help="event files or dataset directories")
    convert.add_argument("--out", required=True, help="output directory")
    convert.add_argument("--repr", choices=["binary", "binarep", "histogram", "voxel"],
                         default="binarep")
    convert.add_argument("-T", "--frames", type=int, default=1,
                         help="frame count (temporal bins for voxel)")
    convert.add_argument("-N", "--bits", type=int, default=8,
                         help="bit depth of packed frames")
    convert.add_argument("--bit-order", choices=list(BIT_ORDERS), default=BIT_ORDERS[0],
                         help="earliest sub-window packs as MSB or LSB")
    convert.add_argument("--windows", choices=["duration", "count"], default="duration",
                         help="equal-duration or equal-event-count windows")
    convert.add_argument("--normalize", action="store_true",
                         help="scale packed values by 1/(2^N - 1)")
    convert.add_argument("--dtype", choices=sorted(DTYPE_NAMES), default=None,
                         help="tensor file dtype (default picked per representation)")
    convert.add_argument("--corrupt", default=None, metavar="KIND:SEV[:SEED]",
                         type=_corruption_arg,
                         help="corrupt each stream before conversion")
    convert.add_argument("--seed", type=int, default=0,
                         help="run seed; per-sample seeds are derived from it")
    add_io_flags(convert)
    convert.set_defaults(func=cmd_convert)

    corrupt = sub.add_parser("corrupt", help="write corrupted copies of event files")
    corrupt.add_argument("input", nargs="+")
    corrupt.add_argument("--out", required=True)
    corrupt.add_argument("--type", required=True, type=_kind_arg, help="ba or occlusion")
    corrupt.add_argument("--severity", type=int, choices=[1, 2, 3, 4, 5], required=True)
    corrupt.add_argument("--seed", type=int, default=0)
    add_io_flags(corrupt)
    corrupt.set_defaults(func=cmd_corrupt)

    stats = sub.add_parser("stats", help="sparsity statistics per representation")
    stats.add_argument("input", nargs="+")
    stats.add_argument("--out", required=True, help="output CSV path")
    stats.add_argument("--no-figure", action="store_true")
    add_io_flags(stats)
    stats.set_defaults(func=cmd_stats)

    rad = sub.add_parser("rad", help="relative accuracy drop report")
    rad.add_argument("--clean", type=float, default=None, help="clean accuracy in percent")
    rad.add_argument("--pair", action="append", default=[], metavar="KIND:SEV=ACC",
                     help="corrupted accuracy, repeatable")
    rad.add_argument("--accuracies", default=None,
                     help="CSV with corruption,severity,accuracy rows (severity 0 = clean)")
    rad.add_argument("--out", required=True, help="output CSV path")
    rad.add_argument("--no-figure", action="store_true")
    rad.set_defaults(func=cmd_rad)

    render = sub.add_parser("render", help="render .ert tensors to PNG")
    render.add_argument("input", nargs="+", help=".ert files or directories")
    render.add_argument("--out", required=True)
    render.add_argument("--frame", type=int, default=None,
                        help="frame index; renders its off/on channel pair")
    render.add_argument("--channel", type=int, default=None,
                        help="single channel to render as grayscale")
    render.add_argument("--max", type=float, default=None,
                        help="representable maximum used for intensity scaling")
    add_io_flags(render, fmt=False)
    render.set_defaults(func=cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, OSError, ValueError) as exc:
        print(f"binarep: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
