"""Command line front end.

    zsqhdr encode IN OUT [--delta N] [--parity odd|even] [--quality Q] [--no-ct]
                         [--mapping half|fixed] [--scale S] [--codec NAME]
    zsqhdr decode IN OUT
    zsqhdr inspect IN
    zsqhdr sweep IN [--deltas 0:14] [--quality Q] [--no-ct] [--csv FILE]

Exit status: 0 success, 1 usage error, 2 format error, 3 integrity error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .container import APP11, segment_map
from .codec import decode_layers
from .errors import FormatError, IntegrityError
from .harness import decode_file, encode_file, sweep
from .pixels import FloatMapping
from .residual import CODECS

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_INTEGRITY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _delta_range(text: str) -> list:
    if ":" in text:
        lo, hi = text.split(":", 1)
        values = list(range(int(lo), int(hi) + 1))
    else:
        values = [int(v) for v in text.split(",") if v]
    if not values or min(values) < 0:
        raise argparse.ArgumentTypeError(f"bad delta range {text!r}")
    return values


def _add_coding_options(p, sweep_mode=False):
    if not sweep_mode:
        p.add_argument("--delta", type=int, default=1, help="maximum per-sample error of the quantiser")
    p.add_argument("--parity", choices=("odd", "even"), default="odd", help="step size 2*delta+1 or 2*delta")
    p.add_argument("--quality", type=int, default=90, help="base layer JPEG quality 1..100")
    p.add_argument("--no-ct", action="store_true", help="skip the reversible colour transform (strict delta bound)")
    p.add_argument("--mapping", choices=("half", "fixed"), default="half", help="float to integer mapping")
    p.add_argument("--scale", type=float, default=1.0, help="scale factor for --mapping fixed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zsqhdr", description="Two-layer JPEG-compatible near-lossless HDR coding.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="encode an HDR image into a JPEG-compatible container")
    p.add_argument("input")
    p.add_argument("output")
    _add_coding_options(p)
    p.add_argument("--subsampling", choices=("444", "420"), default="444")
    p.add_argument("--codec", choices=sorted(CODECS), default="predictive-deflate")

    p = sub.add_parser("decode", help="decode a container to PPM/PFM/HDR (by output suffix)")
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("inspect", help="print header, tables and segment layout")
    p.add_argument("input")

    p = sub.add_parser("sweep", help="rate/distortion sweep over delta, CSV output")
    p.add_argument("input")
    p.add_argument("--deltas", type=_delta_range, default=list(range(15)), help="LO:HI or comma list")
    _add_coding_options(p, sweep_mode=True)
    p.add_argument("--csv", help="write the CSV here instead of stdout")
    return parser


def _inspect(path) -> str:
    data = Path(path).read_bytes()
    layers = decode_layers(data)
    header = layers.container.header
    lines = [f"file: {path} ({len(data)} bytes)"]
    for name, value in vars(header).items():
        lines.append(f"  {name}: {value}")
    lines.append(f"  base stream: {len(layers.container.base)} bytes")
    for k, (table, payload, reps) in enumerate(zip(layers.container.tables, layers.container.payloads, layers.reps)):
        lines.append(
            f"  plane {k}: bins={len(reps)} table={len(table)} bytes payload={len(payload)} bytes "
            f"reps[{int(reps[0])}..{int(reps[-1])}]"
        )
    lines.append("segments:")
    for marker, offset, length in segment_map(data):
        tag = " (extension)" if marker == APP11 else ""
        lines.append(f"  0xFF{marker:02X} at {offset}, {length} bytes{tag}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    transform = "none" if getattr(args, "no_ct", False) else "rct"
    try:
        mapping = FloatMapping(getattr(args, "mapping", "half"), getattr(args, "scale", 1.0))
        if args.command == "encode":
            point = encode_file(
                args.input, args.output, args.delta, args.parity, args.quality, transform,
                mapping, args.subsampling, args.codec,
            )
            print(
                f"epsilon={point.epsilon} delta={point.delta} bpp={point.bits_per_pixel:.4f} "
                f"max_abs_err={point.max_abs_error} psnr={point.psnr_db:.2f}dB"
            )
        elif args.command == "decode":
            decode_file(args.input, args.output)
        elif args.command == "inspect":
            print(_inspect(args.input))
        elif args.command == "sweep":
            text = sweep(args.input, args.deltas, args.quality, transform, args.parity, mapping, args.csv)
            if args.csv is None:
                sys.stdout.write(text)
    except IntegrityError as exc:
        print(f"zsqhdr: integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except FormatError as exc:
        print(f"zsqhdr: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ValueError as exc:
        print(f"zsqhdr: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"zsqhdr: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
