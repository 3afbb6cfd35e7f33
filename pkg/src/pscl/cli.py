"""Command-line entry point: ``pscl <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from .codec import encode
from .construction import ConstructionError, construct, read_code, write_code
from .crc import parse_crc_list
from .decoders import make_decoder
from .harness import ConfigError, load_config, run_campaign
from .memory import QuantSpec, format_bits, sweep

log = logging.getLogger("pscl")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def read_bit_frames(path) -> list[np.ndarray]:
    frames = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            text = "".join(line.split())
            if not text:
                continue
            if set(text) - {"0", "1"}:
                raise ValueError(f"{path}:{lineno}: bit lines may only contain 0 and 1")
            frames.append(np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"))
    return frames


def write_bit_frames(path, frames) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for bits in frames:
            fh.write("".join("1" if b else "0" for b in bits) + "\n")


def read_llr_frames(path) -> list[np.ndarray]:
    frames = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                frames.append(np.array([float(v) for v in line.split()]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed LLR line") from None
    return frames


def cmd_construct(args) -> int:
    code = construct(args.n, args.k, args.design_snr, args.method)
    write_code(code, args.out)
    log.info("wrote P(%d,%d) frozen set (%s at %.2f dB) to %s", code.N, code.K, code.method, args.design_snr, args.out)
    return 0


def cmd_encode(args) -> int:
    code = read_code(args.code)
    out = []
    for bits in read_bit_frames(args.infile):
        if bits.size == code.K and code.K != code.N:
            u = np.zeros(code.N, dtype=np.uint8)
            u[code.info_indices] = bits
            bits = u
        out.append(encode(code, bits))
    write_bit_frames(args.out, out)
    return 0


def cmd_decode(args) -> int:
    code = read_code(args.code)
    crcs = parse_crc_list(args.crc, args.partitions)
    decoder = make_decoder(code, args.algo, args.list, args.partitions, crcs)
    write_bit_frames(args.out, [decoder.decode(llrs) for llrs in read_llr_frames(args.infile)])
    return 0


def cmd_memory(args) -> int:
    rows = sweep(args.n, args.partitions, args.list, QuantSpec(args.qalpha, args.qpm))
    header = ["algorithm", "P", "L", "alpha_bits", "pm_bits", "beta_bits", "total_bits"]
    table = [
        [r.algorithm, str(r.P), str(r.L)]
        + [format_bits(v) for v in (r.alpha_bits, r.pm_bits, r.beta_bits, r.total_bits)]
        for r in rows
    ]
    if args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(table)
    else:
        widths = [max(len(x) for x in col) for col in zip(header, *table)]
        for line in [header] + table:
            print("  ".join(x.rjust(w) for x, w in zip(line, widths)))
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.override)
    result = run_campaign(cfg)
    for row in result.rows:
        print(f"{row.ebn0_db:6.2f} dB  FER {row.fer:.4e} ± {row.ci95:.1e}  BER {row.ber:.4e}  ({row.frame_errors}/{row.frames})")
    if result.metadata.get("io_errors"):
        print("pscl: error: some results could not be written", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pscl", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a frozen set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--design-snr", type=float, required=True, help="design Eb/N0 in dB")
    p.add_argument("--method", choices=("ga", "bhattacharyya"), default="ga")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("codec", help="polar encoding")
    codec_sub = p.add_subparsers(dest="codec_command", required=True)
    e = codec_sub.add_parser("encode", help="encode u vectors (N bits, or K info bits)")
    e.add_argument("--code", required=True)
    e.add_argument("--in", dest="infile", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode LLR frames")
    p.add_argument("--algo", choices=("sc", "scl", "pscl"), required=True)
    p.add_argument("--code", required=True)
    p.add_argument("--list", type=int, default=1)
    p.add_argument("--partitions", type=int, default=1)
    p.add_argument("--crc", default="none", help="width:polyhex[:inithex], one or one per partition")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("memory", help="decoder storage requirements in bits")
    p.add_argument("--n", type=int, default=2048)
    p.add_argument("--qalpha", type=int, default=6)
    p.add_argument("--qpm", type=int, default=8)
    p.add_argument("--list", type=_int_list, default=[2, 4, 8])
    p.add_argument("--partitions", type=_int_list, default=[1, 2, 4, 8])
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(func=cmd_memory)

    p = sub.add_parser("simulate", help="Monte-Carlo FER/BER campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ConstructionError, ValueError, OSError) as exc:
        print(f"pscl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
